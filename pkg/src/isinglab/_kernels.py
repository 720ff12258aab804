"""Numba inner loops: heat-bath sweeps and interface observables.

Everything here operates on the padded spin array: shape
(nx+2, ny+2, nz+2) int8, halo cells frozen at the Dobrushin values for
their layer.  Interior index (i, j, k) is cell layer
(ax0+i-1, ay0+j-1, az0+k-1).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def sweep_block(pad, p_table, u):
    """Sequential heat-bath sweeps in canonical (C-order) cell order.

    pad: padded int8 spins, modified in place.
    p_table: p(+1) for each of the 7 possible neighbor sums -6..6 step 2.
    u: (nsweeps, ncells) uniforms, consumed in canonical order.
    """
    nx = pad.shape[0] - 2
    ny = pad.shape[1] - 2
    nz = pad.shape[2] - 2
    for t in range(u.shape[0]):
        idx = 0
        for i in range(1, nx + 1):
            for j in range(1, ny + 1):
                for k in range(1, nz + 1):
                    s = (
                        pad[i - 1, j, k]
                        + pad[i + 1, j, k]
                        + pad[i, j - 1, k]
                        + pad[i, j + 1, k]
                        + pad[i, j, k - 1]
                        + pad[i, j, k + 1]
                    )
                    p = p_table[(s + 6) // 2]
                    if u[t, idx] < p:
                        pad[i, j, k] = 1
                    else:
                        pad[i, j, k] = -1
                    idx += 1


@njit(cache=True)
def energy_pad(pad):
    """Disagreeing nearest-neighbor pairs, interior-interior plus
    interior-halo (each such pair counted once)."""
    nx = pad.shape[0] - 2
    ny = pad.shape[1] - 2
    nz = pad.shape[2] - 2
    e = 0
    for i in range(1, nx + 1):
        for j in range(1, ny + 1):
            for k in range(1, nz + 1):
                s = pad[i, j, k]
                # forward interior pairs once each
                if i < nx and pad[i + 1, j, k] != s:
                    e += 1
                if j < ny and pad[i, j + 1, k] != s:
                    e += 1
                if k < nz and pad[i, j, k + 1] != s:
                    e += 1
                # halo pairs belong uniquely to their interior cell
                if i == 1 and pad[0, j, k] != s:
                    e += 1
                if i == nx and pad[nx + 1, j, k] != s:
                    e += 1
                if j == 1 and pad[i, 0, k] != s:
                    e += 1
                if j == ny and pad[i, ny + 1, k] != s:
                    e += 1
                if k == 1 and pad[i, j, 0] != s:
                    e += 1
                if k == nz and pad[i, j, nz + 1] != s:
                    e += 1
    return e


@njit(cache=True)
def flip_fixpoint_pad(pad, c0_k):
    """Flip finite monochromatic *-components until none remain.

    A plus component is infinite iff *-connected to the lower halo
    (layers below the box) or, through side halos, to a plus halo cell;
    halo spins encode the Dobrushin rule so "matching-sign boundary
    region" is exactly "a halo cell of the same sign".  c0_k is unused
    but kept for signature stability.  Modifies pad in place; returns
    the number of flip rounds.
    """
    nx = pad.shape[0] - 2
    ny = pad.shape[1] - 2
    nz = pad.shape[2] - 2
    ncells = nx * ny * nz
    label = np.empty((nx + 2, ny + 2, nz + 2), np.int32)
    stack = np.empty(ncells, np.int64)
    rounds = 0
    changed = True
    while changed:
        changed = False
        rounds += 1
        label[:] = -1
        comp = 0
        for i0 in range(1, nx + 1):
            for j0 in range(1, ny + 1):
                for k0 in range(1, nz + 1):
                    if label[i0, j0, k0] >= 0:
                        continue
                    sgn = pad[i0, j0, k0]
                    # flood this *-component, tracking halo contact
                    top = 0
                    stack[top] = (i0 * (ny + 2) + j0) * (nz + 2) + k0
                    top += 1
                    label[i0, j0, k0] = comp
                    infinite = False
                    size = 0
                    while top > 0:
                        top -= 1
                        code = stack[top]
                        k = code % (nz + 2)
                        j = (code // (nz + 2)) % (ny + 2)
                        i = code // ((nz + 2) * (ny + 2))
                        size += 1
                        for di in range(-1, 2):
                            for dj in range(-1, 2):
                                for dk in range(-1, 2):
                                    if di == 0 and dj == 0 and dk == 0:
                                        continue
                                    ii = i + di
                                    jj = j + dj
                                    kk = k + dk
                                    if (
                                        ii < 0
                                        or ii > nx + 1
                                        or jj < 0
                                        or jj > ny + 1
                                        or kk < 0
                                        or kk > nz + 1
                                    ):
                                        continue
                                    if pad[ii, jj, kk] != sgn:
                                        continue
                                    interior = (
                                        1 <= ii <= nx
                                        and 1 <= jj <= ny
                                        and 1 <= kk <= nz
                                    )
                                    if not interior:
                                        infinite = True
                                        continue
                                    if label[ii, jj, kk] < 0:
                                        label[ii, jj, kk] = comp
                                        stack[top] = (
                                            ii * (ny + 2) + jj
                                        ) * (nz + 2) + kk
                                        top += 1
                    if not infinite:
                        # flip the whole finite component
                        for i in range(1, nx + 1):
                            for j in range(1, ny + 1):
                                for k in range(1, nz + 1):
                                    if label[i, j, k] == comp:
                                        pad[i, j, k] = -sgn
                                        label[i, j, k] = comp + 1  # avoid refloods
                        changed = True
                    comp += 2
    return rounds


@njit(cache=True)
def screen_tall_columns(pad, c0_k, hmin):
    """Cheap exact screen for "some pillar reaches height hmin".

    A fixpoint plus cell at layer hmin-1 requires a raw plus cell at
    some layer >= hmin-1: flipping can only create plus cells strictly
    below the highest existing plus cell (a finite minus component needs
    plus above it to be cut off from the top halo).  So scanning the raw
    spins at layers >= hmin-1 never gives a false negative; false
    positives are filtered by the full observable."""
    nx = pad.shape[0] - 2
    ny = pad.shape[1] - 2
    nz = pad.shape[2] - 2
    for k in range(c0_k + hmin, nz + 1):
        for i in range(1, nx + 1):
            for j in range(1, ny + 1):
                if pad[i, j, k] == 1:
                    return True
    return False


@njit(cache=True)
def upper_plus_observables(pad, c0_k):
    """Pillar heights and the interface maximum after fixpoint.

    Labels 26-connected components of plus cells at layers >= 0 in the
    fixpoint configuration.  Every such component hangs from layer 0
    (otherwise it would have been flipped), so per-column:
      pillar_height[i,j] = 1 + max layer of the component containing the
      layer-0 plus cell of column (i,j), or 0 if that cell is minus.
    Returns (pillar_height (nx,ny) int32, M = max over components of
    (top layer + 1), as the interface maximum).
    """
    nx = pad.shape[0] - 2
    ny = pad.shape[1] - 2
    nz = pad.shape[2] - 2
    k0 = c0_k + 1  # k index of layer 0
    label = np.full((nx, ny, nz - c0_k), -1, np.int32)
    comp_top = np.empty(nx * ny * (nz - c0_k), np.int32)
    stack = np.empty(nx * ny * (nz - c0_k), np.int64)
    comp = 0
    for i0 in range(nx):
        for j0 in range(ny):
            for m0 in range(nz - c0_k):
                if label[i0, j0, m0] >= 0 or pad[i0 + 1, j0 + 1, k0 + m0] != 1:
                    continue
                top = 0
                stack[top] = (i0 * ny + j0) * (nz - c0_k) + m0
                top += 1
                label[i0, j0, m0] = comp
                tmax = m0
                while top > 0:
                    top -= 1
                    code = stack[top]
                    m = code % (nz - c0_k)
                    j = (code // (nz - c0_k)) % ny
                    i = code // ((nz - c0_k) * ny)
                    if m > tmax:
                        tmax = m
                    for di in range(-1, 2):
                        for dj in range(-1, 2):
                            for dm in range(-1, 2):
                                if di == 0 and dj == 0 and dm == 0:
                                    continue
                                ii = i + di
                                jj = j + dj
                                mm = m + dm
                                if (
                                    ii < 0
                                    or ii >= nx
                                    or jj < 0
                                    or jj >= ny
                                    or mm < 0
                                    or mm >= nz - c0_k
                                ):
                                    continue
                                if (
                                    label[ii, jj, mm] < 0
                                    and pad[ii + 1, jj + 1, k0 + mm] == 1
                                ):
                                    label[ii, jj, mm] = comp
                                    stack[top] = (
                                        (ii * ny + jj) * (nz - c0_k) + mm
                                    )
                                    top += 1
                comp_top[comp] = tmax
                comp += 1
    ph = np.zeros((nx, ny), np.int32)
    mmax = 0
    for i in range(nx):
        for j in range(ny):
            if label[i, j, 0] >= 0:
                t = comp_top[label[i, j, 0]] + 1
                ph[i, j] = t
                if t > mmax:
                    mmax = t
    # components not touching layer 0 cannot exist at the fixpoint, but
    # fold them into the maximum anyway so M is right regardless
    for c in range(comp):
        if comp_top[c] + 1 > mmax:
            mmax = comp_top[c] + 1
    return ph, mmax
