"""Extraction of the Dobrushin interface from a spin configuration and
reconstruction of the canonical (bubble-free) configuration from it.

The interface of sigma is the *-connected component of the disagreement
face set F(sigma) that contains the flat plane just outside the box,
restricted to faces of the box.  Reconstruction goes column by column:
horizontal interface faces are exactly the sign changes along a column,
with the spin far above fixed at -1, so the spin at layer c is +1 iff
the column holds an odd number of horizontal faces at heights >= c+1.
"""

from __future__ import annotations

from collections import defaultdict, deque

import numpy as np

from . import _kernels
from .ising import SpinConfig
from .lattice import Box, FaceRef, face_key, face_vertices


class InconsistentInterface(ValueError):
    """The face set cannot be realized by any spin configuration."""


class Interface:
    """Canonically sorted face set of one interface over a box."""

    __slots__ = ("dims", "faces")

    def __init__(self, dims: Box, faces):
        self.dims = dims
        # FaceRef tuple order coincides with face_key order
        self.faces = tuple(sorted(set(faces)))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Interface)
            and self.dims == other.dims
            and self.faces == other.faces
        )

    def __hash__(self) -> int:
        return hash((self.dims, self.faces))

    def __len__(self) -> int:
        return len(self.faces)


def flat_interface(dims: Box) -> Interface:
    return Interface(dims, dims.l0_faces())


def disagreement_faces(config: SpinConfig) -> list[FaceRef]:
    """F(sigma) restricted to the box: faces between disagreeing cells,
    at least one of which is interior (the other may carry the frozen
    boundary spin)."""
    d = config.dims
    pad = config.padded()
    out = []
    diff_x = pad[:-1, 1:-1, 1:-1] != pad[1:, 1:-1, 1:-1]
    diff_y = pad[1:-1, :-1, 1:-1] != pad[1:-1, 1:, 1:-1]
    diff_z = pad[1:-1, 1:-1, :-1] != pad[1:-1, 1:-1, 1:]
    for i, j, k in zip(*np.nonzero(diff_x)):
        # face between cells at x offsets i-1 and i (pad frame)
        out.append(
            FaceRef(1, 2 * (d.ax0 + i), 2 * (d.ay0 + j) + 1, 2 * (d.az0 + k) + 1)
        )
    for i, j, k in zip(*np.nonzero(diff_y)):
        out.append(
            FaceRef(2, 2 * (d.ax0 + i) + 1, 2 * (d.ay0 + j), 2 * (d.az0 + k) + 1)
        )
    for i, j, k in zip(*np.nonzero(diff_z)):
        out.append(
            FaceRef(3, 2 * (d.ax0 + i) + 1, 2 * (d.ay0 + j) + 1, 2 * (d.az0 + k))
        )
    return out


def _touches_outside_plane(f: FaceRef, d: Box) -> bool:
    """Shares a bounding vertex with an L0 face outside the box."""
    xlo, xhi = 2 * d.ax0, 2 * (d.ax0 + d.nx)
    ylo, yhi = 2 * d.ay0, 2 * (d.ay0 + d.ny)
    for vx, vy, vz in face_vertices(f):
        if vz == 0 and (vx in (xlo, xhi) or vy in (ylo, yhi)):
            return True
    return False


def extract(config: SpinConfig) -> Interface:
    """The *-connected component of F(sigma) containing the plane faces
    just outside the box; breadth-first over shared bounding vertices in
    canonical face order."""
    d = config.dims
    faces = sorted(disagreement_faces(config), key=face_key)
    by_vertex = defaultdict(list)
    for idx, f in enumerate(faces):
        for v in face_vertices(f):
            by_vertex[v].append(idx)
    seen = [False] * len(faces)
    queue = deque()
    for idx, f in enumerate(faces):
        if _touches_outside_plane(f, d):
            seen[idx] = True
            queue.append(idx)
    while queue:
        idx = queue.popleft()
        for v in face_vertices(faces[idx]):
            for j in by_vertex[v]:
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
    return Interface(d, [f for idx, f in enumerate(faces) if seen[idx]])


def flip_fixpoint(config: SpinConfig) -> SpinConfig:
    """Flip finite monochromatic *-components until none remain.

    A component is finite when it is not *-connected to its phase's
    boundary region (plus below, minus above, per the Dobrushin halo).
    """
    pad = config.padded()
    _kernels.flip_fixpoint_pad(pad, -config.dims.az0)
    return SpinConfig(config.dims, pad[1:-1, 1:-1, 1:-1])


def extract_fixpoint(config: SpinConfig) -> Interface:
    """Interface via the flip-fixpoint description: all disagreement
    faces of the fixpoint configuration.  Equal to extract() on every
    configuration (asserted as a property test)."""
    return Interface(config.dims, disagreement_faces(flip_fixpoint(config)))


def reconstruct_spins(iface: Interface) -> SpinConfig:
    """The unique bubble-free configuration realizing the interface.

    Errors with InconsistentInterface when a column's horizontal-face
    parity is impossible or when the realized disagreement set differs
    from the input (e.g. a dangling vertical face).
    """
    d = iface.dims
    heights = defaultdict(list)  # column -> doubled z of horizontal faces
    for f in iface.faces:
        if f.axis == 3:
            heights[((f.fx - 1) // 2, (f.fy - 1) // 2)].append(f.fz)
    spins = np.full((d.nx, d.ny, d.nz), -1, np.int8)
    for a in range(d.ax0, d.ax0 + d.nx):
        for b in range(d.ay0, d.ay0 + d.ny):
            hs = heights.get((a, b), [])
            if len(hs) % 2 == 0:
                raise InconsistentInterface(
                    f"column {(a, b)} crosses the interface an even number "
                    f"of times ({len(hs)})"
                )
            hs = sorted(hs)
            sgn = -1  # above the topmost face
            pos = len(hs) - 1
            for c in range(d.az0 + d.nz - 1, d.az0 - 1, -1):
                while pos >= 0 and hs[pos] >= 2 * (c + 1):
                    sgn = -sgn
                    pos -= 1
                spins[a - d.ax0, b - d.ay0, c - d.az0] = sgn
    config = SpinConfig(d, spins)
    realized = extract(config)
    if realized.faces != iface.faces:
        raise InconsistentInterface(
            "face set is not realizable: reconstruction disagrees on "
            f"{len(set(realized.faces) ^ set(iface.faces))} faces"
        )
    return config


def excess(i: Interface, j: Interface) -> int:
    """|I| - |J|; the excess face count of I over J."""
    if i.dims != j.dims:
        raise ValueError("excess needs interfaces over the same box")
    return len(i.faces) - len(j.faces)
