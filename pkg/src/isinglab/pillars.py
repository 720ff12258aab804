"""Pillars above the reference plane: extraction, the cut-point
base/spine/increment decomposition, excess areas, tameness, and the
events A_h^x, E_h^x, G_h^x.

Cells are layer triples (a, b, c); the cell (a, b, c) has midpoint
height c + 1/2.  The pillar of a reference-plane face x is the (possibly
empty) *-connected plus component of the cell directly above x within
the upper half-space, read from the bubble-free configuration sigma(I).
A cut-point is a pillar cell alone in its slab; increments run from one
cut-point to the next, the remainder from the last cut-point up.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .interface import Interface, reconstruct_spins
from .ising import SpinConfig
from .lattice import Box, FaceRef

_STAR = [
    (da, db, dc)
    for da in (-1, 0, 1)
    for db in (-1, 0, 1)
    for dc in (-1, 0, 1)
    if (da, db, dc) != (0, 0, 0)
]
_NN = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]


class EmptyPillar(ValueError):
    pass


def cell_set_faces(cells) -> set[FaceRef]:
    """Bounding faces of a cell set (faces to any cell outside it)."""
    out = set()
    cs = set(cells)
    for a, b, c in cs:
        for da, db, dc in _NN:
            if (a + da, b + db, c + dc) in cs:
                continue
            if da:
                out.add(FaceRef(1, 2 * a + 1 + da, 2 * b + 1, 2 * c + 1))
            elif db:
                out.add(FaceRef(2, 2 * a + 1, 2 * b + 1 + db, 2 * c + 1))
            else:
                out.add(FaceRef(3, 2 * a + 1, 2 * b + 1, 2 * c + 1 + dc))
    return out


@dataclass(frozen=True)
class Pillar:
    x: FaceRef
    cells: frozenset  # layer triples, all with c >= 0
    faces: frozenset  # bounding faces strictly above the reference plane
    height: int  # hgt = top cell height + 1/2; 0 when empty

    def __bool__(self) -> bool:
        return bool(self.cells)


def pillar_from_config(config: SpinConfig, x: FaceRef) -> Pillar:
    """Pillar of x in a bubble-free configuration."""
    d = config.dims
    a0, b0 = (x.fx - 1) // 2, (x.fy - 1) // 2
    if not d.in_footprint(a0, b0):
        raise ValueError("x outside the box footprint")
    if config.spin(a0, b0, 0) != 1:
        return Pillar(x, frozenset(), frozenset(), 0)
    cells = {(a0, b0, 0)}
    queue = deque(cells)
    while queue:
        a, b, c = queue.popleft()
        for da, db, dc in _STAR:
            nb = (a + da, b + db, c + dc)
            if nb[2] < 0 or nb in cells:
                continue
            if config.spin(*nb) == 1:
                cells.add(nb)
                queue.append(nb)
    faces = frozenset(f for f in cell_set_faces(cells) if f.fz > 0)
    height = max(c for _, _, c in cells) + 1
    return Pillar(x, frozenset(cells), faces, height)


def pillar(iface: Interface, x: FaceRef) -> Pillar:
    return pillar_from_config(reconstruct_spins(iface), x)


@dataclass(frozen=True)
class PillarDecomposition:
    cut_points: tuple  # cells v_1..v_{T+1}, increasing height
    base: frozenset
    spine: frozenset
    increments: tuple  # T cell sets, X_i delimited by v_i, v_{i+1}
    remainder: frozenset  # X_{>T}: cells at and above the last cut-point

    @property
    def n_increments(self) -> int:
        return len(self.increments)


def decompose(p: Pillar) -> PillarDecomposition:
    if not p:
        raise EmptyPillar("cannot decompose an empty pillar")
    by_layer: dict[int, list] = {}
    for cell in p.cells:
        by_layer.setdefault(cell[2], []).append(cell)
    cuts = [cells[0] for c, cells in sorted(by_layer.items()) if len(cells) == 1]
    if len(cuts) < 2:
        if not cuts:
            # zero cut-points: the whole pillar is base, spine empty
            return PillarDecomposition((), p.cells, frozenset(), (), frozenset())
        v1 = cuts[0]
        base = frozenset(c for c in p.cells if c[2] < v1[2])
        spine = frozenset(c for c in p.cells if c[2] >= v1[2])
        return PillarDecomposition((v1,), base, spine, (), spine)
    c1 = cuts[0][2]
    base = frozenset(c for c in p.cells if c[2] < c1)
    spine = frozenset(c for c in p.cells if c[2] >= c1)
    increments = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        increments.append(
            frozenset(c for c in p.cells if lo[2] <= c[2] <= hi[2])
        )
    remainder = frozenset(c for c in p.cells if c[2] >= cuts[-1][2])
    return PillarDecomposition(tuple(cuts), base, spine, tuple(increments), remainder)


TRIVIAL_EXCESS = 0  # a trivial increment scores zero by construction


@dataclass(frozen=True)
class ExcessReport:
    m_base: int
    m_spine: int
    m_increments: tuple
    m_remainder: int


def increment_faces(cells, v_lo, v_hi) -> set[FaceRef]:
    """Bounding faces of an increment, without the caps below v_lo and
    above v_hi."""
    faces = cell_set_faces(cells)
    lo_cap = FaceRef(3, 2 * v_lo[0] + 1, 2 * v_lo[1] + 1, 2 * v_lo[2])
    hi_cap = FaceRef(3, 2 * v_hi[0] + 1, 2 * v_hi[1] + 1, 2 * v_hi[2] + 2)
    faces.discard(lo_cap)
    faces.discard(hi_cap)
    return faces


def increment_excess(cells, v_lo, v_hi) -> int:
    """|F(X)| - 4 (hgt(v_hi) - hgt(v_lo) + 1); zero iff trivial."""
    return len(increment_faces(cells, v_lo, v_hi)) - 4 * (v_hi[2] - v_lo[2] + 1)


def is_trivial_increment(cells, v_lo, v_hi) -> bool:
    return (
        len(cells) == 2
        and v_hi[2] == v_lo[2] + 1
        and v_hi[:2] == v_lo[:2]
    )


def remainder_excess(p: Pillar, d: PillarDecomposition) -> int:
    """Remainder scored against its trivialized (bare column) form; the
    convention hgt(v_{T+2}) = hgt(P) - 1/2 plus the single retained top
    ceiling face makes the bare column score exactly zero."""
    if not d.cut_points:
        raise EmptyPillar("remainder undefined without cut-points")
    v = d.cut_points[-1]
    faces = cell_set_faces(d.remainder)
    faces.discard(FaceRef(3, 2 * v[0] + 1, 2 * v[1] + 1, 2 * v[2]))
    c_top = p.height - 1
    return len(faces) - 4 * (c_top - v[2] + 1) - 1


def base_excess(p: Pillar, d: PillarDecomposition) -> int:
    """|F(B)| - |F(rho(B))| - 4 (hgt(v_1) - 1/2); zero for empty base."""
    if not d.base:
        return 0
    faces = {f for f in cell_set_faces(d.base) if f.fz > 0}
    cols = {(a, b) for a, b, _ in d.base}
    if d.cut_points:
        c1 = d.cut_points[0][2]
    else:
        c1 = p.height  # hgt(v_1) stands in for the top: spine is empty
    return len(faces) - len(cols) - 4 * c1


def excess_report(p: Pillar, d: PillarDecomposition) -> ExcessReport:
    m_base = base_excess(p, d)
    m_incs = tuple(
        increment_excess(x, lo, hi)
        for x, lo, hi in zip(d.increments, d.cut_points[:-1], d.cut_points[1:])
    )
    m_rem = remainder_excess(p, d) if d.cut_points else 0
    m_spine = sum(m_incs) + m_rem
    return ExcessReport(m_base, m_spine, m_incs, m_rem)


def spine_excess(p: Pillar) -> int:
    d = decompose(p)
    return excess_report(p, d).m_spine


# -- tameness ----------------------------------------------------------


def _diam2_d(cells) -> int:
    """4 * squared Euclidean diameter of the cell midpoints."""
    pts = [(2 * a + 1, 2 * b + 1, 2 * c + 1) for a, b, c in cells]
    best = 0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d2 = sum((u - v) ** 2 for u, v in zip(pts[i], pts[j]))
            best = max(best, d2)
    return best


def boundary_dist_d(x: FaceRef, dims: Box) -> int:
    """Doubled horizontal distance from x's midpoint to the footprint's
    side boundary."""
    return min(
        x.fx - 2 * dims.ax0,
        2 * (dims.ax0 + dims.nx) - x.fx,
        x.fy - 2 * dims.ay0,
        2 * (dims.ay0 + dims.ny) - x.fy,
    )


def is_tame(iface: Interface, x: FaceRef) -> bool:
    """diam(B_x) + m(S_x)/4 < d(x, side boundary), exactly.

    With dd the doubled boundary distance and D2 the doubled squared
    diameter, the inequality is sqrt(D2)/2 + m/4 < dd/2, i.e.
    4 D2 < (2 dd - m)^2 with 2 dd - m > 0.
    """
    p = pillar(iface, x)
    if not p:
        raise EmptyPillar("tameness is defined for nonempty pillars")
    return tame_from_pillar(p, iface.dims)


def tame_from_pillar(p: Pillar, dims: Box) -> bool:
    d = decompose(p)
    m = excess_report(p, d).m_spine
    d2 = _diam2_d(d.base) if d.base else 0
    dd = boundary_dist_d(p.x, dims)
    rhs = 2 * dd - m
    return rhs > 0 and 4 * d2 < rhs * rhs


# -- events ------------------------------------------------------------


def event_A(config: SpinConfig, x: FaceRef, h: int) -> bool:
    """x's cell reaches height h - 1/2 through plus cells with centers
    strictly between heights 0 and h, on the raw configuration."""
    if h < 1:
        raise ValueError("h must be a positive integer")
    d = config.dims
    a0, b0 = (x.fx - 1) // 2, (x.fy - 1) // 2
    if config.spin(a0, b0, 0) != 1:
        return False
    seen = {(a0, b0, 0)}
    queue = deque(seen)
    while queue:
        a, b, c = queue.popleft()
        if c == h - 1:
            return True
        for da, db, dc in _STAR:
            nb = (a + da, b + db, c + dc)
            if nb in seen or not (0 <= nb[2] <= h - 1):
                continue
            if config.spin(*nb) == 1:
                seen.add(nb)
                queue.append(nb)
    return False


def event_E(iface: Interface, x: FaceRef, h: int) -> bool:
    return pillar(iface, x).height >= h


def event_G(config: SpinConfig, iface: Interface, x: FaceRef, h: int) -> bool:
    if not event_A(config, x, h):
        return False
    p = pillar(iface, x)
    if p.height < h:
        return False
    return not decompose(p).base if p else False
