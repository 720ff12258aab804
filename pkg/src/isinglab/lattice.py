"""Exact integer geometry for the cell/face complex of Z^3.

Midpoint coordinates are stored doubled, so everything is an integer:
a cell midpoint has three odd coordinates, a face midpoint is even along
its normal axis and odd along the other two.  Axis 3 is the vertical
direction; faces with axis 3 are horizontal.  All geometric predicates
are exact integer arithmetic, no floating point anywhere.

Cells are alternatively addressed by their "layer coordinates"
(a, b, c): the cell with layer coordinates (a, b, c) has doubled
midpoint (2a+1, 2b+1, 2c+1), i.e. true midpoint (a+1/2, b+1/2, c+1/2).
Its height is c + 1/2, so cells with c >= 0 sit above the reference
plane L0 (z = 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple


class CellRef(NamedTuple):
    """A cell of Z^3, doubled midpoint coordinates (all odd)."""

    cx: int
    cy: int
    cz: int

    @property
    def layers(self) -> tuple[int, int, int]:
        return ((self.cx - 1) // 2, (self.cy - 1) // 2, (self.cz - 1) // 2)


class FaceRef(NamedTuple):
    """A face of Z^3: normal axis in {1,2,3} plus doubled midpoint."""

    axis: int
    fx: int
    fy: int
    fz: int

    @property
    def horizontal(self) -> bool:
        return self.axis == 3

    @property
    def top_d(self) -> int:
        """Doubled z coordinate of the highest point of the face."""
        return self.fz if self.axis == 3 else self.fz + 1


class ProjRef(NamedTuple):
    """Projection of a cell or face onto L0: a face or an edge of L0."""

    kind: str  # "face" or "edge"
    px: int
    py: int


def cell(a: int, b: int, c: int) -> CellRef:
    """Cell from layer coordinates."""
    return CellRef(2 * a + 1, 2 * b + 1, 2 * c + 1)


def cell_ok(v: CellRef) -> bool:
    return all(x % 2 == 1 for x in (v.cx, v.cy, v.cz))


def face_ok(f: FaceRef) -> bool:
    if f.axis not in (1, 2, 3):
        return False
    par = [f.fx % 2, f.fy % 2, f.fz % 2]
    want = [1, 1, 1]
    want[f.axis - 1] = 0
    return par == want


def cell_vertices(v: CellRef) -> frozenset[tuple[int, int, int]]:
    """The 8 bounding vertices, doubled (hence even) coordinates."""
    return frozenset(
        (v.cx + sx, v.cy + sy, v.cz + sz)
        for sx in (-1, 1)
        for sy in (-1, 1)
        for sz in (-1, 1)
    )


@lru_cache(maxsize=1 << 18)
def face_vertices(f: FaceRef) -> frozenset[tuple[int, int, int]]:
    """The 4 bounding vertices, doubled coordinates."""
    spans = {1: (0, 1, 1), 2: (1, 0, 1), 3: (1, 1, 0)}[f.axis]
    out = []
    for sx in (-spans[0], spans[0]) if spans[0] else (0,):
        for sy in (-spans[1], spans[1]) if spans[1] else (0,):
            for sz in (-spans[2], spans[2]) if spans[2] else (0,):
                out.append((f.fx + sx, f.fy + sy, f.fz + sz))
    # spans of 0 duplicate the loop entry; dedupe via frozenset
    return frozenset(out)


def adjacency_class(a, b) -> str:
    """'disjoint' / 'adjacent' / 'star_adjacent' for two cells or two faces.

    Cells are adjacent iff they share a bounding face (midpoint distance
    one), faces iff they share a bounding edge; either kind is
    star-adjacent iff the bounding vertex sets intersect.
    """
    if type(a) is not type(b):
        raise ValueError("mixed kinds in adjacency_class")
    if a == b:
        raise ValueError("adjacency_class of identical objects")
    if isinstance(a, CellRef):
        d = sorted((abs(a.cx - b.cx), abs(a.cy - b.cy), abs(a.cz - b.cz)))
        if d == [0, 0, 2]:
            return "adjacent"
        if d[2] <= 2:
            return "star_adjacent"
        return "disjoint"
    if isinstance(a, FaceRef):
        shared = face_vertices(a) & face_vertices(b)
        if len(shared) >= 2:
            return "adjacent"
        if len(shared) == 1:
            return "star_adjacent"
        return "disjoint"
    raise ValueError("adjacency_class expects CellRef or FaceRef pairs")


@lru_cache(maxsize=1 << 18)
def project(x) -> ProjRef:
    """rho: zero the vertical coordinate.

    Horizontal faces and cells project to faces of L0, vertical faces to
    edges of L0.
    """
    if isinstance(x, CellRef):
        return ProjRef("face", x.cx, x.cy)
    if isinstance(x, FaceRef):
        return ProjRef("face" if x.axis == 3 else "edge", x.fx, x.fy)
    raise ValueError("project expects CellRef or FaceRef")


def faces_between(a: CellRef, b: CellRef) -> FaceRef:
    """The unique shared bounding face of two adjacent cells."""
    dx, dy, dz = b.cx - a.cx, b.cy - a.cy, b.cz - a.cz
    d = sorted((abs(dx), abs(dy), abs(dz)))
    if d != [0, 0, 2]:
        raise ValueError("cells are not adjacent")
    if dx != 0:
        axis = 1
    elif dy != 0:
        axis = 2
    else:
        axis = 3
    return FaceRef(axis, a.cx + dx // 2, a.cy + dy // 2, a.cz + dz // 2)


def l0_face(a: int, b: int) -> FaceRef:
    """The face of L0 over the unit square with low corner (a, b)."""
    return FaceRef(3, 2 * a + 1, 2 * b + 1, 0)


@dataclass(frozen=True)
class Box:
    """A finite cell box: layer-coordinate ranges [ax0, ax0+nx) etc.

    The Dobrushin rule is frozen outside: a cell outside the box reads
    -1 if its height is positive (layer c >= 0) and +1 otherwise.
    """

    nx: int
    ny: int
    nz: int
    ax0: int
    ay0: int
    az0: int

    @classmethod
    def centered(cls, n: int, m: int, h_cap: int) -> "Box":
        """The standard box: (2n+1) x (2m+1) footprint, 2*h_cap cell
        layers placed symmetrically about the reference plane.

        An odd symmetric layer count does not exist (cell heights are
        half-integers), so the vertical extent is the even count that
        keeps the Dobrushin rule invariant under spin flip + z -> -z.
        """
        if n < 1 or m < 1 or h_cap < 1:
            raise ValueError("box half-extents must be positive")
        return cls(2 * n + 1, 2 * m + 1, 2 * h_cap, -n, -m, -h_cap)

    @classmethod
    def general(cls, nx: int, ny: int, nz: int) -> "Box":
        """A small general box (oracle use), roughly centered."""
        if nx < 1 or ny < 1 or nz < 1:
            raise ValueError("box extents must be positive")
        return cls(nx, ny, nz, -(nx // 2), -(ny // 2), -(nz // 2))

    # -- derived shape -------------------------------------------------

    @property
    def n(self) -> int:
        return (self.nx - 1) // 2

    @property
    def m(self) -> int:
        return (self.ny - 1) // 2

    @property
    def h_cap(self) -> int:
        return self.nz // 2

    @property
    def ncells(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def c_lo(self) -> int:
        return self.az0

    @property
    def c_hi(self) -> int:
        """One past the highest cell layer."""
        return self.az0 + self.nz

    def contains(self, a: int, b: int, c: int) -> bool:
        return (
            self.ax0 <= a < self.ax0 + self.nx
            and self.ay0 <= b < self.ay0 + self.ny
            and self.az0 <= c < self.az0 + self.nz
        )

    def in_footprint(self, a: int, b: int) -> bool:
        return self.ax0 <= a < self.ax0 + self.nx and self.ay0 <= b < self.ay0 + self.ny

    @staticmethod
    def boundary_spin(c: int) -> int:
        """Dobrushin rule for a cell outside the box at layer c."""
        return -1 if c >= 0 else 1

    def flat_index(self, a: int, b: int, c: int) -> int:
        """Canonical cell order: C order over (a, b, c) offsets."""
        return ((a - self.ax0) * self.ny + (b - self.ay0)) * self.nz + (c - self.az0)

    def iter_cells(self) -> Iterator[tuple[int, int, int]]:
        for a in range(self.ax0, self.ax0 + self.nx):
            for b in range(self.ay0, self.ay0 + self.ny):
                for c in range(self.az0, self.az0 + self.nz):
                    yield (a, b, c)

    def footprint_squares(self) -> Iterator[tuple[int, int]]:
        for a in range(self.ax0, self.ax0 + self.nx):
            for b in range(self.ay0, self.ay0 + self.ny):
                yield (a, b)

    def l0_faces(self) -> list[FaceRef]:
        return [l0_face(a, b) for a, b in self.footprint_squares()]

    def face_in_box(self, f: FaceRef) -> bool:
        """True iff all bounding vertices of f lie in the box's closure."""
        lo = (2 * self.ax0, 2 * self.ay0, 2 * self.az0)
        hi = (
            2 * (self.ax0 + self.nx),
            2 * (self.ay0 + self.ny),
            2 * (self.az0 + self.nz),
        )
        for i, v in enumerate((f.fx, f.fy, f.fz)):
            half = 0 if f.axis == i + 1 else 1
            if v - half < lo[i] or v + half > hi[i]:
                return False
        return True


def BoxDims(n: int, m: int, h_cap: int) -> Box:
    """Standard centered box (spec naming)."""
    return Box.centered(n, m, h_cap)


def default_h_cap(n: int, beta: float) -> int:
    """Default vertical truncation: excursions above this height are
    negligible at low temperature."""
    import math

    return 4 * math.ceil(math.log(2 * n) / beta) + 8


def face_key(f: FaceRef) -> tuple[int, int, int, int]:
    """Canonical global face order: lexicographic on (axis, midpoint)."""
    return (f.axis, f.fx, f.fy, f.fz)
