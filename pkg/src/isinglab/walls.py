"""Wall/ceiling decomposition of an interface, standardization, the
bijection with admissible standard-wall collections, groups of walls,
and excess areas.

Plane bookkeeping happens in doubled 2D coordinates on the reference
plane: squares are (odd, odd), edges have exactly one even coordinate,
vertices are (even, even).  A face set over the box induces a "terrain":
per column the set of heights of its horizontal faces, propagated across
column edges by the parity rule

    H(u') = H(u) xor dV(e),   dV(e) = {h : exactly one of h-1, h in V(e)},

where V(e) is the set of cell layers holding a vertical face over the
edge e.  For a valid interface the terrain of an uncovered column is a
single ceiling height; any contradiction is a structural error, never
silently patched.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from functools import lru_cache

from .interface import Interface
from .lattice import Box, FaceRef, ProjRef, face_key, face_vertices, l0_face, project


class InconsistentWalls(ValueError):
    """Face set admits no consistent terrain or wall structure."""


class InadmissibleCollection(ValueError):
    """Standard walls with overlapping projections."""


class TruncationOverflow(ValueError):
    """A reconstructed wall escapes the finite box."""


class FootprintClipped(ValueError):
    """A wall's projection touches the footprint boundary; nesting is
    undefined for it in the truncated geometry."""


# -- plane elements ----------------------------------------------------


def _element_kind(x: int, y: int) -> str:
    if x % 2 == 1 and y % 2 == 1:
        return "square"
    if x % 2 == 0 and y % 2 == 0:
        return "vertex"
    return "edge"


def covered_elements(faces) -> set[tuple[int, int]]:
    """Closure of the projection: squares, edges and vertices of the
    reference plane covered by rho of the face set."""
    out: set[tuple[int, int]] = set()
    for f in faces:
        if f.axis == 3:
            x, y = f.fx, f.fy
            out.add((x, y))
            out.update(
                ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1),
                 (x - 1, y - 1), (x - 1, y + 1), (x + 1, y - 1), (x + 1, y + 1))
            )
        elif f.axis == 1:
            out.add((f.fx, f.fy))
            out.update(((f.fx, f.fy - 1), (f.fx, f.fy + 1)))
        else:
            out.add((f.fx, f.fy))
            out.update(((f.fx - 1, f.fy), (f.fx + 1, f.fy)))
    return out


_covered_cached = lru_cache(maxsize=1 << 17)(covered_elements)


def _element_neighbors(x: int, y: int):
    kind = _element_kind(x, y)
    if kind == "square" or kind == "vertex":
        return (
            (x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1),
            (x - 1, y - 1), (x - 1, y + 1), (x + 1, y - 1), (x + 1, y + 1),
        )
    if x % 2 == 0:  # edge along y: endpoint vertices and flanking squares
        return ((x, y - 1), (x, y + 1), (x - 1, y), (x + 1, y))
    return ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1))


@lru_cache(maxsize=64)
def _extended_universe(dims: Box) -> frozenset[tuple[int, int]]:
    """All plane elements of the footprint extended by one square ring."""
    xs = range(2 * (dims.ax0 - 1), 2 * (dims.ax0 + dims.nx + 1) + 1)
    ys = range(2 * (dims.ay0 - 1), 2 * (dims.ay0 + dims.ny + 1) + 1)
    return frozenset((x, y) for x in xs for y in ys)


def complement_components(covered, dims: Box):
    """Connected components of the uncovered plane elements over the
    extended footprint.  Returns (components, infinite_index); the
    infinite component is the one containing the outer ring."""
    universe = _extended_universe(dims)
    uncovered = universe - set(covered)
    seen: dict[tuple[int, int], int] = {}
    comps: list[set[tuple[int, int]]] = []
    ring_square = (2 * (dims.ax0 - 1) + 1, 2 * (dims.ay0 - 1) + 1)
    order = [ring_square] + sorted(uncovered)
    for start in order:
        if start not in uncovered or start in seen:
            continue
        comp = set()
        queue = deque([start])
        seen[start] = len(comps)
        while queue:
            e = queue.popleft()
            comp.add(e)
            for nb in _element_neighbors(*e):
                if nb in uncovered and nb not in seen:
                    seen[nb] = len(comps)
                    queue.append(nb)
        comps.append(comp)
    return comps, 0  # ring square is seeded first, so index 0 is infinite


# -- terrain -----------------------------------------------------------


def terrain(faces, dims: Box) -> dict[tuple[int, int], frozenset[int]]:
    """Per-column height sets induced by a face set, keyed by square
    layer coordinates over the extended footprint.

    Verified self-consistent across every column edge; raises
    InconsistentWalls on any contradiction (the face set then realizes
    no spin configuration flat at infinity).
    """
    # height sets are packed as integer bitmasks (bit h + off <-> height
    # h), so terrain propagation is XOR arithmetic; a column's crossing
    # set dv over an edge is V ^ (V << 1) for the packed vertical layers;
    # columns live on a flat list over the extended footprint grid
    minh = 0
    for f in faces:
        z = int(f.fz) // 2 if f.axis == 3 else (int(f.fz) - 1) // 2
        if z < minh:
            minh = z
    off = 2 - minh
    a_lo = dims.ax0 - 1
    b_lo = dims.ay0 - 1
    na = dims.nx + 2
    nb = dims.ny + 2
    h_mask: dict[tuple[int, int], int] = {}
    vx = [0] * ((na + 1) * nb)  # edge between columns (i-1, j) and (i, j)
    vy = [0] * (na * (nb + 1))  # edge between columns (i, j-1) and (i, j)
    for f in faces:
        if f.axis == 3:
            u = ((f.fx - 1) // 2, (f.fy - 1) // 2)
            h_mask[u] = h_mask.get(u, 0) | (1 << (int(f.fz) // 2 + off))
        elif f.axis == 1:
            i = int(f.fx) // 2 - a_lo
            j = (int(f.fy) - 1) // 2 - b_lo
            if 0 <= i <= na and 0 <= j < nb:
                vx[i * nb + j] |= 1 << ((int(f.fz) - 1) // 2 + off)
        else:
            i = (int(f.fx) - 1) // 2 - a_lo
            j = int(f.fy) // 2 - b_lo
            if 0 <= i < na and 0 <= j <= nb:
                vy[i * (nb + 1) + j] |= 1 << ((int(f.fz) - 1) // 2 + off)
    base = 1 << off
    packed = [-1] * (na * nb)
    packed[0] = base
    stack = [0]
    pop = stack.pop
    push = stack.append
    while stack:
        idx = pop()
        here = packed[idx]
        i, j = divmod(idx, nb)
        if i + 1 < na:
            e = vx[idx + nb]
            _propagate(packed, idx + nb, here ^ e ^ (e << 1), push,
                       (i + 1 + a_lo, j + b_lo))
        if i > 0:
            e = vx[idx]
            _propagate(packed, idx - nb, here ^ e ^ (e << 1), push,
                       (i - 1 + a_lo, j + b_lo))
        if j + 1 < nb:
            e = vy[i * (nb + 1) + j + 1]
            _propagate(packed, idx + 1, here ^ e ^ (e << 1), push,
                       (i + a_lo, j + 1 + b_lo))
        if j > 0:
            e = vy[i * (nb + 1) + j]
            _propagate(packed, idx - 1, here ^ e ^ (e << 1), push,
                       (i + a_lo, j - 1 + b_lo))
    # columns with explicit horizontal faces must match the propagation
    for u, m in h_mask.items():
        i = u[0] - a_lo
        j = u[1] - b_lo
        cur = packed[i * nb + j] if 0 <= i < na and 0 <= j < nb else 0
        if cur != m:
            raise InconsistentWalls(
                f"horizontal faces over column {u} disagree with terrain"
            )
    if packed[0] != base:
        raise InconsistentWalls("outer ring is not at the reference height")
    heights: dict[tuple[int, int], frozenset[int]] = {}
    for idx, m in enumerate(packed):
        hs = []
        while m > 0:
            low = m & -m
            hs.append(low.bit_length() - 1 - off)
            m ^= low
        i, j = divmod(idx, nb)
        heights[(i + a_lo, j + b_lo)] = frozenset(hs)
    return heights


def _propagate(packed, idx, want, push, col):
    have = packed[idx]
    if have < 0:
        packed[idx] = want
        push(idx)
    elif have != want:
        raise InconsistentWalls(f"terrain contradiction at column {col}")


@lru_cache(maxsize=1 << 16)
def _terrain_cached(faces: frozenset, dims: Box):
    return terrain(faces, dims)


# -- classification and walls -----------------------------------------


@dataclass(frozen=True)
class FaceClassification:
    labels: dict  # FaceRef -> "ceiling" | "wall"
    n_rho: dict  # ProjRef -> positive int


def n_rho_of(faces) -> dict[ProjRef, int]:
    out: dict[ProjRef, int] = defaultdict(int)
    for f in faces:
        out[project(f)] += 1
    return dict(out)


def classify(iface: Interface) -> FaceClassification:
    n_rho = n_rho_of(iface.faces)
    labels = {}
    for f in iface.faces:
        if f.axis == 3 and n_rho[project(f)] == 1:
            labels[f] = "ceiling"
        else:
            labels[f] = "wall"
    return FaceClassification(labels, n_rho)


@dataclass(frozen=True)
class Wall:
    faces: frozenset
    index: FaceRef  # face of the reference plane
    floor_height: int
    ceilings: tuple  # ((height, frozenset of square layer coords), ...)

    def __len__(self) -> int:
        return len(self.faces)


def wall_excess(w: Wall) -> int:
    """|W| minus the number of reference-plane faces in rho(W)."""
    squares = {(f.fx, f.fy) for f in w.faces if f.axis == 3}
    return len(w.faces) - len(squares)


def _star_components(faces):
    """*-connected components of a face collection, canonical order.

    Union-find over shared vertices: all faces meeting a vertex are
    mutually *-adjacent, so chaining each face to the last face seen at
    the vertex links the whole bundle transitively.
    """
    faces = sorted(faces)  # FaceRef tuple order == face_key order
    n = len(faces)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    last: dict[tuple, int] = {}
    for i, f in enumerate(faces):
        for v in face_vertices(f):
            j = last.get(v)
            if j is None:
                last[v] = i
            else:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    members: dict[int, list] = {}
    order = []
    for i, f in enumerate(faces):
        r = find(i)
        if r in members:
            members[r].append(f)
        else:
            members[r] = [f]
            order.append(r)
    return [frozenset(members[r]) for r in order]


def _wall_index(covered, interior_squares) -> FaceRef:
    """Minimal interior reference-plane face incident to the projection."""
    candidates = []
    for a, b in interior_squares:
        x, y = 2 * a + 1, 2 * b + 1
        if (x, y) in covered:
            candidates.append((a, b))
            continue
        ring = (
            (x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1),
            (x - 1, y - 1), (x - 1, y + 1), (x + 1, y - 1), (x + 1, y + 1),
        )
        if any(e in covered for e in ring):
            candidates.append((a, b))
    if not candidates:
        raise InconsistentWalls("wall with no incident interior face")
    a, b = min(candidates, key=lambda ab: face_key(l0_face(*ab)))
    return l0_face(a, b)


def _wall_template(faces: frozenset, dims: Box):
    """Heights-independent part of _wall_structure: (index, floor
    squares, per-finite-component adjacent square sets, interior).
    A pure function of the projection closure, so cached on it: the
    same footprint recurs across walls at many different heights."""
    return _wall_template_proj(frozenset(covered_elements(faces)), dims)


@lru_cache(maxsize=1 << 17)
def _wall_template_proj(covered: frozenset, dims: Box):
    comps, inf_idx = complement_components(covered, dims)
    covered_squares = {
        ((x - 1) // 2, (y - 1) // 2) for x, y in covered if _element_kind(x, y) == "square"
    }
    interior_squares = set(covered_squares)
    floor_sqs = None
    ceil_adjs = []
    for i, comp in enumerate(comps):
        squares = {
            ((x - 1) // 2, (y - 1) // 2)
            for x, y in comp
            if _element_kind(x, y) == "square"
        }
        if i == inf_idx:
            floor_sqs = frozenset(_edge_adjacent(squares, covered))
        else:
            interior_squares |= squares
            ceil_adjs.append(frozenset(_edge_adjacent(squares, covered)))
    index = _wall_index(covered, interior_squares)
    return index, floor_sqs, tuple(ceil_adjs), frozenset(interior_squares)


def _wall_structure(faces, dims: Box, heights):
    """Floor height, ceilings and index of one wall, given the terrain
    `heights` of the surrounding face set."""
    index, floor_sqs, ceil_adjs, interior_squares = _wall_template(
        frozenset(faces), dims
    )
    floor_hts = {_single_height(heights, u) for u in floor_sqs}
    if len(floor_hts) != 1:
        raise InconsistentWalls(f"ambiguous floor heights {sorted(floor_hts)}")
    floor_height = floor_hts.pop()
    ceilings = []
    for adj in ceil_adjs:
        hts = {_single_height(heights, u) for u in adj}
        if len(hts) != 1:
            raise InconsistentWalls(
                f"ambiguous ceiling heights {sorted(hts)}"
            )
        ceilings.append((hts.pop(), adj))
    ceilings.sort(key=lambda c: (c[0], sorted(c[1])))
    return index, floor_height, tuple(ceilings), interior_squares


def _edge_adjacent(squares, covered):
    """Squares of the set having a covered boundary edge."""
    out = set()
    for a, b in squares:
        x, y = 2 * a + 1, 2 * b + 1
        if any(e in covered for e in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1))):
            out.add((a, b))
    return out


def _single_height(heights, u):
    hs = heights.get(u)
    if hs is None or len(hs) != 1:
        raise InconsistentWalls(f"column {u} is not a ceiling column")
    return next(iter(hs))


def walls_of(iface: Interface) -> list[Wall]:
    """The *-connected components of the wall faces, annotated with
    floors and ceilings read off the interface terrain."""
    # inline classify: ceiling <=> horizontal and alone over its square
    cnt: dict[tuple[int, int], int] = defaultdict(int)
    for f in iface.faces:
        if f.axis == 3:
            cnt[(f.fx, f.fy)] += 1
    wall_faces = [
        f for f in iface.faces if f.axis != 3 or cnt[(f.fx, f.fy)] > 1
    ]
    if not wall_faces:
        return []
    heights = _terrain_cached(frozenset(iface.faces), iface.dims)
    walls = []
    for comp in _star_components(wall_faces):
        index, floor, ceilings, _ = _wall_structure(comp, iface.dims, heights)
        walls.append(Wall(comp, index, floor, ceilings))
    walls.sort(key=lambda w: face_key(w.index))
    return walls


# -- standardization and the bijection ---------------------------------


def shift_faces(faces, dz_layers: int):
    """Vertical shift of a face set by an integer number of layers."""
    if dz_layers == 0:
        return frozenset(faces)
    dz = 2 * dz_layers
    return frozenset(
        FaceRef(f.axis, f.fx, f.fy, f.fz + dz) for f in faces
    )


@dataclass(frozen=True)
class StandardWall:
    """A wall standardized to floor height 0, keyed by its index."""

    faces: frozenset
    index: FaceRef

    def __len__(self) -> int:
        return len(self.faces)


@lru_cache(maxsize=1 << 17)
def _lone_wall_structure(faces: frozenset, dims: Box):
    """Terrain and structure of a face set standing alone; cached since
    the same wall recurs across many interfaces."""
    one = terrain(faces, dims)
    index, floor, ceilings, interior = _wall_structure(faces, dims, one)
    return one, index, floor, ceilings, interior


def standard_wall(faces, dims: Box) -> StandardWall:
    """Build a standard wall from faces already at floor height 0,
    computing the canonical index."""
    _, index, floor, _, _ = _lone_wall_structure(frozenset(faces), dims)
    if floor != 0:
        raise InconsistentWalls("standard wall must have floor height 0")
    return StandardWall(frozenset(faces), index)


class StandardWallCollection:
    """index face -> StandardWall; admissible (disjoint projections)."""

    def __init__(self, walls):
        self.walls: dict[FaceRef, StandardWall] = {}
        taken: set[tuple[int, int]] = set()
        for w in sorted(walls, key=lambda w: face_key(w.index)):
            cov = _covered_cached(w.faces)
            if cov & taken:
                raise InadmissibleCollection(
                    f"projections overlap at wall indexed {w.index}"
                )
            taken |= cov
            if w.index in self.walls:
                raise InadmissibleCollection(f"duplicate index {w.index}")
            self.walls[w.index] = w

    def __len__(self) -> int:
        return len(self.walls)

    def __iter__(self):
        return iter(self.walls.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, StandardWallCollection) and {
            k: v.faces for k, v in self.walls.items()
        } == {k: v.faces for k, v in other.walls.items()}


def standardize(iface: Interface) -> StandardWallCollection:
    """Shift every wall down by its floor height."""
    out = []
    for w in walls_of(iface):
        faces = shift_faces(w.faces, -w.floor_height)
        out.append(StandardWall(faces, w.index))
    return StandardWallCollection(out)


def wall_structures(coll: StandardWallCollection, dims: Box):
    """Per-wall (wall, terrain, interior squares, ceilings) records for a
    standard collection; the raw material of nesting computations."""
    out = []
    for w in coll:
        one, _, floor, ceilings, interior = _lone_wall_structure(
            w.faces, dims
        )
        if floor != 0:
            raise InadmissibleCollection(f"wall {w.index} is not standard")
        out.append((w, one, interior, ceilings))
    return out


def shift_map(structures, dims: Box, include=None) -> dict:
    """Final vertical shift of every (included) wall along the nesting
    forest: the host of a wall is the wall with the smallest interior
    containing its index square; a wall rides at the height its host's
    terrain assigns over that square, plus the host's own shift."""
    if include is None:
        active = list(range(len(structures)))
    else:
        active = [
            i for i, s in enumerate(structures) if s[0].index in include
        ]
    parent = {}
    shifts = {}
    for i in active:
        w, _, interior_i, _ = structures[i]
        sq = ((w.index.fx - 1) // 2, (w.index.fy - 1) // 2)
        host = None
        for j in active:
            if j == i or sq not in structures[j][2]:
                continue
            if not interior_i <= structures[j][2]:
                raise InadmissibleCollection(
                    "crossing interiors in nesting relation"
                )
            if host is None or len(structures[j][2]) < len(structures[host][2]):
                host = j
        parent[w.index] = None if host is None else structures[host][0].index
        shifts[w.index] = (
            0 if host is None else _single_height(structures[host][1], sq)
        )
    final = dict(shifts)
    changed, guard = True, 0
    while changed:
        changed = False
        guard += 1
        if guard > len(active) + 2:
            raise InadmissibleCollection("cyclic nesting relation")
        for i in active:
            idx = structures[i][0].index
            p = parent[idx]
            if p is not None and final[idx] != shifts[idx] + final[p]:
                final[idx] = shifts[idx] + final[p]
                changed = True
    return final


def reconstruct(coll: StandardWallCollection, dims: Box) -> Interface:
    """The unique interface whose standard wall representation is coll.

    Nested walls ride on the ceilings of their host (see shift_map);
    the ceiling faces are then filled in from the combined terrain.
    """
    walls = list(coll)
    structures = wall_structures(coll, dims)
    final = shift_map(structures, dims)
    x_lo, y_lo, z_lo = 2 * dims.ax0, 2 * dims.ay0, 2 * dims.az0
    x_hi = 2 * (dims.ax0 + dims.nx)
    y_hi = 2 * (dims.ay0 + dims.ny)
    z_hi = 2 * (dims.az0 + dims.nz)
    all_faces = set()
    for w in walls:
        shifted = shift_faces(w.faces, final[w.index])
        for axis, fx, fy, fz in shifted:
            hx = 0 if axis == 1 else 1
            hy = 0 if axis == 2 else 1
            hz = 0 if axis == 3 else 1
            if (
                fx - hx < x_lo or fx + hx > x_hi
                or fy - hy < y_lo or fy + hy > y_hi
                or fz - hz < z_lo or fz + hz > z_hi
            ):
                raise TruncationOverflow(
                    f"wall {w.index} escapes the box after shifting"
                )
        all_faces |= shifted
    try:
        heights = _terrain_cached(frozenset(all_faces), dims)
    except InconsistentWalls as err:
        raise InadmissibleCollection(str(err)) from err
    # squares covered by rho(faces) are exactly the horizontal projections
    covered_squares = {(f.fx, f.fy) for f in all_faces if f.axis == 3}
    for a, b in dims.footprint_squares():
        if (2 * a + 1, 2 * b + 1) in covered_squares:
            continue
        h = _single_height(heights, (a, b))
        f = FaceRef(3, 2 * a + 1, 2 * b + 1, 2 * h)
        if not dims.face_in_box(f):
            raise TruncationOverflow(f"ceiling at {(a, b)} escapes the box")
        all_faces.add(f)
    return Interface(dims, all_faces)


# -- groups and nesting ------------------------------------------------


def close_elements(u, a: int, v, b: int) -> bool:
    """Exact test of |u-v| <= sqrt(a) + sqrt(b) for plane elements in
    doubled coordinates with multiplicities a, b (two squarings, no
    floating point)."""
    dx, dy = u[0] - v[0], u[1] - v[1]
    d2 = dx * dx + dy * dy  # 4 |u-v|^2
    t = d2 - 4 * a - 4 * b
    return t <= 0 or t * t <= 64 * a * b


@dataclass(frozen=True)
class GroupOfWalls:
    members: tuple  # wall index FaceRefs, sorted
    excess: int


def _projection_elements(w: StandardWall):
    """(element, multiplicity) pairs of rho(W): squares and edges with
    their N_rho counts."""
    counts: dict[tuple[int, int], int] = defaultdict(int)
    for f in w.faces:
        counts[(f.fx, f.fy)] += 1
    return list(counts.items())


def walls_close(w1: StandardWall, w2: StandardWall) -> bool:
    e1 = _projection_elements(w1)
    e2 = _projection_elements(w2)
    for u, a in e1:
        for v, b in e2:
            if close_elements(u, a, v, b):
                return True
    return False


def groups(coll: StandardWallCollection) -> list[GroupOfWalls]:
    """Transitive closure of the closeness relation."""
    walls = sorted(coll, key=lambda w: face_key(w.index))
    n = len(walls)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if find(i) != find(j) and walls_close(walls[i], walls[j]):
                parent[find(j)] = find(i)
    by_root = defaultdict(list)
    for i, w in enumerate(walls):
        by_root[find(i)].append(w)
    out = []
    for members in by_root.values():
        idx = tuple(sorted((w.index for w in members), key=face_key))
        exc = sum(wall_excess(Wall(w.faces, w.index, 0, ())) for w in members)
        out.append(GroupOfWalls(idx, exc))
    out.sort(key=lambda g: face_key(g.members[0]))
    return out


def _touches_footprint_boundary(w: StandardWall, dims: Box) -> bool:
    xlo, xhi = 2 * dims.ax0, 2 * (dims.ax0 + dims.nx)
    ylo, yhi = 2 * dims.ay0, 2 * (dims.ay0 + dims.ny)
    for x, y in covered_elements(w.faces):
        if x <= xlo or x >= xhi or y <= ylo or y >= yhi:
            return True
    return False


def nested_sequence(coll: StandardWallCollection, u, dims: Box):
    """Walls to which the square u (layer coords) is interior, innermost
    first, plus the group closure of that set.

    Raises FootprintClipped when any involved wall's projection touches
    the footprint boundary (nesting is an infinite-volume notion).
    """
    if not dims.in_footprint(*u):
        raise ValueError("query square outside the footprint")
    seq = []
    sq = (2 * u[0] + 1, 2 * u[1] + 1)
    for w in coll:
        cov = covered_elements(w.faces)
        comps, inf_idx = complement_components(cov, dims)
        if sq in cov or any(
            sq in comps[i] for i in range(len(comps)) if i != inf_idx
        ):
            seq.append(w)
    seq.sort(key=lambda w: len(covered_elements(w.faces)))
    grps = groups(coll)
    by_index = {w.index: w for w in coll}
    fu: dict[FaceRef, StandardWall] = {}
    for w in seq:
        for g in grps:
            if w.index in g.members:
                for idx in g.members:
                    fu[idx] = by_index[idx]
    for w in list(fu.values()) + seq:
        if _touches_footprint_boundary(w, dims):
            raise FootprintClipped(
                f"wall {w.index} touches the footprint boundary"
            )
    return seq, StandardWallCollection(fu.values()) if fu else StandardWallCollection([])
