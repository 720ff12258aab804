"""The increment-trivializing map on tame interfaces, with a full audit.

Given a tame interface I, a reference-plane face x with a nonempty
pillar, and an increment index t, the map rebuilds the interface so
that the pillar's increments below a first level j* (and, when the
schedule calls for it, between t and a second level k*) become bare
column segments, walls marked as too close to the action are deleted,
and a standard column wall is planted under the relocated spine.  The
pillar height is preserved by construction.  Every face of |I| - |J|
is accounted for: the audit records which structures paid for it and
audit_check re-verifies the ledger after the fact.

Conventions.  All distances are kept exact: face midpoints live in
doubled coordinates (a FaceRef is its own midpoint), so the squared
distance D2 between two midpoints equals 4 d^2 for the true Euclidean
distance d.  A threshold d <= m therefore reads D2 <= 4 m^2, and
d <= (j-1)/2 reads D2 <= (j-1)^2, both in integers.  Pillars with no
cut-point at all are handled by planting a column of the full pillar
height and appending no spine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .interface import (
    Interface,
    disagreement_faces,
    extract,
    reconstruct_spins,
)
from .lattice import Box, FaceRef, face_key, l0_face
from .pillars import (
    EmptyPillar,
    cell_set_faces,
    decompose,
    increment_excess,
    increment_faces,
    pillar_from_config,
    remainder_excess,
    tame_from_pillar,
)
from .walls import (
    InadmissibleCollection,
    StandardWall,
    StandardWallCollection,
    groups,
    reconstruct,
    shift_faces,
    shift_map,
    standardize,
    wall_excess,
    wall_structures,
)


class NotTame(ValueError):
    """The input interface fails the tameness test at x."""

    def __init__(self, msg="not-tame"):
        super().__init__(msg)


class SpinePlacementCollision(RuntimeError):
    """The rebuilt spine would overlap existing structure; this is an
    implementation bug, never repaired silently."""


@dataclass
class MapAudit:
    x: FaceRef
    t: int
    marked_Y: frozenset  # marked index faces Y
    deleted_D: frozenset  # deleted wall indices D
    shift_schedule: tuple  # s_1 .. s_{T+2}
    j_star: int
    k_star: int
    y_star_A: FaceRef | None
    y_star_B: FaceRef | None
    y_dagger: FaceRef | None
    h_dagger: float | None  # half-integer cut-height, when one exists
    Wx_J_size: int  # |W_x^J|, faces of the planted column wall
    excess_m: int  # m(I;J) = |I| - |J|
    trigger_log: tuple  # one record per loop step
    metadata: dict = field(default_factory=dict)


def _square_of(idx: FaceRef) -> tuple[int, int]:
    return ((idx.fx - 1) // 2, (idx.fy - 1) // 2)


def _translate(faces, da: int, db: int):
    return frozenset(
        FaceRef(f.axis, f.fx + 2 * da, f.fy + 2 * db, f.fz) for f in faces
    )


def _min_d2(a, b) -> int:
    """Minimal squared midpoint distance between two face sets, in
    doubled coordinates (4 times the true squared distance)."""
    aa = np.array([(f.fx, f.fy, f.fz) for f in a], np.int64)
    bb = np.array([(f.fx, f.fy, f.fz) for f in b], np.int64)
    diff = aa[:, None, :] - bb[None, :, :]
    return int((diff * diff).sum(axis=2).min())


def _column_wall_faces(a: int, b: int, height: int):
    """The 4*height vertical faces of a bare column wall over (a, b)."""
    x, y = 2 * a + 1, 2 * b + 1
    out = set()
    for c in range(height):
        z = 2 * c + 1
        out |= {
            FaceRef(1, x - 1, y, z),
            FaceRef(1, x + 1, y, z),
            FaceRef(2, x, y - 1, z),
            FaceRef(2, x, y + 1, z),
        }
    return frozenset(out)


class _Ctx:
    """Everything psi needs about one (I, x) pair, computed once."""

    def __init__(self, iface: Interface, x: FaceRef):
        self.iface = iface
        self.dims = d = iface.dims
        self.x = x
        self.xa, self.xb = _square_of(x)
        self.sigma = reconstruct_spins(iface)
        p = pillar_from_config(self.sigma, x)
        if not p:
            raise EmptyPillar("the pillar of x is empty")
        if not tame_from_pillar(p, d):
            raise NotTame()
        self.p = p
        self.dec = dec = decompose(p)
        self.cuts = dec.cut_points
        # T increments X_1..X_T plus the remainder as X_{T+1}
        self.T = len(self.cuts) - 1 if self.cuts else 0
        self.c: dict[int, int] = {}
        if self.cuts:
            for j, v in enumerate(self.cuts):
                self.c[j + 1] = v[2]
            self.c[self.T + 2] = p.height - 1
            self.L1 = self.cuts[0][2]
        else:
            self.L1 = p.height
        self.X: dict[int, tuple] = {}  # j -> (cells, faces, excess)
        for j in range(1, self.T + 1):
            lo, hi = self.cuts[j - 1], self.cuts[j]
            cells = dec.increments[j - 1]
            self.X[j] = (
                cells,
                frozenset(increment_faces(cells, lo, hi)),
                increment_excess(cells, lo, hi),
            )
        if self.cuts:
            v = self.cuts[-1]
            faces = cell_set_faces(dec.remainder)
            faces.discard(FaceRef(3, 2 * v[0] + 1, 2 * v[1] + 1, 2 * v[2]))
            self.X[self.T + 1] = (
                dec.remainder,
                frozenset(faces),
                remainder_excess(p, dec),
            )
        # the spine is stripped and the plane closed back underneath it
        sig2 = self.sigma.copy()
        for a, b, c in dec.spine:
            sig2.spins[a - d.ax0, b - d.ay0, c - d.az0] = -1
        self.i2 = extract(sig2)
        # a base cell attached to the pillar only through the spine is
        # left floating by the strip; its bubble faces leave the
        # interface and are booked as an extra energy gain
        self.orphan_correction = (
            len(set(disagreement_faces(sig2))) - len(self.i2.faces)
        )
        self.coll = standardize(self.i2)
        self.structs = wall_structures(self.coll, d)
        self.by_index = {s[0].index: s for s in self.structs}
        self.indices = sorted(self.by_index, key=face_key)
        self.full_shift = shift_map(self.structs, d)
        self.m_wall = {
            i: wall_excess(self.by_index[i][0]) for i in self.indices
        }
        self.group_of = {}
        for g in groups(self.coll):
            for i in g.members:
                self.group_of[i] = g.members
        # case (ii) closure: the cell directly below v_1 is minus (a base
        # cell gap, or a sub-plane hole when v_1 sits at layer 0), so the
        # interface keeps v_1's bottom face and stripping the spine
        # re-closes with two extra faces there
        self.bottom_closure_correction = 0
        if self.cuts:
            v1 = self.cuts[0]
            if (
                v1[2] - 1 >= d.az0
                and self.sigma.spin(v1[0], v1[1], v1[2] - 1) == -1
            ):
                self.bottom_closure_correction = 2
        self._ftilde: dict[tuple, frozenset] = {}
        self._theta: dict[FaceRef, tuple] = {}
        self._subcells: dict[tuple, list] = {}

    # -- nesting and candidate sets -------------------------------------

    def f_tilde(self, sq) -> frozenset:
        """Indices of the walls nesting the square sq, closed under
        groups: the deletion unit of a marked index."""
        if sq not in self._ftilde:
            sel = {i for i in self.indices if sq in self.by_index[i][2]}
            clos = set(sel)
            for i in sel:
                clos.update(self.group_of.get(i, ()))
            self._ftilde[sq] = frozenset(clos)
        return self._ftilde[sq]

    def theta_updown(self, y: FaceRef):
        """Candidate placements of wall y with its ceilings: its position
        in the full reconstruction and in every single-group deletion."""
        if y not in self._theta:
            if y not in self.by_index:
                raise ValueError(f"unknown wall index {y}")
            w, _, _, ceilings = self.by_index[y]
            shifts = {self.full_shift[y]}
            sq_y = _square_of(y)
            nested = any(
                sq_y in self.by_index[i][2] for i in self.indices if i != y
            )
            if nested:
                for yp in self.indices:
                    dele = self.f_tilde(_square_of(yp))
                    if not dele or y in dele:
                        continue
                    keep = [i for i in self.indices if i not in dele]
                    shifts.add(
                        shift_map(self.structs, self.dims, include=keep)[y]
                    )
            cands = []
            for s in sorted(shifts):
                faces = set(shift_faces(w.faces, s))
                for h, squares in ceilings:
                    for a, b in squares:
                        faces.add(
                            FaceRef(3, 2 * a + 1, 2 * b + 1, 2 * (h + s))
                        )
                cands.append(frozenset(faces))
            self._theta[y] = tuple(cands)
        return self._theta[y]

    def trivial_faces(self, j: int) -> frozenset:
        """Faces of the trivialized increment: a bare column over rho(v_j)
        spanning the same layers as X_j."""
        va, vb = self.cuts[j - 1][:2]
        lo, hi = self.c[j], self.c[j + 1]
        cells = {(va, vb, c) for c in range(lo, hi + 1)}
        return frozenset(increment_faces(cells, (va, vb, lo), (va, vb, hi)))

    def dist2(self, y: FaceRef, j: int, omega1, omega2) -> int:
        """Squared doubled distance from the candidate set of y to X_j,
        its translate by rho(x + omega1), and the translate of the
        trivialized X_j by rho(x + omega1 + omega2)."""
        base = self.X[j][1]
        da = self.xa + omega1[0]
        db = self.xb + omega1[1]
        target = set(base)
        target |= _translate(base, da, db)
        target |= _translate(self.trivial_faces(j), da + omega2[0], db + omega2[1])
        return min(_min_d2(c, target) for c in self.theta_updown(y))

    # -- slab counts for the cut-height step -----------------------------

    def wall_faces_at(self, idx: FaceRef):
        """Faces of wall idx at its reconstructed position."""
        return shift_faces(self.by_index[idx][0].faces, self.full_shift[idx])

    def sub_cells(self, indices) -> list:
        """Plus cells per layer 0, 1, ... of the interface generated by
        the given standard walls alone.  A column is plus at layer l iff
        it holds an odd number of horizontal faces strictly above the
        layer; a layer count of 1 marks a cut-height l + 1/2."""
        key = tuple(sorted(indices, key=face_key))
        if key not in self._subcells:
            coll = StandardWallCollection([self.by_index[i][0] for i in key])
            sub = reconstruct(coll, self.dims)
            cols: dict[tuple, list] = {}
            for f in sub.faces:
                if f.axis == 3 and f.fz > 0:
                    cols.setdefault((f.fx, f.fy), []).append(f.fz)
            top = max((max(v) for v in cols.values()), default=0) // 2
            counts = [0] * top
            for zs in cols.values():
                for l in range(top):
                    if sum(1 for z in zs if z >= 2 * (l + 1)) % 2 == 1:
                        counts[l] += 1
            self._subcells[key] = counts
        return self._subcells[key]

    def nested_at(self, sq) -> list:
        """Wall indices nesting sq, without group closure."""
        return [i for i in self.indices if sq in self.by_index[i][2]]


def theta_updown_set(
    coll: StandardWallCollection, y: FaceRef, dims: Box
) -> set:
    """Candidate wall-with-ceilings placements of y: the wall as
    reconstructed from the full collection and from each single-group
    deletion, as face frozensets."""
    structs = wall_structures(coll, dims)
    by_index = {s[0].index: s for s in structs}
    if y not in by_index:
        raise ValueError(f"unknown wall index {y}")
    indices = sorted(by_index, key=face_key)
    group_of = {}
    for g in groups(coll):
        for i in g.members:
            group_of[i] = g.members
    full = shift_map(structs, dims)
    shifts = {full[y]}
    for yp in indices:
        sq = _square_of(yp)
        dele = {i for i in indices if sq in by_index[i][2]}
        for i in list(dele):
            dele.update(group_of.get(i, ()))
        if not dele or y in dele:
            continue
        keep = [i for i in indices if i not in dele]
        shifts.add(shift_map(structs, dims, include=keep)[y])
    out = set()
    w, _, _, ceilings = by_index[y]
    for s in shifts:
        faces = set(shift_faces(w.faces, s))
        for h, squares in ceilings:
            for a, b in squares:
                faces.add(FaceRef(3, 2 * a + 1, 2 * b + 1, 2 * (h + s)))
        out.add(frozenset(faces))
    return out


def dist_D(iface: Interface, x: FaceRef, y: FaceRef, j: int, omega1, omega2) -> int:
    """Squared distance (doubled units: 4 d^2) between the candidate set
    of wall y and the stated translates of increment j; exact integers
    throughout, so threshold comparisons never touch floats."""
    ctx = _Ctx(iface, x)
    if j not in ctx.X:
        raise ValueError(f"no increment with index {j}")
    return ctx.dist2(y, j, tuple(omega1), tuple(omega2))


# -- the map -------------------------------------------------------------


def psi(iface: Interface, x: FaceRef, t: int):
    """Algorithmic rebuild of a tame interface around the pillar of x;
    returns (J, audit) with |I| - |J| = audit.excess_m."""
    return _run(_Ctx(iface, x), t)


def psi_at_height(iface: Interface, x: FaceRef, ell):
    """Variant indexed by a half-integer height: delegates to psi with
    t = tau_ell, the first increment meeting the slab at height ell
    (or 1 when none does)."""
    ld = int(round(2 * ell))
    if ld < 1 or ld % 2 == 0:
        raise ValueError("ell must be a positive half-integer")
    layer = (ld - 1) // 2
    ctx = _Ctx(iface, x)
    tau = 1
    if ctx.cuts:
        for j in range(1, ctx.T + 2):
            if ctx.c[j] <= layer <= ctx.c[j + 1]:
                tau = j
                break
    j_iface, audit = _run(ctx, tau)
    slab_cells = {cell for cell in ctx.p.cells if cell[2] == layer}
    slab_faces = len(cell_set_faces(slab_cells)) if slab_cells else 0
    audit.metadata["tau_ell"] = tau
    audit.metadata["ell"] = ld / 2
    audit.metadata["height_guarantee"] = (
        audit.excess_m,
        slab_faces,
        audit.excess_m >= slab_faces - 4,
    )
    return j_iface, audit


def _run(ctx: _Ctx, t: int):
    d = ctx.dims
    t_max = ctx.T + 1 if ctx.cuts else 1
    if not 1 <= t <= t_max:
        raise ValueError(f"t must lie in 1..{t_max}")

    marked: set[tuple[int, int]] = set()
    trigger_log = []

    # step 2: mark [x] and rho(v_1)
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            sq = (ctx.xa + da, ctx.xb + db)
            if d.in_footprint(*sq):
                marked.add(sq)
    if ctx.cuts:
        marked.add(ctx.cuts[0][:2])

    # step 3: highest cut-height of the interface generated by the walls
    # nested at rho(v_1) alone (a layer holding exactly one of its cells)
    y_dagger = None
    h_dagger = None
    if ctx.cuts:
        v1 = ctx.cuts[0]
        w_v1 = ctx.nested_at(v1[:2])
        counts = ctx.sub_cells(w_v1)
        cut_layers = [l for l in range(len(counts)) if counts[l] == 1]
        if cut_layers:
            ld = max(cut_layers)
            h_dagger = ld + 0.5
            o_faces = set()
            for i in w_v1:
                o_faces |= ctx.wall_faces_at(i)
            z = 2 * ld + 1
            cand_faces = {
                f
                for f in ctx.p.faces
                if f.axis != 3 and f.fz == z and f not in o_faces
            }
            cands = [
                i
                for i in ctx.indices
                if i not in w_v1 and ctx.wall_faces_at(i) & cand_faces
            ]
            if cands:
                y_dagger = min(cands, key=face_key)
                marked.add(_square_of(y_dagger))

    # step 4: first pass over the increments (criteria A1-A3)
    sched = [0]
    y_star_A = None
    if ctx.cuts:
        for j in range(1, ctx.T + 2):
            s = sched[-1]
            entry = {"phase": "A", "index": j, "fired": []}
            if ctx.X[j][2] >= j - 1:
                entry["fired"].append(("A1", None, None))
            omega1 = tuple(-u for u in ctx.cuts[s])
            a3 = []
            for y in ctx.indices:
                d2 = ctx.dist2(y, j, omega1, (0, 0, 0))
                m_y = ctx.m_wall[y]
                if d2 <= 4 * m_y * m_y:
                    marked.add(_square_of(y))
                    entry["fired"].append(("A2", y, d2))
                if d2 <= (j - 1) ** 2:
                    a3.append((face_key(y), y, d2))
            if a3:
                _, y_star_A, d2 = min(a3)
                marked.add(_square_of(y_star_A))
                entry["fired"].append(("A3", y_star_A, d2))
            sched.append(j if entry["fired"] else s)
            trigger_log.append(entry)
    else:
        sched.append(0)
    j_star = sched[-1]

    # step 5: second pass from t, when t lies above j*
    y_star_B = None
    k_star = j_star
    if ctx.cuts and t > j_star:
        omega2 = tuple(
            u - v for u, v in zip(ctx.cuts[t - 1], ctx.cuts[j_star])
        )
        bs = [t - 1]
        for k in range(t, ctx.T + 2):
            s = bs[-1]
            entry = {"phase": "B", "index": k, "fired": []}
            if ctx.X[k][2] >= k - t:
                entry["fired"].append(("B1", None, None))
            omega1 = tuple(-u for u in ctx.cuts[s])
            b3 = []
            for y in ctx.indices:
                d2 = ctx.dist2(y, k, omega1, omega2)
                m_y = ctx.m_wall[y]
                if d2 <= 4 * m_y * m_y:
                    marked.add(_square_of(y))
                    entry["fired"].append(("B2", y, d2))
                if d2 <= (k - t) ** 2:
                    b3.append((face_key(y), y, d2))
            if b3:
                _, y_star_B, d2 = min(b3)
                marked.add(_square_of(y_star_B))
                entry["fired"].append(("B3", y_star_B, d2))
            bs.append(k if entry["fired"] else s)
            trigger_log.append(entry)
        k_star = bs[-1]
        sched = sched[: t - 1] + bs

    # step 6: delete the group-closed nested sequences of marked indices
    del_idx = set()
    for sq in marked:
        del_idx |= ctx.f_tilde(sq)
    remaining = [
        ctx.by_index[i][0] for i in ctx.indices if i not in del_idx
    ]

    # step 7: plant the column wall under the relocated spine
    wx_size = 4 * ctx.L1
    if ctx.L1 > 0:
        remaining.append(
            StandardWall(
                _column_wall_faces(ctx.xa, ctx.xb, ctx.L1),
                l0_face(ctx.xa, ctx.xb),
            )
        )

    # step 8: reconstruct the wall-level interface
    try:
        k_coll = StandardWallCollection(remaining)
    except InadmissibleCollection as err:
        raise SpinePlacementCollision(str(err)) from err
    k_iface = reconstruct(k_coll, d)
    sig_k = reconstruct_spins(k_iface)

    # step 9: assemble the new spine cells, heights preserved
    spine = set()
    if ctx.cuts:
        for c in range(ctx.L1, ctx.c[j_star + 1] + 1):
            spine.add((ctx.xa, ctx.xb, c))
        if t > j_star:
            disp = (
                ctx.cuts[t - 1][0] - ctx.cuts[j_star][0],
                ctx.cuts[t - 1][1] - ctx.cuts[j_star][1],
            )
        else:
            disp = (0, 0)
        for j in range(j_star + 1, t):
            da = ctx.xa - ctx.cuts[j_star][0]
            db = ctx.xb - ctx.cuts[j_star][1]
            for a, b, c in ctx.X[j][0]:
                spine.add((a + da, b + db, c))
        if t > j_star:
            for c in range(ctx.c[t], ctx.c[k_star + 1] + 1):
                spine.add((ctx.xa + disp[0], ctx.xb + disp[1], c))
        for j in range(k_star + 1, ctx.T + 2):
            da = ctx.xa - ctx.cuts[k_star][0] + disp[0]
            db = ctx.xb - ctx.cuts[k_star][1] + disp[1]
            for a, b, c in ctx.X[j][0]:
                spine.add((a + da, b + db, c))

    # step 10: append the spine and extract
    top_layer = d.az0 + d.nz - 1
    for a, b, c in spine:
        if not d.in_footprint(a, b) or not 0 <= c <= top_layer:
            raise SpinePlacementCollision(
                f"spine cell {(a, b, c)} escapes the box"
            )
        if sig_k.spin(a, b, c) == 1:
            raise SpinePlacementCollision(
                f"spine cell {(a, b, c)} already occupied"
            )
    sig_j = sig_k.copy()
    for a, b, c in spine:
        sig_j.spins[a - d.ax0, b - d.ay0, c - d.az0] = 1
    j_iface = extract(sig_j)
    p_j = pillar_from_config(sig_j, ctx.x)
    if p_j.height != ctx.p.height:
        raise SpinePlacementCollision(
            f"pillar height changed: {ctx.p.height} -> {p_j.height}"
        )

    excess_m = len(ctx.iface) - len(j_iface)
    m_deleted = sum(ctx.m_wall[i] for i in del_idx)
    m_first = sum(ctx.X[j][2] for j in range(1, j_star + 1)) if ctx.cuts else 0
    m_second = (
        sum(ctx.X[k][2] for k in range(t, k_star + 1))
        if ctx.cuts and t > j_star
        else 0
    )
    dec_j = decompose(p_j)
    audit = MapAudit(
        x=ctx.x,
        t=t,
        marked_Y=frozenset(l0_face(a, b) for a, b in marked),
        deleted_D=frozenset(del_idx),
        shift_schedule=tuple(sched),
        j_star=j_star,
        k_star=k_star,
        y_star_A=y_star_A,
        y_star_B=y_star_B,
        y_dagger=y_dagger,
        h_dagger=h_dagger,
        Wx_J_size=wx_size,
        excess_m=excess_m,
        trigger_log=tuple(trigger_log),
        metadata={
            "second_pass_distance_index": "k",
            "bottom_closure_correction": ctx.bottom_closure_correction,
            "m_orphaned": ctx.orphan_correction,
            "m_deleted": m_deleted,
            "m_trivialized_first": m_first,
            "m_trivialized_second": m_second,
            "n_increments_in": ctx.dec.n_increments,
            "n_increments_out": dec_j.n_increments,
        },
    )
    return j_iface, audit


# -- the audit ------------------------------------------------------------


def audit_check(audit: MapAudit, iface: Interface, j_iface: Interface):
    """Re-derives every audited quantity from (I, J) and cross-checks the
    invariants; violations are returned as data, never raised."""
    report = []
    m_true = len(iface) - len(j_iface)
    if audit.excess_m != m_true:
        report.append(("m(I;J)", audit.excess_m, m_true))
    ctx = _Ctx(iface, audit.x)

    unknown = [y for y in audit.deleted_D if y not in ctx.m_wall]
    if unknown:
        report.append(("unknown deleted indices", sorted(unknown, key=face_key)))
    m_del = sum(ctx.m_wall[y] for y in audit.deleted_D if y in ctx.m_wall)
    m_first = (
        sum(ctx.X[j][2] for j in range(1, audit.j_star + 1)) if ctx.cuts else 0
    )
    m_second = (
        sum(ctx.X[k][2] for k in range(audit.t, audit.k_star + 1))
        if ctx.cuts and audit.t > audit.j_star
        else 0
    )
    predicted = (
        m_del
        + m_first
        + m_second
        - audit.Wx_J_size
        + ctx.bottom_closure_correction
        + ctx.orphan_correction
    )
    if predicted != m_true:
        report.append(("energy identity", predicted, m_true))

    if audit.Wx_J_size > 2 * m_true:
        report.append(("|Wx| <= 2m", audit.Wx_J_size, m_true))
    if m_del > 3 * m_true:
        report.append(("m(W) <= 3m", m_del, m_true))
    if audit.j_star - 1 > 6 * m_true:
        report.append(("j*-1 <= 6m", audit.j_star, m_true))
    if audit.k_star - audit.t > 6 * m_true:
        report.append(("k*-t <= 6m", audit.k_star, audit.t, m_true))

    # the schedule may only move to the current index, and only on a fire
    expected = _replay_schedule(audit, ctx)
    if expected != audit.shift_schedule:
        report.append(("shift schedule", audit.shift_schedule, expected))
    if ctx.cuts and not audit.shift_schedule:
        report.append(("missing schedule",))

    # for each distance-triggered criterion: index gap <= distance plus
    # the excess of the nested sequence of the violating wall
    for entry in audit.trigger_log:
        gap = (
            entry["index"] - 1
            if entry["phase"] == "A"
            else entry["index"] - audit.t
        )
        for name, y, d2 in entry["fired"]:
            if y is None:
                continue
            m_f = sum(
                ctx.m_wall[i] for i in ctx.f_tilde(_square_of(y))
            )
            if gap > m_f and 4 * (gap - m_f) ** 2 > d2:
                report.append(("index gap bound", name, entry["index"], y))

    # when a cut-height witness exists, the interface generated by the
    # nested walls of v_1 together with those of y-dagger holds at least
    # two cells (six faces) in every slab strictly below v_1
    if audit.y_dagger is not None and ctx.cuts:
        idxs = set(ctx.nested_at(ctx.cuts[0][:2]))
        idxs |= set(ctx.nested_at(_square_of(audit.y_dagger)))
        counts = ctx.sub_cells(idxs)[: ctx.L1]
        if len(counts) < ctx.L1 or any(c < 2 for c in counts):
            report.append(("slab coverage", counts))

    return (not report, report)


def _replay_schedule(audit: MapAudit, ctx: _Ctx):
    if not ctx.cuts:
        return (0, 0)
    sched = [0]
    for entry in audit.trigger_log:
        if entry["phase"] != "A":
            continue
        sched.append(entry["index"] if entry["fired"] else sched[-1])
    b_entries = [e for e in audit.trigger_log if e["phase"] == "B"]
    if b_entries:
        bs = [audit.t - 1]
        for entry in b_entries:
            bs.append(entry["index"] if entry["fired"] else bs[-1])
        sched = sched[: audit.t - 1] + bs
    return tuple(sched)
