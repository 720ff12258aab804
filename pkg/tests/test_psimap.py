import pytest

from isinglab import ising
from isinglab.interface import extract, flat_interface
from isinglab.lattice import BoxDims, l0_face
from isinglab.pillars import EmptyPillar, pillar, tame_from_pillar
from isinglab.psimap import (
    NotTame,
    audit_check,
    dist_D,
    psi,
    psi_at_height,
    theta_updown_set,
)
from isinglab.walls import StandardWallCollection, standard_wall

from conftest import column, flat, put

from test_walls import col_wall_faces


def big_plinth_faces(r=3):
    """Vertical perimeter faces of a (2r+1)x(2r+1) one-layer block."""
    from collections import Counter

    from isinglab.lattice import FaceRef

    faces = []
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            x, y = 2 * a + 1, 2 * b + 1
            faces += [
                FaceRef(1, x - 1, y, 1), FaceRef(1, x + 1, y, 1),
                FaceRef(2, x, y - 1, 1), FaceRef(2, x, y + 1, 1),
            ]
    cnt = Counter(faces)
    return frozenset(f for f, c in cnt.items() if c == 1)


def test_col_fixed_point():
    for h in (1, 2, 3, 4, 5, 6):
        iface = extract(column(n=6, h=h, h_cap=8))
        j, audit = psi(iface, l0_face(0, 0), 1)
        assert j == iface
        assert audit.excess_m == 0
        assert audit.j_star == 1 and audit.k_star == 1
        assert audit.deleted_D == frozenset()
        assert audit.Wx_J_size == 0
        ok, report = audit_check(audit, iface, j)
        assert ok, report


def test_col_all_t_fixed_point():
    iface = extract(column(n=6, h=4, h_cap=8))
    for t in (1, 2, 3, 4):
        j, audit = psi(iface, l0_face(0, 0), t)
        assert j == iface
        assert audit.excess_m == 0
        ok, report = audit_check(audit, iface, j)
        assert ok, report
    with pytest.raises(ValueError):
        psi(iface, l0_face(0, 0), 5)


def test_fat_increment_trivialized():
    cfg = put(flat(4, h_cap=6), [(0, 0, 0), (0, 0, 1), (1, 0, 2), (1, 0, 3)])
    iface = extract(cfg)
    j, audit = psi(iface, l0_face(0, 0), 1)
    assert j == extract(column(n=4, h=4, h_cap=6))
    assert audit.excess_m == 2
    assert len(iface) - len(j) == 2
    assert audit.metadata["m_trivialized_first"] == 2
    ok, report = audit_check(audit, iface, j)
    assert ok, report


def test_not_tame_rejected():
    cells = [(a, b, 0) for a in range(0, 5) for b in range(-2, 3)]
    cfg = put(flat(4), cells + [(4, 0, 1)])
    iface = extract(cfg)
    with pytest.raises(NotTame):
        psi(iface, l0_face(4, 0), 1)


def test_empty_pillar_rejected(flat_cfg):
    with pytest.raises(EmptyPillar):
        psi(extract(flat_cfg), l0_face(0, 0), 1)


def test_tampered_audit_rejected():
    iface = extract(column(n=6, h=3, h_cap=8))
    j, audit = psi(iface, l0_face(0, 0), 1)
    audit.excess_m += 1
    ok, report = audit_check(audit, iface, j)
    assert not ok
    assert any(v[0] == "m(I;J)" for v in report)


def test_theta_updown_single_wall():
    d = BoxDims(6, 6, 4)
    w = standard_wall(col_wall_faces((0, 0), 1), d)
    coll = StandardWallCollection([w])
    (cand,) = theta_updown_set(coll, w.index, d)
    assert w.faces < cand  # the wall plus its ceiling face
    with pytest.raises(ValueError):
        theta_updown_set(coll, l0_face(3, 3), d)


def test_theta_updown_nested_two_candidates():
    d = BoxDims(4, 4, 4)
    plinth = standard_wall(big_plinth_faces(3), d)
    col = standard_wall(col_wall_faces((0, 0), 1), d)
    coll = StandardWallCollection([plinth, col])
    cands = theta_updown_set(coll, col.index, d)
    assert len(cands) == 2
    tops = sorted(
        max(f.fz for f in cand if f.axis == 3) for cand in cands
    )
    assert tops == [2, 4]  # ceiling at height 1 and, riding the plinth, 2


def test_dist_examples():
    # wall one cell away from the pillar: distance 1, m(W) = 4, (A2) fires
    cfg = put(flat(8, h_cap=6), [(0, 0, 0), (0, 0, 1), (2, 0, 0)])
    iface = extract(cfg)
    d2 = dist_D(iface, l0_face(0, 0), l0_face(2, 0), 1, (0, 0, 0), (0, 0, 0))
    assert d2 == 4  # doubled units: true distance 1
    assert d2 <= 4 * 4 * 4
    _, audit = psi(iface, l0_face(0, 0), 1)
    assert l0_face(2, 0) in audit.marked_Y
    assert l0_face(2, 0) in audit.deleted_D
    # the same wall far away triggers nothing at j = 2
    cfg = put(flat(8, h_cap=6), [(0, 0, 0), (0, 0, 1), (6, 0, 0)])
    iface = extract(cfg)
    d2 = dist_D(iface, l0_face(0, 0), l0_face(6, 0), 2, (0, 0, 0), (0, 0, 0))
    assert d2 > 4 * 4 * 4 and d2 > (2 - 1) ** 2
    _, audit = psi(iface, l0_face(0, 0), 1)
    assert l0_face(6, 0) not in audit.deleted_D


def test_psi_at_height_col():
    iface = extract(column(n=6, h=3, h_cap=8))
    j, audit = psi_at_height(iface, l0_face(0, 0), 1.5)
    assert j == iface and audit.metadata["tau_ell"] == 1
    # above the pillar top the "or 1" clause applies
    j, audit = psi_at_height(iface, l0_face(0, 0), 6.5)
    assert j == iface and audit.metadata["tau_ell"] == 1
    with pytest.raises(ValueError):
        psi_at_height(iface, l0_face(0, 0), 2)


def test_psi_at_height_fat_increment():
    cfg = put(flat(4, h_cap=6), [(0, 0, 0), (0, 0, 1), (1, 0, 2), (1, 0, 3)])
    iface = extract(cfg)
    j, audit = psi_at_height(iface, l0_face(0, 0), 2.5)
    assert audit.metadata["tau_ell"] == 2
    assert j == extract(column(n=4, h=4, h_cap=6))
    lhs, slab_faces, holds = audit.metadata["height_guarantee"]
    assert holds
    assert lhs == slab_faces - 4  # bound met with equality here
    ok, report = audit_check(audit, iface, j)
    assert ok, report


def test_no_cut_point_pillar():
    cfg = put(flat(6, h_cap=6), [(0, 0, 0), (1, 0, 0)])
    iface = extract(cfg)
    j, audit = psi(iface, l0_face(0, 0), 1)
    assert audit.Wx_J_size == 4  # planted column of the full height 1
    assert j == extract(column(n=6, h=1, h_cap=6))
    assert audit.excess_m == len(iface) - len(j)
    ok, report = audit_check(audit, iface, j)
    assert ok, report
    with pytest.raises(ValueError):
        psi(iface, l0_face(0, 0), 2)


def test_sampled_well_definedness():
    d = BoxDims(6, 6, 6)
    p = ising.ChainParams(
        beta=1.0, sweeps=600, burn_in=200, thin=4, seed=7, dims=d
    )
    o = l0_face(0, 0)
    checked = 0
    for cfg in ising.run_chain(p):
        iface = extract(cfg)
        pil = pillar(iface, o)
        if not pil or not tame_from_pillar(pil, d):
            continue
        from isinglab.pillars import decompose

        n_t = len(decompose(pil).cut_points) or 1
        for t in range(1, n_t + 1):
            j, audit = psi(iface, o, t)
            assert len(iface) - len(j) == audit.excess_m
            assert pillar(j, o).height == pil.height
            ok, report = audit_check(audit, iface, j)
            assert ok, report
            checked += 1
    assert checked > 0
