import numpy as np
import pytest

from isinglab import ising, rng
from isinglab.interface import (
    InconsistentInterface,
    Interface,
    excess,
    extract,
    extract_fixpoint,
    flat_interface,
    flip_fixpoint,
    reconstruct_spins,
)
from isinglab.lattice import Box, BoxDims, FaceRef, l0_face

from conftest import bubble, column, flat


def test_flat_extracts_reference_plane(flat_cfg):
    iface = extract(flat_cfg)
    assert iface == flat_interface(flat_cfg.dims)
    assert len(iface) == flat_cfg.dims.nx * flat_cfg.dims.ny


def test_bubble_excluded(bubble_cfg):
    assert extract(bubble_cfg) == flat_interface(bubble_cfg.dims)


def test_col2_faces(col2_cfg):
    iface = extract(col2_cfg)
    d = col2_cfg.dims
    want = set(flat_interface(d).faces) - {l0_face(0, 0)}
    for c in range(2):
        z = 2 * c + 1
        want |= {
            FaceRef(1, 0, 1, z),
            FaceRef(1, 2, 1, z),
            FaceRef(2, 1, 0, z),
            FaceRef(2, 1, 2, z),
        }
    want.add(FaceRef(3, 1, 1, 4))  # top face at height 2
    assert set(iface.faces) == want
    assert excess(iface, flat_interface(d)) == 8


def test_flip_fixpoint_bubble(bubble_cfg):
    fixed = flip_fixpoint(bubble_cfg)
    assert fixed == flat(bubble_cfg.dims.n, h_cap=bubble_cfg.dims.h_cap)
    assert flip_fixpoint(fixed) == fixed  # idempotent


def test_extract_equals_fixpoint_extract_random():
    d = BoxDims(2, 2, 3)
    gen = rng.generator(17)
    for _ in range(60):
        spins = gen.choice(np.array([-1, 1], np.int8), size=(d.nx, d.ny, d.nz))
        cfg = ising.SpinConfig(d, spins)
        assert extract(cfg) == extract_fixpoint(cfg)


def test_reconstruct_flat(flat_cfg):
    assert reconstruct_spins(flat_interface(flat_cfg.dims)) == flat_cfg


def test_reconstruct_col2_drops_bubbles(col2_cfg):
    from conftest import put

    dirty = put(col2_cfg, [(2, 2, 3)])  # extra bubble far from the column
    iface = extract(dirty)
    assert reconstruct_spins(iface) == col2_cfg


def test_reconstruct_rejects_dangling_face(flat_cfg):
    iface = flat_interface(flat_cfg.dims)
    bad = Interface(iface.dims, iface.faces + (FaceRef(1, 0, 1, 5),))
    with pytest.raises(InconsistentInterface):
        reconstruct_spins(bad)


def test_reconstruct_rejects_even_column(flat_cfg):
    iface = flat_interface(flat_cfg.dims)
    bad = Interface(iface.dims, iface.faces + (FaceRef(3, 1, 1, 4),))
    with pytest.raises(InconsistentInterface):
        reconstruct_spins(bad)


def test_excess_properties(col2_cfg):
    d = col2_cfg.dims
    i = extract(col2_cfg)
    j = flat_interface(d)
    assert excess(i, i) == 0
    assert excess(i, j) == 8
    assert excess(j, extract(column(h=1))) == -4
    with pytest.raises(ValueError):
        excess(i, flat_interface(BoxDims(2, 2, 3)))


def test_round_trip_sampled():
    d = BoxDims(3, 3, 4)
    p = ising.ChainParams(beta=1.0, sweeps=160, burn_in=120, thin=2, seed=21, dims=d)
    for cfg in ising.run_chain(p):
        iface = extract(cfg)
        back = reconstruct_spins(iface)
        assert extract(back) == iface
        assert excess(iface, flat_interface(d)) >= 0
        if iface == flat_interface(d):
            assert len(iface) == d.nx * d.ny


def test_flat_minimizes_face_count():
    d = Box.general(2, 2, 4)
    flat_faces = len(flat_interface(d))
    for m in range(0, 1 << d.ncells, 97):  # strided sweep of configs
        iface = extract(ising.SpinConfig.from_bitmask(d, m))
        assert len(iface) >= flat_faces
        if len(iface) == flat_faces:
            assert iface == flat_interface(d)
