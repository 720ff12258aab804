"""Shared fixture configurations used throughout the suite.

All builders start from the flat ground state of a centered box and
plant plus cells above the reference plane (or carve minus cells below
it); layer coordinates as in isinglab.lattice.
"""

import numpy as np
import pytest

from isinglab.ising import SpinConfig
from isinglab.lattice import BoxDims


def put(cfg: SpinConfig, cells, value=1) -> SpinConfig:
    out = cfg.copy()
    d = out.dims
    for a, b, c in cells:
        out.spins[a - d.ax0, b - d.ay0, c - d.az0] = value
    return out


def flat(n=3, m=None, h_cap=4) -> SpinConfig:
    return SpinConfig.flat(BoxDims(n, n if m is None else m, h_cap))


def column(n=3, h=2, at=(0, 0), h_cap=4) -> SpinConfig:
    """COL(h): h stacked plus cells above the square `at`."""
    a, b = at
    return put(flat(n, h_cap=h_cap), [(a, b, c) for c in range(h)])


def bubble(n=3, h_cap=4) -> SpinConfig:
    """FLAT plus one isolated plus cell at height 5/2."""
    return put(flat(n, h_cap=h_cap), [(0, 0, 2)])


@pytest.fixture
def flat_cfg():
    return flat()


@pytest.fixture
def col2_cfg():
    return column(h=2)


@pytest.fixture
def bubble_cfg():
    return bubble()
