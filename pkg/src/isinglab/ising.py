"""Ising configurations under Dobrushin boundary conditions.

The energy of a configuration is the number of disagreeing
nearest-neighbor cell pairs, counting pairs where one cell lies outside
the box and carries the frozen Dobrushin spin (-1 above the reference
plane, +1 below).  The Boltzmann weight is e^{-beta * energy}; the
heat-bath conditional for a single cell with neighbor-spin sum s is then
p(+1) = 1 / (1 + e^{-beta s}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels, rng as _rng
from .lattice import Box

SWEEP_BLOCK = 64  # sweeps per pregenerated uniform block; fixed, part of
# the determinism contract


@dataclass(frozen=True)
class ChainParams:
    beta: float
    sweeps: int
    burn_in: int
    thin: int
    seed: int
    dims: Box

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if not (0 <= self.burn_in < self.sweeps):
            raise ValueError("need 0 <= burn_in < sweeps")


def default_burn_in(n: int) -> int:
    """Relaxation allowance at low temperature."""
    return 20 * (2 * n + 1)


class SpinConfig:
    """Spins over a box, one int8 per cell, shape (nx, ny, nz) in layer
    order; index (i, j, k) is cell layer (ax0+i, ay0+j, az0+k)."""

    def __init__(self, dims: Box, spins: np.ndarray):
        spins = np.asarray(spins, np.int8)
        if spins.shape != (dims.nx, dims.ny, dims.nz):
            raise ValueError("spin array shape does not match box")
        if not np.all(np.abs(spins) == 1):
            raise ValueError("spins must be +1/-1")
        self.dims = dims
        self.spins = spins

    # -- constructors --------------------------------------------------

    @classmethod
    def flat(cls, dims: Box) -> "SpinConfig":
        """Ground state: +1 strictly below the reference plane."""
        layers = np.arange(dims.az0, dims.az0 + dims.nz)
        spins = np.where(layers < 0, 1, -1).astype(np.int8)
        return cls(dims, np.broadcast_to(spins, (dims.nx, dims.ny, dims.nz)).copy())

    @classmethod
    def from_bitmask(cls, dims: Box, mask: int) -> "SpinConfig":
        """Bit i of mask (canonical cell order) set means spin +1."""
        n = dims.ncells
        bits = (mask >> np.arange(n, dtype=np.uint64)) & 1
        spins = (2 * bits.astype(np.int8) - 1).reshape(dims.nx, dims.ny, dims.nz)
        return cls(dims, spins)

    def to_bitmask(self) -> int:
        bits = (self.spins.reshape(-1) == 1).astype(np.uint8)
        return int(sum(int(b) << i for i, b in enumerate(bits)))

    # -- access --------------------------------------------------------

    def spin(self, a: int, b: int, c: int) -> int:
        """Spin of any cell of Z^3; the Dobrushin rule applies outside."""
        if self.dims.contains(a, b, c):
            return int(
                self.spins[a - self.dims.ax0, b - self.dims.ay0, c - self.dims.az0]
            )
        return Box.boundary_spin(c)

    def padded(self) -> np.ndarray:
        """Spins with a one-cell Dobrushin halo on all sides."""
        d = self.dims
        pad = np.empty((d.nx + 2, d.ny + 2, d.nz + 2), np.int8)
        layers = np.arange(d.az0 - 1, d.az0 + d.nz + 1)
        pad[:, :, :] = np.where(layers < 0, 1, -1).astype(np.int8)
        pad[1:-1, 1:-1, 1:-1] = self.spins
        return pad

    def copy(self) -> "SpinConfig":
        return SpinConfig(self.dims, self.spins.copy())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SpinConfig)
            and self.dims == other.dims
            and np.array_equal(self.spins, other.spins)
        )


def energy(config: SpinConfig) -> int:
    """Disagreeing nearest-neighbor pairs, boundary pairs included."""
    return int(_kernels.energy_pad(config.padded()))


def heat_bath_table(beta: float) -> np.ndarray:
    """p(+1) for neighbor sums -6, -4, ..., 6."""
    s = np.arange(-6, 7, 2, dtype=np.float64)
    return 1.0 / (1.0 + np.exp(-beta * s))


def heat_bath_sweep(
    config: SpinConfig, beta: float, gen: np.random.Generator
) -> SpinConfig:
    """One sequential heat-bath pass in canonical cell order."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    pad = config.padded()
    u = gen.random((1, config.dims.ncells))
    _kernels.sweep_block(pad, heat_bath_table(beta), u)
    return SpinConfig(config.dims, pad[1:-1, 1:-1, 1:-1])


def run_chain(params: ChainParams, replica: int = 0) -> Iterator[SpinConfig]:
    """Deterministic stream of (sweeps - burn_in) // thin kept states.

    Kept states are those after sweeps burn_in+1 .. sweeps whose offset
    past burn-in is a multiple of thin.  The replica index selects an
    independent counter-based stream via the fixed splitting function.
    """
    gen = _rng.generator(params.seed, replica)
    dims = params.dims
    pad = SpinConfig.flat(dims).padded()
    table = heat_bath_table(params.beta)
    done = 0
    while done < params.sweeps:
        block = min(SWEEP_BLOCK, params.sweeps - done)
        u = gen.random((block, dims.ncells))
        for t in range(block):
            _kernels.sweep_block(pad, table, u[t : t + 1])
            done += 1
            if done > params.burn_in and (done - params.burn_in) % params.thin == 0:
                yield SpinConfig(dims, pad[1:-1, 1:-1, 1:-1].copy())


def _pair_terms(dims: Box):
    """Flat-index NN pair list plus per-cell boundary weights."""
    nx, ny, nz = dims.nx, dims.ny, dims.nz
    idx = np.arange(nx * ny * nz).reshape(nx, ny, nz)
    pairs = []
    for axis in range(3):
        sl_a = [slice(None)] * 3
        sl_b = [slice(None)] * 3
        sl_a[axis] = slice(None, -1)
        sl_b[axis] = slice(1, None)
        pairs.append(
            np.stack(
                [idx[tuple(sl_a)].reshape(-1), idx[tuple(sl_b)].reshape(-1)], axis=1
            )
        )
    pairs = np.concatenate(pairs, axis=0)
    # boundary neighbor counts per cell, split by boundary sign
    cnt_plus = np.zeros((nx, ny, nz), np.int64)
    cnt_minus = np.zeros((nx, ny, nz), np.int64)
    layers = np.arange(dims.az0, dims.az0 + dims.nz)
    side_sign = np.where(layers < 0, 1, -1)  # outside side cell, same layer
    for arr, sgn in ((cnt_plus, 1), (cnt_minus, -1)):
        sides = side_sign == sgn
        arr[0, :, :] += sides
        arr[-1, :, :] += sides
        arr[:, 0, :] += sides
        arr[:, -1, :] += sides
    below = Box.boundary_spin(dims.az0 - 1)
    above = Box.boundary_spin(dims.az0 + dims.nz)
    (cnt_plus if below == 1 else cnt_minus)[:, :, 0] += 1
    (cnt_plus if above == 1 else cnt_minus)[:, :, -1] += 1
    return pairs, cnt_plus.reshape(-1), cnt_minus.reshape(-1)


def bitmask_energies(dims: Box) -> np.ndarray:
    """Energy of every configuration of a small box, indexed by bitmask
    in canonical cell order (bit set = spin +1)."""
    n = dims.ncells
    if n > 24:
        raise ValueError("box too large for exhaustive enumeration")
    pairs, cnt_plus, cnt_minus = _pair_terms(dims)
    masks = np.arange(1 << n, dtype=np.uint32)
    e = np.zeros(1 << n, np.int32)
    for i, j in pairs:
        e += ((masks >> np.uint32(i)) ^ (masks >> np.uint32(j))).astype(np.int32) & 1
    for i in range(n):
        if cnt_plus[i] == 0 and cnt_minus[i] == 0:
            continue
        bit = ((masks >> np.uint32(i)) & 1).astype(np.int32)
        e += cnt_plus[i].astype(np.int32) + bit * np.int32(cnt_minus[i] - cnt_plus[i])
    return e


def exact_boltzmann(dims: Box, beta: float) -> np.ndarray:
    """Exact probability of every configuration (<= 24 cells), indexed
    by canonical bitmask.  Sums to 1 within 1e-12."""
    e = bitmask_energies(dims).astype(np.float64)
    w = np.exp(-beta * (e - e.min()))
    return w / w.sum()


def pushforward(probs: np.ndarray, values: np.ndarray) -> dict:
    """Exact law of an integer observable under an enumerated measure."""
    out: dict[int, float] = {}
    vals = np.asarray(values)
    for v in np.unique(vals):
        out[int(v)] = float(probs[vals == v].sum())
    return out


def single_site_conditional(beta: float, neighbor_sum: int) -> float:
    """Closed-form heat-bath p(+1): the +1 choice creates (6-s)/2
    disagreements among the six neighbors, the -1 choice (6+s)/2."""
    return 1.0 / (1.0 + math.exp(-beta * neighbor_sum))
