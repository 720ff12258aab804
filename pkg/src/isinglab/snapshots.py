"""Bit-exact spin snapshots.

Layout (little-endian): a fixed header followed by the spins packed one
bit per cell (bit set = +1) in canonical cell order, least significant
bit first.  The header carries magic, format version, box geometry,
beta, chain seed, sweep index, and a CRC32 of the payload so truncation
or corruption is detected on load.
"""

from __future__ import annotations

import os
import struct
import zlib

import numpy as np

from .ising import SpinConfig
from .lattice import Box

MAGIC = b"ISL\x01"
VERSION = 1
_HEADER = struct.Struct("<4sHxx6i d Q Q I")


class SnapshotError(ValueError):
    pass


def pack_spins(cfg: SpinConfig) -> bytes:
    bits = (cfg.spins.reshape(-1) == 1).astype(np.uint8)
    return np.packbits(bits, bitorder="little").tobytes()


def unpack_spins(dims: Box, payload: bytes) -> SpinConfig:
    n = dims.ncells
    bits = np.unpackbits(
        np.frombuffer(payload, np.uint8), count=n, bitorder="little"
    )
    spins = np.where(bits, 1, -1).astype(np.int8)
    return SpinConfig(dims, spins.reshape(dims.nx, dims.ny, dims.nz))


def write_atomic(path: str, data: bytes) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def snapshot_bytes(cfg: SpinConfig, beta: float, seed: int, sweep: int) -> bytes:
    d = cfg.dims
    payload = pack_spins(cfg)
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        d.nx,
        d.ny,
        d.nz,
        d.ax0,
        d.ay0,
        d.az0,
        beta,
        seed,
        sweep,
        zlib.crc32(payload),
    )
    return header + payload


def write_snapshot(
    path: str, cfg: SpinConfig, beta: float, seed: int, sweep: int
) -> None:
    write_atomic(path, snapshot_bytes(cfg, beta, seed, sweep))


def read_snapshot(path: str) -> tuple[SpinConfig, dict]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header")
    magic, version, nx, ny, nz, ax0, ay0, az0, beta, seed, sweep, crc = (
        _HEADER.unpack_from(data)
    )
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported version {version}")
    dims = Box(nx, ny, nz, ax0, ay0, az0)
    payload = data[_HEADER.size :]
    if len(payload) != (dims.ncells + 7) // 8:
        raise SnapshotError(f"{path}: truncated payload")
    if zlib.crc32(payload) != crc:
        raise SnapshotError(f"{path}: checksum mismatch")
    meta = {"beta": beta, "seed": seed, "sweep": sweep, "dims": dims}
    return unpack_spins(dims, payload), meta
