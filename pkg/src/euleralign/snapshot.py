"""Binary state snapshots with bit-exact round tripping.

Layout (little-endian):

    8 bytes   magic "EASNAP01"
    u8        format version (1)
    u32       dim
    u32       n (points per axis)
    f64 x 6   L, t, alpha, kappa, gamma, mu
    u8        representation (0 = rho_u, 1 = sigma_u)
    f64[...]  scalar field, row-major physical values
    f64[...]  velocity components, each row-major

Physical values are stored, so the round trip is exact at the byte level.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .grid import Grid, SpectralField
from .model import ModelParams, State

__all__ = ["SnapshotError", "write_snapshot", "read_snapshot"]

MAGIC = b"EASNAP01"
VERSION = 1
_HEADER = struct.Struct("<8sBII6dB")
_REPR_CODE = {"rho_u": 0, "sigma_u": 1}
_REPR_NAME = {v: k for k, v in _REPR_CODE.items()}


class SnapshotError(ValueError):
    """Malformed or incompatible snapshot file."""


def write_snapshot(path: str, state: State, params: ModelParams) -> None:
    """Serialize a state; the write is atomic (temp file + rename)."""
    grid = state.grid
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        grid.dim,
        grid.n,
        grid.L,
        state.t,
        params.alpha,
        params.kappa,
        params.gamma,
        params.mu,
        _REPR_CODE[state.representation],
    )
    scalar = np.ascontiguousarray(state.scalar.to_physical()[0], dtype="<f8")
    u = state.u.to_physical()
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(scalar.tobytes())
            for comp in range(grid.dim):
                fh.write(np.ascontiguousarray(u[comp], dtype="<f8").tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_snapshot(path: str):
    """Read a snapshot; returns (state, params)."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise SnapshotError(f"{path}: truncated header")
        magic, version, dim, n, L, t, alpha, kappa, gamma, mu, rep = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise SnapshotError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise SnapshotError(f"{path}: unsupported version {version}")
        if rep not in _REPR_NAME:
            raise SnapshotError(f"{path}: unknown representation code {rep}")
        grid = Grid(dim, n, L)
        count = n**dim
        body = np.frombuffer(fh.read(8 * count * (1 + dim)), dtype="<f8")
        if body.size != count * (1 + dim):
            raise SnapshotError(f"{path}: truncated field data")
    scalar = body[:count].reshape(grid.shape)
    u = body[count:].reshape((dim,) + grid.shape)
    params = ModelParams(alpha=alpha, kappa=kappa, gamma=gamma, dim=dim, mu=mu)
    state = State(
        _REPR_NAME[rep],
        SpectralField.from_physical(grid, scalar),
        SpectralField.from_physical(grid, u),
        t,
    )
    return state, params
