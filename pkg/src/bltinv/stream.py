"""Streaming products with a BLT or its inverse, and correlated noise generation.

Each channel keeps one buffer holding the discounted sum of past inputs, so
row t of ``C @ X`` costs O(d m) regardless of t.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .blt import BltParams, InverseBltParams
from .errors import DimensionMismatch

DUMP_MAGIC = b"BLTN"
_HEADER = struct.Struct("<4sIIxxxx")


def _channels(params) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(params, InverseBltParams):
        return params.alpha_hat.copy(), params.lambda_hat.copy()
    return params.alpha.copy(), params.lam.copy()


@dataclass(eq=False)
class StreamState:
    """Buffers S_i = sum_{tau < t} lam_i**(t-1-tau) x_tau for a width-m stream.

    Single owner: do not step one instance from several threads.
    """

    params: BltParams | InverseBltParams
    m: int = 1
    alpha: np.ndarray = field(init=False, repr=False)
    lam: np.ndarray = field(init=False, repr=False)
    buffers: np.ndarray = field(init=False, repr=False)
    t: int = field(init=False, default=1)

    def __post_init__(self):
        if self.m < 1:
            raise DimensionMismatch("stream width must be >= 1")
        self.alpha, self.lam = _channels(self.params)
        self.buffers = np.zeros((self.alpha.size, self.m))

    def _check(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.ndim == 0 and self.m == 1:
            v = v.reshape(1)
        if v.shape != (self.m,):
            raise DimensionMismatch(f"expected a vector of width {self.m}, got shape {v.shape}")
        return v

    def _push(self, x: np.ndarray) -> None:
        self.buffers *= self.lam[:, None]
        self.buffers += x
        self.t += 1

    def history(self) -> np.ndarray:
        return self.alpha @ self.buffers


def step_multiply(state: StreamState, x_t) -> np.ndarray:
    """Row t of C @ X from row t of X."""
    x = state._check(x_t)
    y = x + state.history()
    state._push(x)
    return y


def step_solve(state: StreamState, y_t) -> np.ndarray:
    """Row t of the solution of C @ X = Y from row t of Y."""
    y = state._check(y_t)
    x = y - state.history()
    state._push(x)
    return x


def multiply(params, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float).T).T
    st = StreamState(params, X.shape[1])
    return np.array([step_multiply(st, row) for row in X])


def solve(params, Y) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
    st = StreamState(params, Y.shape[1])
    return np.array([step_solve(st, row) for row in Y])


@dataclass(frozen=True)
class NoiseConfig:
    """Noise multiplier and scale for the correlated mechanism.

    Pass either ``sigma`` or ``rho`` (zCDP budget, giving sigma**2 = 1 / (2 rho)).
    Entries of Z have standard deviation ``sensitivity * sigma``.
    """

    sigma: float | None = None
    rho: float | None = None
    sensitivity: float = 1.0
    seed: int = 0
    m: int = 1

    def __post_init__(self):
        if self.rho is not None:
            if not self.rho > 0:
                raise ValueError("rho must be positive")
            implied = float(np.sqrt(1.0 / (2.0 * self.rho)))
            if self.sigma is None:
                object.__setattr__(self, "sigma", implied)
            elif not np.isclose(self.sigma, implied, rtol=1e-12, atol=0.0):
                raise ValueError(f"sigma={self.sigma} disagrees with rho={self.rho} (needs {implied})")
        if self.sigma is None:
            raise ValueError("give sigma or rho")
        if self.sigma < 0 or self.sensitivity < 0:
            raise ValueError("sigma and sensitivity must be non-negative")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def scale(self) -> float:
        return self.sensitivity * self.sigma


class GaussianStream:
    """Standard normals by Box-Muller on a Philox counter stream.

    Philox is counter based, so the stream for a seed is the same on every
    platform.  Not a cryptographic generator.
    """

    def __init__(self, seed: int):
        self._bits = np.random.Generator(np.random.Philox(seed))

    def normals(self, m: int) -> np.ndarray:
        k = (m + 1) // 2
        u = self._bits.random((2, k))
        rad = np.sqrt(-2.0 * np.log1p(-u[0]))  # 1 - u lies in (0, 1]
        ang = 2.0 * np.pi * u[1]
        return np.concatenate([rad * np.cos(ang), rad * np.sin(ang)])[:m]


def noise_rows(inv: InverseBltParams, cfg: NoiseConfig, steps: int,
               z_source: Callable[[int], np.ndarray] | np.ndarray | None = None) -> Iterator[np.ndarray]:
    """Rows of C^{-1} Z, one per step.

    ``z_source`` replaces the random Z (rows used as given, no scaling): an
    array of shape (steps, m) or a callable t -> row.  Meant for tests.
    """
    st = StreamState(inv, cfg.m)
    gauss = GaussianStream(cfg.seed)
    for t in range(steps):
        if z_source is None:
            z = cfg.scale * gauss.normals(cfg.m)
        elif callable(z_source):
            z = np.asarray(z_source(t), dtype=float)
        else:
            z = np.asarray(z_source[t], dtype=float)
        yield step_multiply(st, z)


def write_rows(path, rows) -> tuple[int, int]:
    """Binary dump: 16-byte header ("BLTN", u32 n, u32 m, 4 zero bytes) then little-endian f64 rows."""
    arr = np.asarray(list(rows) if not isinstance(rows, np.ndarray) else rows, dtype="<f8")
    arr = np.atleast_2d(arr)
    n, m = arr.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(DUMP_MAGIC, n, m))
        fh.write(np.ascontiguousarray(arr).tobytes())
    return n, m


def read_rows(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, n, m = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != DUMP_MAGIC:
            raise ValueError(f"not a row dump (magic {magic!r})")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * m:
        raise ValueError(f"truncated dump: expected {n * m} values, found {data.size}")
    return data.reshape(n, m).astype(float)
