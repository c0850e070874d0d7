"""Workloads, sensitivity, and the error of the factorization A = B C.

With C a BLT, the mechanism adds ``B Z`` to the exact answers where
``B = A C^{-1}``.  The max loss is ``sens(C) * max_t ||B[t]||`` and the
Frobenius variant replaces the max by a root mean square over rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import stream
from .blt import BltParams, toeplitz_coeffs
from .errors import DimensionMismatch, SingularWorkload


@dataclass(frozen=True, eq=False)
class WorkloadSpec:
    """Either the all-ones lower-triangular prefix-sum workload or an explicit matrix."""

    kind: str
    n: int
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("workload size must be >= 1")
        if self.kind == "prefix":
            return
        if self.kind != "explicit":
            raise ValueError(f"unknown workload kind {self.kind!r}")
        a = np.array(self.matrix, dtype=float)
        if a.shape != (self.n, self.n):
            raise DimensionMismatch(f"workload must be {self.n}x{self.n}, got {a.shape}")
        if np.any(np.triu(a, 1) != 0):
            raise SingularWorkload("workload must be lower triangular")
        if np.any(np.diag(a) == 0):
            raise SingularWorkload("workload has a zero on its diagonal")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @classmethod
    def prefix_sum(cls, n: int) -> WorkloadSpec:
        return cls("prefix", n)

    @classmethod
    def explicit(cls, a) -> WorkloadSpec:
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch("explicit workload must be square")
        return cls("explicit", a.shape[0], a)

    def dense(self) -> np.ndarray:
        if self.kind == "prefix":
            return np.tril(np.ones((self.n, self.n)))
        return np.array(self.matrix)


@dataclass(frozen=True, eq=False)
class LossReport:
    sensitivity: float
    max_row_norm: float
    loss: float
    frobenius_loss: float
    per_row_norms: np.ndarray | None = None

    def to_dict(self, rows: bool = False) -> dict:
        out = {
            "sensitivity": self.sensitivity,
            "max_row_norm": self.max_row_norm,
            "loss": self.loss,
            "frobenius_loss": self.frobenius_loss,
        }
        if rows and self.per_row_norms is not None:
            out["per_row_norms"] = self.per_row_norms.tolist()
        return out

    def to_json(self, rows: bool = False) -> str:
        return json.dumps(self.to_dict(rows))


def sensitivity(params: BltParams, n: int) -> float:
    """Largest column norm of C.

    Column k holds the first n - k + 1 coefficients, so the norms are
    prefix norms of one vector and the first column is always the largest.
    """
    c = toeplitz_coeffs(params, n)
    return float(np.sqrt(c @ c))


def inverse_column(params, n: int) -> np.ndarray:
    """First column of C^{-1}, by streaming an impulse through the solver."""
    st = stream.StreamState(params, 1)
    out = np.empty(n)
    for t in range(n):
        out[t] = stream.step_solve(st, [1.0 if t == 0 else 0.0])[0]
    return out


def b_rows(c_inv: np.ndarray, workload: WorkloadSpec):
    """Yield the rows of B = A C^{-1}, row t holding its first t + 1 entries."""
    n = workload.n
    if c_inv.size != n:
        raise DimensionMismatch(f"inverse column has {c_inv.size} entries, workload needs {n}")
    if workload.kind == "prefix":
        s = np.cumsum(c_inv)
        for t in range(n):
            yield s[t::-1]
    else:
        a = workload.matrix
        for t in range(n):
            # B[t, j] = sum_i A[t, i] c_inv[i - j]
            yield np.convolve(a[t, t::-1], c_inv[: t + 1])[: t + 1][::-1]


def row_norms(c_inv: np.ndarray, workload: WorkloadSpec) -> np.ndarray:
    if workload.kind == "prefix":
        s = np.cumsum(c_inv)
        return np.sqrt(np.cumsum(s * s))
    return np.array([np.sqrt(r @ r) for r in b_rows(c_inv, workload)])


def max_loss(params, workload: WorkloadSpec, keep_rows: bool = False) -> LossReport:
    n = workload.n
    sens = sensitivity(params, n)
    norms = row_norms(inverse_column(params, n), workload)
    mx = float(np.max(norms))
    rms = float(np.sqrt(np.mean(norms * norms)))
    return LossReport(sens, mx, sens * mx, sens * rms, norms if keep_rows else None)


def frobenius_loss(params, workload: WorkloadSpec) -> float:
    return max_loss(params, workload).frobenius_loss
