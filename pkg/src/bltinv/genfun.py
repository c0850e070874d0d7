"""Generating functions of Toeplitz columns as rational functions.

The column ``c_1, c_2, ...`` of a lower-triangular Toeplitz matrix is
identified with the power series ``sum_t c_{t+1} x**t``.  Products of such
matrices are products of series, so a BLT and its inverse have generating
functions whose product is 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import poly
from .blt import BltParams, InverseBltParams
from .errors import LengthMismatch, NonUnitConstant
from .poly import EPS_SEP, Polynomial

COPRIME_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class RationalGF:
    """num / den with ``den(0) == 1``."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        num = self.num if isinstance(self.num, Polynomial) else Polynomial(self.num)
        den = self.den if isinstance(self.den, Polynomial) else Polynomial(self.den)
        d0 = den.coeffs[0]
        if d0 == 0.0:
            raise NonUnitConstant("denominator must have a nonzero constant term")
        if d0 != 1.0:
            num, den = Polynomial(num.coeffs / d0), Polynomial(den.coeffs / d0)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __call__(self, x):
        return poly.evaluate(self.num, x) / poly.evaluate(self.den, x)

    def is_coprime(self, tol: float = COPRIME_TOL) -> bool:
        """True if num does not (numerically) vanish at any root of den."""
        den = self.den.trim()
        if den.coeffs.size < 2 or self.num.is_zero:
            return not self.num.is_zero
        roots = poly.companion_eigenvalues(den)
        vals = np.abs(np.polyval(self.num.coeffs[::-1], roots))
        return bool(np.all(vals > tol * self.num.scale))


def genfun_of(params: BltParams) -> RationalGF:
    """f = r / q for the BLT column."""
    q = poly.build_q(params.lam)
    r = poly.build_r(poly.build_p(params.alpha, params.lam), q)
    return RationalGF(r, q)


def reciprocal(gf: RationalGF) -> RationalGF:
    c0 = gf.num.coeffs[0]
    if abs(c0) <= EPS_SEP * max(gf.num.scale, 1.0):
        raise NonUnitConstant("numerator vanishes at 0, the reciprocal has no power series")
    return RationalGF(gf.den, gf.num)


def maclaurin(gf: RationalGF, n: int) -> np.ndarray:
    """First n series coefficients of num/den via c_t = num_t - sum_k den_k c_{t-k}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    num = np.zeros(n)
    k = min(n, gf.num.coeffs.size)
    num[:k] = gf.num.coeffs[:k]
    den = gf.den.coeffs[1:]
    c = np.zeros(n)
    for t in range(n):
        m = min(t, den.size)
        c[t] = num[t] - den[:m] @ c[t - 1 :: -1][:m] if m else num[t]
    return c


def series_product(a, b) -> np.ndarray:
    """Cauchy product truncated to the common length."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size != b.size:
        raise LengthMismatch(f"series lengths differ: {a.size} vs {b.size}")
    return np.convolve(a, b)[: a.size]


def series_product_check(a, b, expected) -> float:
    """max_t |(a * b)_t - expected_t|, the same as comparing the Toeplitz product's first column."""
    expected = np.asarray(expected, dtype=float)
    prod = series_product(a, b)
    if expected.size != prod.size:
        raise LengthMismatch(f"expected {prod.size} coefficients, got {expected.size}")
    return float(np.max(np.abs(prod - expected)))


def partial_fraction_eval(inv: InverseBltParams | BltParams, x):
    """1 + sum_i a_i x / (1 - l_i x): the generating function written from BLT parameters."""
    if isinstance(inv, InverseBltParams):
        a, l = inv.alpha_hat, inv.lambda_hat
    else:
        a, l = inv.alpha, inv.lam
    x = np.asarray(x, dtype=float)
    return 1.0 + np.sum(a * x[..., None] / (1.0 - l * x[..., None]), axis=-1)
