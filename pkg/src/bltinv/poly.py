"""Polynomials q, p, r attached to a BLT and extraction of their real roots.

Coefficients are stored in ascending power order (``coeffs[k]`` multiplies
``x**k``) because every polynomial here is normalized at ``x = 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .eigen import eigvals
from .errors import (
    BracketFailure,
    ComplexRoots,
    DimensionMismatch,
    DuplicateDecay,
    ZeroPolynomial,
)

EPS_DEG = 1e-12
EPS_SEP = 1e-10
TOL_IMAG = 1e-8
TOL_ROOT = 1e-9
TOL_BRACKET = 1e-14
MAX_EXPANSIONS = 200


class Regime(str, enum.Enum):
    """Sign of ``sum(alpha / lambda) - 1``."""

    LT1 = "LT1"
    EQ1 = "EQ1"
    GT1 = "GT1"


@dataclass(frozen=True, eq=False)
class Polynomial:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size == 0:
            raise ValueError("a polynomial needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    @property
    def is_zero(self) -> bool:
        return self.scale == 0.0

    @property
    def degree(self) -> int:
        """Index of the last coefficient above ``EPS_DEG`` relative to the largest one."""
        if self.is_zero:
            return 0
        big = np.nonzero(np.abs(self.coeffs) > EPS_DEG * self.scale)[0]
        return int(big[-1])

    def trim(self) -> Polynomial:
        return Polynomial(self.coeffs[: self.degree + 1])

    def __call__(self, x):
        return evaluate(self, x)

    def derivative(self) -> Polynomial:
        if self.coeffs.size == 1:
            return Polynomial([0.0])
        k = np.arange(1, self.coeffs.size)
        return Polynomial(self.coeffs[1:] * k)

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coeffs, precision=6)})"


@dataclass(frozen=True, eq=False)
class RootSet:
    roots: np.ndarray
    residual: float

    def __len__(self):
        return len(self.roots)


def _check_distinct(lam: np.ndarray) -> None:
    if lam.size < 2:
        return
    s = np.sort(lam)
    gaps = np.diff(s)
    if np.min(gaps) <= EPS_SEP:
        i = int(np.argmin(gaps))
        raise DuplicateDecay(f"decay parameters {s[i]!r} and {s[i + 1]!r} are not separated by more than {EPS_SEP}")


def build_q(lam) -> Polynomial:
    """Expanded coefficients of prod_i (1 - lam_i x)."""
    lam = np.asarray(lam, dtype=float).ravel()
    if not np.all(np.isfinite(lam)):
        raise ValueError("decay parameters must be finite")
    _check_distinct(lam)
    c = np.array([1.0])
    for li in lam:
        c = np.convolve(c, [1.0, -li])
    return Polynomial(c)


def build_p(alpha, lam) -> Polynomial:
    """Expanded coefficients of sum_i alpha_i prod_{j != i} (1 - lam_j x)."""
    alpha = np.asarray(alpha, dtype=float).ravel()
    lam = np.asarray(lam, dtype=float).ravel()
    if alpha.size != lam.size:
        raise DimensionMismatch(f"got {alpha.size} scales and {lam.size} decays")
    if lam.size == 0:
        raise DimensionMismatch("need at least one (scale, decay) pair")
    _check_distinct(lam)
    d = lam.size
    out = np.zeros(d)
    for i in range(d):
        c = np.array([alpha[i]])
        for j in range(d):
            if j != i:
                c = np.convolve(c, [1.0, -lam[j]])
        out += c
    return Polynomial(out)


def build_r(p: Polynomial, q: Polynomial, trim: bool = True) -> Polynomial:
    """r(x) = q(x) + x p(x), dropping a numerically vanished leading term when ``trim``."""
    pc = p.coeffs
    qc = q.coeffs
    n = max(qc.size, pc.size + 1)
    out = np.zeros(n)
    out[: qc.size] += qc
    out[1 : pc.size + 1] += pc
    r = Polynomial(out)
    return r.trim() if trim else r


def evaluate(poly: Polynomial, x):
    """Horner evaluation; ``x`` may be a scalar or an array."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for c in poly.coeffs[::-1]:
        acc = acc * x + c
    return acc if acc.ndim else float(acc)


def _two_sum(a, b):
    s = a + b
    z = s - a
    return s, (a - (s - z)) + (b - z)


def _split(a):
    c = 134217729.0 * a  # 2**27 + 1
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def evaluate_compensated(poly: Polynomial, x):
    """Compensated Horner: as accurate as Horner run in twice the working precision."""
    x = np.asarray(x, dtype=float)
    c = poly.coeffs
    s = np.full_like(x, c[-1])
    err = np.zeros_like(x)
    for a in c[-2::-1]:
        prod, pi = _two_prod(s, x)
        s, sigma = _two_sum(prod, a)
        err = err * x + (pi + sigma)
    out = s + err
    return out if out.ndim else float(out)


def companion_matrix(poly: Polynomial) -> np.ndarray:
    """Companion matrix: ones on the subdiagonal, last column ``-c_k / c_D``."""
    if poly.is_zero:
        raise ZeroPolynomial("companion matrix of the zero polynomial")
    t = poly.trim()
    deg = t.coeffs.size - 1
    if deg < 1:
        raise ZeroPolynomial("companion matrix needs degree >= 1")
    c = t.coeffs
    m = np.zeros((deg, deg))
    m[np.arange(1, deg), np.arange(deg - 1)] = 1.0
    m[:, -1] = -c[:-1] / c[-1]
    return m


def _residual(poly: Polynomial, roots: np.ndarray) -> float:
    if roots.size == 0:
        return 0.0
    return float(np.max(np.abs(evaluate_compensated(poly, roots))))


def _polish(poly: Polynomial, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    """A few Newton steps per root, each kept only if it lowers the accurate residual."""
    dp = poly.derivative()
    out = roots.copy()
    for i, x in enumerate(out):
        fx = abs(evaluate_compensated(poly, x))
        for _ in range(steps):
            dfx = evaluate(dp, x)
            if fx == 0.0 or dfx == 0.0:
                break
            xn = x - evaluate_compensated(poly, x) / dfx
            fn = abs(evaluate_compensated(poly, xn))
            if not fn < fx:
                break
            x, fx = xn, fn
        out[i] = x
    return out


def companion_eigenvalues(poly: Polynomial) -> np.ndarray:
    """Complex eigenvalues of the companion matrix (no realness check)."""
    return eigvals(companion_matrix(poly))


def roots_companion(poly: Polynomial, polish: bool = True) -> RootSet:
    """Real roots as eigenvalues of the companion matrix, sorted ascending.

    With ``polish`` each eigenvalue gets a few guarded Newton steps using
    compensated evaluation, which removes the eigensolver's backward error
    but keeps the root the eigensolver selected.
    """
    ev = companion_eigenvalues(poly)
    bad = np.abs(ev.imag) > TOL_IMAG * (1.0 + np.abs(ev.real))
    if np.any(bad):
        raise ComplexRoots(f"polynomial has non-real roots: {ev[bad]}")
    roots = np.sort(ev.real)
    if polish:
        roots = np.sort(_polish(poly.trim(), roots))
    return RootSet(roots, _residual(poly, roots))


def _bracket_root(f, df, lo: float, hi: float, flo: float, fhi: float) -> float:
    """Bisection safeguarded Newton on a sign-changing bracket."""
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    x = 0.5 * (lo + hi)
    for _ in range(400):
        fx = f(x)
        if fx == 0.0:
            return x
        if np.sign(fx) == np.sign(flo):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
        if hi - lo <= max(TOL_BRACKET, 4 * np.finfo(float).eps * max(abs(lo), abs(hi))):
            break
        dfx = df(x)
        step_ok = dfx != 0.0
        if step_ok:
            xn = x - fx / dfx
            step_ok = lo < xn < hi
        x = xn if step_ok else 0.5 * (lo + hi)
    return x


def roots_bracketed(r: Polynomial, mu, regime: Regime) -> RootSet:
    """Roots of r located in the brackets supplied by interlacing with the roots ``mu`` of q.

    One root in each interval (mu_i, mu_{i+1}); the remaining root (if the
    regime has one) lies beyond mu_d for LT1 and below -1 for GT1.
    """
    mu = np.sort(np.asarray(mu, dtype=float))
    regime = Regime(regime)
    dr = r.derivative()

    def f(x):
        return evaluate_compensated(r, x)

    def df(x):
        return evaluate(dr, x)

    brackets = [(mu[i], mu[i + 1]) for i in range(mu.size - 1)]
    if regime is Regime.LT1:
        hi = 2.0 * mu[-1]
        for _ in range(MAX_EXPANSIONS):
            if np.sign(f(hi)) != np.sign(f(mu[-1])) and f(hi) != 0.0:
                break
            hi *= 2.0
        else:
            raise BracketFailure("no sign change beyond the largest root of q")
        brackets.append((mu[-1], hi))
    elif regime is Regime.GT1:
        lo = -2.0
        for _ in range(MAX_EXPANSIONS):
            if np.sign(f(lo)) != np.sign(f(-1.0)) and f(lo) != 0.0:
                break
            lo *= 2.0
        else:
            raise BracketFailure("no sign change below -1")
        brackets.insert(0, (lo, -1.0))

    roots = []
    for lo, hi in brackets:
        flo, fhi = f(lo), f(hi)
        if flo != 0.0 and fhi != 0.0 and np.sign(flo) == np.sign(fhi):
            raise BracketFailure(f"r does not change sign on ({lo}, {hi})")
        roots.append(_bracket_root(f, df, lo, hi, flo, fhi))
    roots = np.sort(np.array(roots))
    return RootSet(roots, _residual(r, roots))
