"""BLT parameters, their Toeplitz coefficients, and exact inversion.

A degree-d BLT with scales ``alpha`` and decays ``lam`` is the unit lower
triangular Toeplitz matrix whose first column is
``1, sum(alpha), sum(alpha * lam), sum(alpha * lam**2), ...``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import poly
from .errors import (
    BracketFailure,
    ComplexRoots,
    DegenerateDecays,
    DimensionMismatch,
    InterlacingViolation,
    InvalidParams,
    InversionFailure,
    NoConvergence,
    SizeLimit,
    ZeroDecay,
)
from .poly import EPS_DEG, EPS_SEP, Regime

DEFAULT_MAX_DENSE_N = 4096


def max_dense_n() -> int:
    return int(os.environ.get("BLT_MAX_DENSE_N", DEFAULT_MAX_DENSE_N))


def _vec(x) -> np.ndarray:
    v = np.array(x, dtype=float).ravel()
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class BltParams:
    alpha: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        a, l = _vec(self.alpha), _vec(self.lam)
        if a.size != l.size:
            raise DimensionMismatch(f"got {a.size} scales and {l.size} decays")
        if a.size == 0:
            raise DimensionMismatch("a BLT needs degree d >= 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "lam", l)

    @property
    def d(self) -> int:
        return self.alpha.size

    def canonical(self) -> BltParams:
        """Same BLT with decays sorted strictly descending."""
        order = np.argsort(-self.lam, kind="stable")
        return BltParams(self.alpha[order], self.lam[order])

    def to_dict(self) -> dict:
        return {"alpha": self.alpha.tolist(), "lambda": self.lam.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> BltParams:
        return cls(obj["alpha"], obj["lambda"])

    def __repr__(self):
        return f"BltParams(alpha={self.alpha.tolist()}, lam={self.lam.tolist()})"


@dataclass(frozen=True, eq=False)
class InverseBltParams:
    alpha_hat: np.ndarray
    lambda_hat: np.ndarray
    regime: Regime

    def __post_init__(self):
        a, l = _vec(self.alpha_hat), _vec(self.lambda_hat)
        if a.size != l.size:
            raise DimensionMismatch(f"got {a.size} scales and {l.size} decays")
        object.__setattr__(self, "alpha_hat", a)
        object.__setattr__(self, "lambda_hat", l)
        object.__setattr__(self, "regime", Regime(self.regime))

    @property
    def d(self) -> int:
        return self.alpha_hat.size

    def as_blt(self) -> BltParams:
        """The inverse viewed as an (unvalidated) BLT in its own right."""
        return BltParams(self.alpha_hat, self.lambda_hat)

    def to_dict(self) -> dict:
        return {
            "alpha_hat": self.alpha_hat.tolist(),
            "lambda_hat": self.lambda_hat.tolist(),
            "regime": self.regime.value,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> InverseBltParams:
        return cls(obj["alpha_hat"], obj["lambda_hat"], obj.get("regime", Regime.LT1))

    def __repr__(self):
        return (f"InverseBltParams(alpha_hat={self.alpha_hat.tolist()}, "
                f"lambda_hat={self.lambda_hat.tolist()}, regime={self.regime.value})")


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: list[str] = field(default_factory=list)
    regime: Regime | None = None


@dataclass(frozen=True, eq=False)
class LegacyUWV:
    """First column as ``u.v + kappa`` then ``u W^(t-1) v`` with diagonal W."""

    W_diag: np.ndarray
    u: np.ndarray
    v: np.ndarray
    kappa: float

    def coeffs(self, n: int) -> np.ndarray:
        out = np.empty(n)
        out[0] = self.u @ self.v + self.kappa
        w = self.v.astype(float).copy()
        for t in range(1, n):
            w = w * self.W_diag
            out[t] = self.u @ w
        return out


def _as_params(params) -> BltParams:
    if isinstance(params, InverseBltParams):
        return params.as_blt()
    return params


def _min_gap(x: np.ndarray) -> float:
    if x.size < 2:
        return np.inf
    return float(np.min(np.diff(np.sort(x))))


def validate(params: BltParams, mode: str = "strict") -> ValidationReport:
    """Check parameters, collecting every violated constraint instead of raising.

    ``lenient`` only needs finite, distinct decays (the matrix is always
    invertible); ``strict`` adds the positivity/sum/range conditions under
    which the inverse is again a well-behaved BLT, and reports the regime.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown validation mode {mode!r}")
    a, l = params.alpha, params.lam
    bad = []
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(l))):
        bad.append("parameters must be finite")
        return ValidationReport(False, bad)
    if _min_gap(l) <= EPS_SEP:
        bad.append(f"decays must be pairwise distinct (gap > {EPS_SEP:g})")
    if mode == "strict":
        if np.any(a <= 0):
            bad.append("scales must be positive: alpha_i > 0")
        if np.sum(a) >= 1:
            bad.append(f"scales must satisfy sum(alpha) < 1, got {np.sum(a):.6g}")
        out = (l <= 0) | (l >= 1)
        if np.any(out):
            bad.append(f"decays must lie in (0, 1): lambda in (0,1) violated by {l[out].tolist()}")
    if bad:
        return ValidationReport(False, bad)
    regime = regime_of(params) if mode == "strict" else None
    return ValidationReport(True, [], regime)


def ratio_sum(params: BltParams) -> float:
    """sum_i alpha_i / lambda_i, the quantity that decides the regime."""
    return float(np.sum(params.alpha / params.lam))


def regime_of(params: BltParams) -> Regime:
    s = ratio_sum(params)
    if abs(s - 1.0) <= EPS_DEG:
        return Regime.EQ1
    return Regime.LT1 if s < 1.0 else Regime.GT1


def toeplitz_coeffs(params, n: int) -> np.ndarray:
    """First column c_1..c_n via one geometric buffer per channel, O(n d)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = _as_params(params)
    out = np.empty(n)
    out[0] = 1.0
    if n > 1:
        # row t holds the buffers after t updates buf <- buf * lam, starting from alpha
        steps = np.empty((n - 1, p.d))
        steps[0] = p.alpha
        steps[1:] = p.lam
        out[1:] = np.cumprod(steps, axis=0).sum(axis=1)
    return out


def toeplitz_from_column(col: np.ndarray) -> np.ndarray:
    """Dense lower-triangular Toeplitz matrix with the given first column."""
    col = np.asarray(col, dtype=float)
    n = col.size
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    return np.where(diff >= 0, col[np.clip(diff, 0, None)], 0.0)


def materialize(params, n: int, max_n: int | None = None) -> np.ndarray:
    cap = max_dense_n() if max_n is None else max_n
    if n > cap:
        raise SizeLimit(f"dense size {n} exceeds the cap {cap}; use the streaming routines")
    return toeplitz_from_column(toeplitz_coeffs(params, n))


def materialize_inverse(params: BltParams, n: int, max_n: int | None = None) -> np.ndarray:
    return materialize(invert_params(params), n, max_n=max_n)


def _pf_scales(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """s_i = prod_j (a_i - b_j) / prod_{j != i} (a_i - a_j)."""
    gaps = a[:, None] - a[None, :]
    np.fill_diagonal(gaps, 1.0)
    return np.prod(a[:, None] - b[None, :], axis=1) / np.prod(gaps, axis=1)


def scales_from_decays(lam, lambda_hat) -> tuple[np.ndarray, np.ndarray]:
    """The unique scales (alpha, alpha_hat) making BLT(alpha, lam) and BLT(alpha_hat, lambda_hat) inverse.

    A single zero entry in ``lambda_hat`` is allowed; the formulas extend to
    it by continuity (the EQ1 case).
    """
    lam = np.asarray(lam, dtype=float).ravel()
    lh = np.asarray(lambda_hat, dtype=float).ravel()
    if lam.size != lh.size:
        raise DimensionMismatch(f"got {lam.size} decays and {lh.size} inverse decays")
    if _min_gap(lam) <= EPS_SEP or _min_gap(lh) <= EPS_SEP:
        raise DegenerateDecays("decays must be pairwise distinct")
    if np.min(np.abs(lam[:, None] - lh[None, :])) <= EPS_SEP:
        raise DegenerateDecays("a decay coincides with an inverse decay")
    if np.any(np.abs(lam) <= EPS_SEP):
        raise DegenerateDecays("decays must be non-zero")
    if np.count_nonzero(np.abs(lh) <= EPS_SEP) > 1:
        raise DegenerateDecays("at most one inverse decay may be zero")
    return _pf_scales(lam, lh), _pf_scales(lh, lam)


def secular(alpha: np.ndarray, lam: np.ndarray, y):
    """g(y) = 1 + sum_i alpha_i / (y - lam_i); its zeros are the inverse decays.

    g equals r(1/y) / q(1/y), so it vanishes exactly where r does but is
    evaluated from (alpha, lam) directly instead of expanded coefficients.
    """
    y = np.asarray(y, dtype=float)
    return 1.0 + np.sum(alpha / (y[..., None] - lam), axis=-1)


def _secular_root(alpha, lam, lo: float, hi: float, seed: float) -> float:
    """Zero of g on (lo, hi), Newton guarded by bisection.

    g is monotone between its poles: decreasing for positive scales,
    increasing for negative ones.
    """
    sign = 1.0 if alpha[0] > 0 else -1.0
    x = seed if lo < seed < hi else 0.5 * (lo + hi)
    for _ in range(200):
        t = alpha / (x - lam)
        g = 1.0 + t.sum()
        if g == 0.0:
            return x
        if sign * g > 0.0:
            lo = x
        else:
            hi = x
        dg = -(t * t / alpha).sum() if alpha.all() else -(alpha / (x - lam) ** 2).sum()
        xn = x - g / dg
        if abs(xn - x) <= 4 * np.spacing(abs(x)):
            return xn
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if hi - lo <= 2 * np.spacing(max(abs(lo), abs(hi))):
            return xn
        x = xn
    return x


def _inverse_decay_brackets(lam: np.ndarray, regime: Regime) -> list[tuple[float, float]]:
    """Interlacing intervals for the non-zero inverse decays, descending order."""
    br = [(lam[i + 1], lam[i]) for i in range(lam.size - 1)]
    if regime is Regime.LT1:
        br.append((0.0, lam[-1]))
    elif regime is Regime.GT1:
        br.append((-1.0, 0.0))
    return br


def refine_inverse_decays(params: BltParams, seeds, regime: Regime) -> np.ndarray:
    """Polish approximate inverse decays on the secular form within their brackets.

    ``params`` must be canonical; ``seeds`` are the non-zero inverse decays
    (any order).  Returns them sorted descending.
    """
    br = _inverse_decay_brackets(params.lam, regime)
    seeds = np.sort(np.asarray(seeds, dtype=float))[::-1]
    if seeds.size != len(br):
        seeds = np.full(len(br), np.nan)
    out = np.array([_secular_root(params.alpha, params.lam, lo, hi, s) for (lo, hi), s in zip(br, seeds)])
    return out


def invert_params(params: BltParams, method: str = "companion", refine: bool = True) -> InverseBltParams:
    """Exact BLT parameters of the inverse matrix.

    Decays of the inverse are reciprocals of the roots of r = q + x p; the
    scales follow in closed form.  ``method`` picks the root finder:
    ``companion`` (eigenvalues) or ``bracketed`` (interlacing brackets).
    With ``refine`` the roots are then polished on the secular form of r,
    which is immune to the rounding in r's expanded coefficients.
    """
    rep = validate(params, "strict")
    if not rep.valid:
        raise InvalidParams(rep.violations)
    p = params.canonical()
    regime = rep.regime
    q = poly.build_q(p.lam)
    r = poly.build_r(poly.build_p(p.alpha, p.lam), q, trim=False)
    if regime is Regime.EQ1:
        r = poly.Polynomial(r.coeffs[:-1])
    if r.coeffs.size == 1:
        seeds = np.zeros(0)
    else:
        try:
            if method == "companion":
                # the secular refinement supersedes the coefficient-based polish
                seeds = 1.0 / poly.roots_companion(r, polish=not refine).roots
            elif method == "bracketed":
                seeds = 1.0 / poly.roots_bracketed(r, 1.0 / p.lam, regime).roots
            else:
                raise ValueError(f"unknown root method {method!r}")
        except (ComplexRoots, NoConvergence, BracketFailure) as exc:
            if not refine:
                raise InversionFailure(f"root finding failed for {p!r}: {exc}") from exc
            # rounding in r's expanded coefficients can fake complex roots or hide a sign
            # change when decays crowd near 1; the secular brackets are exact, so refine
            # from scratch instead
            seeds = np.zeros(0)
    lam_hat = refine_inverse_decays(p, seeds, regime) if refine else seeds
    if regime is Regime.EQ1:
        lam_hat = np.append(lam_hat, 0.0)
    lam_hat = np.sort(lam_hat)[::-1]
    try:
        _, alpha_hat = scales_from_decays(p.lam, lam_hat)
    except DegenerateDecays as exc:
        raise InversionFailure(f"inverse decays are degenerate for {p!r}: {exc}") from exc
    return InverseBltParams(alpha_hat, lam_hat, regime)


def invert_inverse(inv: InverseBltParams) -> BltParams:
    """Recover the BLT whose inverse is ``inv``, for inverses of LT1 parameters.

    Runs the same construction with the roles swapped: the decays come from
    the roots of q_hat + x p_hat, polished inside the brackets
    (lambda_hat_i, lambda_hat_{i-1}) with lambda_hat_0 = 1.
    """
    if inv.regime is not Regime.LT1:
        raise InvalidParams([f"only inverses in regime LT1 can be inverted back, got {inv.regime.value}"])
    order = np.argsort(-inv.lambda_hat, kind="stable")
    ah, lh = inv.alpha_hat[order], inv.lambda_hat[order]
    if not (np.all(ah < 0) and np.all((lh > 0) & (lh < 1)) and _min_gap(lh) > EPS_SEP):
        raise InvalidParams(["an LT1 inverse needs negative scales and distinct decays in (0, 1)"])
    q = poly.build_q(lh)
    r = poly.build_r(poly.build_p(ah, lh), q, trim=False)
    try:
        seeds = 1.0 / poly.roots_companion(r).roots
    except (ComplexRoots, NoConvergence):
        seeds = np.full(lh.size, np.nan)
    seeds = np.sort(seeds)[::-1]
    edges = np.concatenate([[1.0], lh])
    lam = np.array([_secular_root(ah, lh, edges[i + 1], edges[i], seeds[i]) for i in range(lh.size)])
    alpha, _ = scales_from_decays(lam, lh)
    return BltParams(alpha, lam)


def from_interlaced(lam, lambda_hat) -> tuple[BltParams, InverseBltParams]:
    """Build the (BLT, inverse) pair from strictly interlaced decays.

    Requires ``1 > lam[0] > lambda_hat[0] > lam[1] > ... > lam[-1] > lambda_hat[-1] > 0``.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    lh = np.asarray(lambda_hat, dtype=float).ravel()
    if lam.size != lh.size:
        raise DimensionMismatch(f"got {lam.size} decays and {lh.size} inverse decays")
    chain = np.concatenate([[1.0], np.column_stack([lam, lh]).ravel(), [0.0]])
    names = ["1"] + [f"{s}_{i + 1}" for i in range(lam.size) for s in ("lambda", "lambda_hat")] + ["0"]
    for k in range(chain.size - 1):
        if not chain[k] - chain[k + 1] > EPS_SEP:
            raise InterlacingViolation(
                f"interlacing broken at position {k}: {names[k]}={chain[k]!r} must exceed "
                f"{names[k + 1]}={chain[k + 1]!r}",
                position=k,
            )
    alpha, alpha_hat = scales_from_decays(lam, lh)
    return BltParams(alpha, lam), InverseBltParams(alpha_hat, lh, Regime.LT1)


def legacy_uwv(inv: InverseBltParams, params: BltParams | None = None) -> LegacyUWV:
    """Express the inverse column in the older (u, W, v, kappa) form with diagonal W.

    kappa is fixed by requiring the first coefficient to be 1, i.e.
    ``kappa = 1 - sum(alpha_hat / lambda_hat)``.  ``params`` is accepted for
    interface symmetry and is not needed by the computation.
    """
    if np.any(inv.lambda_hat == 0.0):
        raise ZeroDecay("the (u, W, v, kappa) form needs every inverse decay non-zero")
    v = inv.alpha_hat / inv.lambda_hat
    return LegacyUWV(W_diag=inv.lambda_hat.copy(), u=np.ones(inv.d), v=v, kappa=float(1.0 - v.sum()))
