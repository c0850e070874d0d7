"""Derivatives of the inversion map and of the loss.

The inverse decays are reciprocals of the roots nu of r = q + x p.  At a
simple root, r(nu; theta) = 0 gives d nu / d theta = -(dr/dtheta) / r'(nu).
Dividing through by q(nu) keeps everything in product form:

    r = q h,  h(x) = 1 + x sum_i alpha_i / (1 - lam_i x),
    dr/dalpha_j / q = nu / (1 - lam_j nu),
    dr/dlam_j / q   = alpha_j nu^2 / (1 - lam_j nu)^2,
    r'(nu) / q      = sum_i alpha_i / (1 - lam_i nu)^2.

The inverse scales follow by differentiating their closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import poly
from .blt import BltParams, InverseBltParams, invert_params, toeplitz_coeffs, toeplitz_from_column, validate
from .errors import DegenerateRegime, InvalidParams, NearDoubleRoot, PerturbationInvalid
from .loss import WorkloadSpec
from .poly import EPS_SEP, Regime

FD_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class InversionJacobian:
    """d(alpha_hat, lambda_hat) / d(alpha, lambda), shape (2d, 2d).

    Rows follow the canonical (descending) order of the inverse decays;
    columns follow the order of the input pairs.
    """

    matrix: np.ndarray
    method: str
    inverse: InverseBltParams | None = None

    @property
    def d(self) -> int:
        return self.matrix.shape[0] // 2


def _check_regime(params: BltParams) -> Regime:
    rep = validate(params, "strict")
    if not rep.valid:
        raise InvalidParams(rep.violations)
    if rep.regime is Regime.EQ1:
        raise DegenerateRegime("the inverse has a zero decay when sum(alpha/lambda) = 1; "
                               "the map is not differentiable in this parameterization there")
    return rep.regime


def _scale_jacobian(lam, lh, ah, dlh: np.ndarray) -> np.ndarray:
    """d alpha_hat from d lambda_hat via the log-derivative of the closed-form scales."""
    d = lam.size
    dlam = np.hstack([np.zeros((d, d)), np.eye(d)])
    out = np.empty((d, 2 * d))
    for i in range(d):
        g = np.zeros(2 * d)
        for j in range(d):
            g += (dlh[i] - dlam[j]) / (lh[i] - lam[j])
            if j != i:
                g -= (dlh[i] - dlh[j]) / (lh[i] - lh[j])
        out[i] = ah[i] * g
    return out


def jacobian_implicit(params: BltParams, inverse: InverseBltParams | None = None) -> InversionJacobian:
    _check_regime(params)
    order = np.argsort(-params.lam, kind="stable")
    p = params.canonical()
    inv = invert_params(p) if inverse is None else inverse
    a, lam = p.alpha, p.lam
    lh, ah = inv.lambda_hat, inv.alpha_hat
    d = p.d
    nu = 1.0 / lh
    den = 1.0 - lam[None, :] * nu[:, None]  # (root, channel)
    hprime = np.sum(a / den**2, axis=1)
    # guard against (near) double roots on the scale of r's coefficients
    q = poly.build_q(lam)
    r = poly.build_r(poly.build_p(a, lam), q, trim=False)
    rprime = np.abs(np.prod(den, axis=1) * hprime)
    if np.any(rprime < EPS_SEP * r.scale):
        raise NearDoubleRoot(f"|r'(nu)| = {rprime.min():.3g} at a root; roots are not simple")
    dnu = -np.hstack([nu[:, None] / den, a[None, :] * nu[:, None] ** 2 / den**2]) / hprime[:, None]
    dlh = -dnu / nu[:, None] ** 2
    dah = _scale_jacobian(lam, lh, ah, dlh)
    jac = np.vstack([dah, dlh])
    # back to the caller's column order
    cols = np.empty(2 * d, dtype=int)
    cols[order] = np.arange(d)
    cols[d + order] = d + np.arange(d)
    return InversionJacobian(jac[:, np.concatenate([cols[:d], cols[d:]])], "implicit", inv)


def _flat(inv: InverseBltParams) -> np.ndarray:
    return np.concatenate([inv.alpha_hat, inv.lambda_hat])


def jacobian_fd(params: BltParams, h: float = FD_STEP) -> InversionJacobian:
    """Central differences of invert_params with step ``h * (1 + |theta_k|)``."""
    regime = _check_regime(params)
    d = params.d
    theta = np.concatenate([params.alpha, params.lam])
    jac = np.empty((2 * d, 2 * d))
    for k in range(2 * d):
        step = h * (1.0 + abs(theta[k]))
        vals = []
        for sgn in (1.0, -1.0):
            t = theta.copy()
            t[k] += sgn * step
            pt = BltParams(t[:d], t[d:])
            rep = validate(pt, "strict")
            if not rep.valid or rep.regime is not regime:
                raise PerturbationInvalid(f"perturbing coordinate {k} by {sgn * step:+.3g} leaves the "
                                          f"{regime.value} region: {rep.violations or rep.regime}")
            vals.append(_flat(invert_params(pt)))
        jac[:, k] = (vals[0] - vals[1]) / (2.0 * step)
    return InversionJacobian(jac, "finite_difference")


def relative_deviation(a: InversionJacobian, b: InversionJacobian) -> float:
    """max |a - b| / max |b|, a normwise relative error."""
    scale = np.max(np.abs(b.matrix))
    return float(np.max(np.abs(a.matrix - b.matrix)) / scale) if scale > 0 else float(np.max(np.abs(a.matrix)))


def _coeff_jacobian(alpha, lam, n: int) -> np.ndarray:
    """d c_k / d(alpha, lam) for the first column c_1..c_n, shape (n, 2d)."""
    k = np.arange(n - 1)[:, None]  # power lam**k for c_{k+2}
    pw = lam[None, :] ** k
    dl = np.zeros_like(pw)
    if n > 2:
        dl[1:] = k[1:] * lam[None, :] ** (k[1:] - 1) * alpha[None, :]
    out = np.zeros((n, 2 * alpha.size))
    out[1:] = np.hstack([pw, dl])
    return out


def _row_weights(norms: np.ndarray, objective: str, temperature: float) -> tuple[float, np.ndarray]:
    """Value of a functional of the row norms and its gradient in them."""
    n = norms.size
    if objective == "max":
        t = int(np.argmax(norms))  # first index on ties
        w = np.zeros(n)
        w[t] = 1.0
        return float(norms[t]), w
    if objective == "softmax":
        z = norms / temperature
        e = np.exp(z - z.max())
        return float(temperature * (z.max() + np.log(e.sum()))), e / e.sum()
    if objective == "frobenius":
        val = float(np.sqrt(np.mean(norms**2)))
        return val, (norms / (n * val) if val > 0 else np.zeros(n))
    raise ValueError(f"unknown objective {objective!r}")


def _row_objective(c_inv: np.ndarray, workload: WorkloadSpec, objective: str, temperature: float):
    """Row functional of B = A C^{-1} and its gradient in the inverse column."""
    if workload.kind == "prefix":
        s = np.cumsum(c_inv)
        norms = np.sqrt(np.cumsum(s * s))
        val, w = _row_weights(norms, objective, temperature)
        coef = w / np.where(norms > 0, norms, 1.0)
        # d val / d s_k = s_k * sum_{t >= k} coef_t, then back through the cumsum
        gs = s * np.cumsum(coef[::-1])[::-1]
        return val, np.cumsum(gs[::-1])[::-1]
    a = workload.matrix
    b = a @ toeplitz_from_column(c_inv)
    norms = np.linalg.norm(b, axis=1)
    val, w = _row_weights(norms, objective, temperature)
    g_t = a.T @ ((w / np.where(norms > 0, norms, 1.0))[:, None] * b)
    # sum along each subdiagonal of the gradient on the Toeplitz matrix
    return val, np.array([np.trace(g_t, offset=-k) for k in range(workload.n)])


def loss_and_gradient(params: BltParams, workload: WorkloadSpec, objective: str = "max",
                      temperature: float = 0.1) -> tuple[float, np.ndarray]:
    """sens(C) times a row functional of B, and its gradient in (alpha, lambda).

    ``objective`` is ``max`` (row with the largest norm, first one on ties),
    ``frobenius`` (root mean square of row norms) or ``softmax`` (the
    log-sum-exp smoothing of the max at the given temperature).
    """
    n = workload.n
    jac = jacobian_implicit(params)
    inv = jac.inverse
    c = toeplitz_coeffs(params, n)
    sens = float(np.sqrt(c @ c))
    g_sens = (c @ _coeff_jacobian(params.alpha, params.lam, n)) / sens
    c_inv = toeplitz_coeffs(inv, n)
    val, g_cinv = _row_objective(c_inv, workload, objective, temperature)
    g_inv = g_cinv @ _coeff_jacobian(inv.alpha_hat, inv.lambda_hat, n)
    grad = sens * (g_inv @ jac.matrix) + val * g_sens
    return sens * val, grad


def loss_gradient(params: BltParams, workload: WorkloadSpec, objective: str = "max",
                  temperature: float = 0.1) -> np.ndarray:
    return loss_and_gradient(params, workload, objective, temperature)[1]


def loss_value(params: BltParams, workload: WorkloadSpec, objective: str = "max",
               temperature: float = 0.1) -> float:
    """The objective without derivatives, from the inverse parameters."""
    n = workload.n
    c = toeplitz_coeffs(params, n)
    c_inv = toeplitz_coeffs(invert_params(params), n)
    val, _ = _row_objective(c_inv, workload, objective, temperature)
    return float(np.sqrt(c @ c) * val)
