"""First-order optimization of BLT parameters for the max or Frobenius loss.

Iterates stay strictly inside the region where every scale is positive,
the scales sum below 1, decays are distinct in (0, 1) and
``sum(alpha / lambda) < 1`` (so the inverse decays interlace).  A log
barrier with geometrically decaying weight keeps them away from the
boundary, and any step that would still leave the region is shortened.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .blt import BltParams, InverseBltParams, invert_params, validate
from .diff import loss_and_gradient
from .errors import InitInvalid, InversionFailure, NonFinite
from .loss import WorkloadSpec
from .poly import EPS_DEG, Regime

OBJECTIVES = ("max", "frobenius", "softmax")


@dataclass(frozen=True)
class OptConfig:
    d: int
    n: int
    objective: str = "max"
    temperature: float = 0.05
    barrier_weight: float = 1e-3
    barrier_decay: float = 0.97
    steps: int = 500
    learning_rate: float = 0.02
    momentum: float = 0.9
    method: str = "momentum"
    coords: str = "log"
    seed: int = 0
    init: str | BltParams = "random"
    workload: WorkloadSpec | None = None
    record_every: int = 1
    max_backtracks: int = 60

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise InitInvalid("d and n must be positive")
        if self.objective not in OBJECTIVES:
            raise InitInvalid(f"objective must be one of {OBJECTIVES}")
        if self.objective == "softmax" and not self.temperature > 0:
            raise InitInvalid("softmax temperature must be positive")
        if not (self.barrier_weight >= 0 and 0 < self.barrier_decay <= 1):
            raise InitInvalid("barrier weight must be >= 0 and its decay in (0, 1]")
        if self.steps < 0 or not self.learning_rate > 0 or not 0 <= self.momentum < 1:
            raise InitInvalid("need steps >= 0, learning_rate > 0, momentum in [0, 1)")
        if self.method not in ("momentum", "adam"):
            raise InitInvalid("method must be 'momentum' or 'adam'")
        if self.workload is not None and self.workload.n != self.n:
            raise InitInvalid(f"workload size {self.workload.n} differs from n={self.n}")
        if self.coords not in ("log", "raw"):
            raise InitInvalid("coords must be 'log' or 'raw'")
        if self.record_every < 1:
            raise InitInvalid("record_every must be >= 1")

    def workload_spec(self) -> WorkloadSpec:
        return self.workload if self.workload is not None else WorkloadSpec.prefix_sum(self.n)


@dataclass
class OptTrace:
    records: list[dict] = field(default_factory=list)
    best_step: int = 0
    best_loss: float = float("inf")
    best_grad_norm: float = float("nan")

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r) for r in self.records)

    @property
    def losses(self) -> np.ndarray:
        return np.array([r["loss"] for r in self.records])


def default_init(d: int, n: int, rng: np.random.Generator | None = None) -> BltParams:
    """Decays spread geometrically in 1 - lambda from 1/n up to 1/2; half the LT1 budget on scales.

    With ``rng`` the spacing and scales are jittered.
    """
    lo = np.log(1.0 / max(n, 4))
    u = np.linspace(lo, np.log(0.5), d) if d > 1 else np.array([lo])
    w = np.full(d, 0.5 / d)
    if rng is not None:
        step = (np.log(0.5) - lo) / max(d - 1, 1)
        u = u + rng.uniform(-0.25, 0.25, size=d) * step
        u = np.clip(np.sort(u), lo, np.log(0.5))
        w = w * rng.uniform(0.7, 1.3, size=d)
    lam = 1.0 - np.exp(u)
    return BltParams(w * lam, lam)


def feasible(params: BltParams) -> bool:
    """Strictly inside the LT1 region, with an inverse whose decays separate from the inputs."""
    rep = validate(params, "strict")
    if not (rep.valid and rep.regime is Regime.LT1 and float(np.sum(params.alpha / params.lam)) < 1.0 - EPS_DEG):
        return False
    try:
        invert_params(params)
    except InversionFailure:
        # a vanishing scale pins an inverse decay onto its input decay
        return False
    return True


def barrier(params: BltParams) -> tuple[float, np.ndarray]:
    """-(sum log of every constraint slack) and its gradient in (alpha, lambda)."""
    a, l = params.alpha, params.lam
    d = a.size
    s_a = 1.0 - a.sum()
    ratio = a / l
    s_r = 1.0 - ratio.sum()
    diff = l[:, None] - l[None, :]
    iu = np.triu_indices(d, 1)
    val = -(np.log(a).sum() + np.log(l).sum() + np.log1p(-l).sum() + np.log(s_a) + np.log(s_r)
            + np.log(np.abs(diff[iu])).sum())
    ga = -1.0 / a + 1.0 / s_a + (1.0 / l) / s_r
    off = np.where(np.eye(d, dtype=bool), np.inf, diff)
    gl = -1.0 / l + 1.0 / (1.0 - l) - (a / l**2) / s_r - np.sum(1.0 / off, axis=1)
    return float(val), np.concatenate([ga, gl])


def _to_coords(p: BltParams, coords: str) -> np.ndarray:
    if coords == "raw":
        return np.concatenate([p.alpha, p.lam])
    return np.concatenate([np.log(p.alpha), -np.log1p(-p.lam)])


def _from_coords(u: np.ndarray, d: int, coords: str) -> BltParams:
    if coords == "raw":
        return BltParams(u[:d], u[d:])
    return BltParams(np.exp(u[:d]), -np.expm1(-u[d:]))


def _coord_scale(p: BltParams, coords: str) -> np.ndarray:
    """d(alpha, lambda) / d(coordinates), diagonal."""
    if coords == "raw":
        return np.ones(2 * p.d)
    return np.concatenate([p.alpha, 1.0 - p.lam])


def optimize(cfg: OptConfig) -> tuple[BltParams, InverseBltParams, OptTrace]:
    rng = np.random.default_rng(cfg.seed)
    if isinstance(cfg.init, BltParams):
        start = cfg.init
        if start.d != cfg.d:
            raise InitInvalid(f"initial parameters have degree {start.d}, config says {cfg.d}")
    elif cfg.init == "random":
        start = default_init(cfg.d, cfg.n, rng)
    elif cfg.init == "default":
        start = default_init(cfg.d, cfg.n)
    else:
        raise InitInvalid(f"unknown init {cfg.init!r}")
    if not feasible(start):
        raise InitInvalid(f"initial parameters are not strictly inside the LT1 region: {start!r}")

    wl = cfg.workload_spec()
    d = cfg.d
    theta = _to_coords(start, cfg.coords)
    vel = np.zeros_like(theta)
    sq = np.zeros_like(theta)
    trace = OptTrace()
    best = start
    weight = cfg.barrier_weight

    for step in range(cfg.steps + 1):
        p = start if step == 0 else _from_coords(theta, d, cfg.coords)
        loss, grad = loss_and_gradient(p, wl, cfg.objective, cfg.temperature)
        bval, bgrad = barrier(p)
        gnorm = float(np.linalg.norm(grad))
        if not (np.isfinite(loss) and np.all(np.isfinite(grad)) and np.isfinite(bval)):
            raise NonFinite(f"objective or gradient is not finite at step {step}: {p!r}", trace)
        if step % cfg.record_every == 0 or step == cfg.steps:
            trace.records.append({"step": step, "loss": loss, "barrier": bval, "barrier_weight": weight,
                                  "grad_norm": gnorm, "alpha": p.alpha.tolist(), "lambda": p.lam.tolist()})
        if loss < trace.best_loss:
            best, trace.best_loss, trace.best_step, trace.best_grad_norm = p, loss, step, gnorm
        if step == cfg.steps:
            break

        g = (grad + weight * bgrad) * _coord_scale(p, cfg.coords)
        if cfg.method == "adam":
            vel = cfg.momentum * vel + (1 - cfg.momentum) * g
            sq = 0.999 * sq + 0.001 * g * g
            mhat = vel / (1 - cfg.momentum ** (step + 1))
            vhat = sq / (1 - 0.999 ** (step + 1))
            move = -cfg.learning_rate * mhat / (np.sqrt(vhat) + 1e-12)
        else:
            vel = cfg.momentum * vel - cfg.learning_rate * g
            move = vel
        # shorten the step until the new point is strictly feasible
        for _ in range(cfg.max_backtracks):
            cand = theta + move
            if feasible(_from_coords(cand, d, cfg.coords)):
                theta = cand
                if cfg.method == "momentum":
                    vel = move
                break
            move = 0.5 * move
        else:
            vel = np.zeros_like(theta)
        weight *= cfg.barrier_decay

    return best, invert_params(best), trace
