"""Random strict-valid BLT parameters in a chosen regime.

Decays are drawn directly and scales are set so that ``sum(alpha/lambda)``
hits a target ratio; nothing here uses the inversion code, so draws are
safe to use as test inputs for it.
"""

from dataclasses import dataclass

import numpy as np

from .blt import BltParams
from .poly import Regime


@dataclass(frozen=True)
class DrawFamily:
    """Ranges for random draws.

    Decays are uniform in ``log(1 - lambda)`` over ``[lam_lo, lam_hi]`` with
    neighbouring values at least ``log_gap`` apart in that coordinate, so
    decays crowd towards 1 the way optimized BLTs do.  ``ratio`` bounds the
    target ``sum(alpha / lambda)`` for LT1 draws and ``gt_ratio_lo`` is the
    lower bound for GT1 draws (the upper bound comes from ``sum(alpha) < 1``).
    """

    lam_lo: float = 0.05
    lam_hi: float = 0.995
    log_gap: float = 0.05
    ratio: tuple[float, float] = (0.02, 0.98)
    gt_ratio_lo: float = 1.02
    max_alpha_sum: float = 0.98


# decays well inside (0, 1): expanded polynomial coefficients stay accurate enough
# for root finders that work from them
DEFAULT_FAMILY = DrawFamily(lam_lo=0.1, lam_hi=0.9, log_gap=0.1)
# decays crowding towards 1 as in optimized mechanisms
STRESS_FAMILY = DrawFamily(lam_lo=0.05, lam_hi=0.995, log_gap=0.05)


def random_decays(rng: np.random.Generator, d: int, family: DrawFamily = DEFAULT_FAMILY) -> np.ndarray:
    """d decays, strictly descending, with the family's minimum spacing in ``log(1 - lambda)``."""
    a, b = np.log(1 - family.lam_hi), np.log(1 - family.lam_lo)
    slack = (b - a) - family.log_gap * (d - 1)
    if slack <= 0:
        raise ValueError(f"cannot fit {d} decays with log gap {family.log_gap}")
    # sorted uniforms plus fixed offsets: uniform over the admissible configurations
    u = a + np.sort(rng.uniform(0, slack, size=d)) + family.log_gap * np.arange(d)
    return 1.0 - np.exp(u)


def random_params(rng: np.random.Generator, d: int, regime: Regime = Regime.LT1,
                  family: DrawFamily = DEFAULT_FAMILY) -> BltParams:
    """Strict-valid parameters whose ratio sum lands in the requested regime.

    EQ1 draws hit ``sum(alpha/lambda) == 1`` up to rounding.  GT1 needs
    ``d >= 2``-like room: decays are redrawn until ``sum(alpha) < 1`` leaves
    space above ratio 1.
    """
    regime = Regime(regime)
    lo_r, hi_r = family.ratio
    for _ in range(10_000):
        lam = random_decays(rng, d, family)
        w = rng.dirichlet(np.ones(d))
        # alpha = s * w * lam gives sum(alpha/lam) = s and sum(alpha) = s * (w @ lam)
        cap = family.max_alpha_sum / float(w @ lam)
        if regime is Regime.LT1:
            s = rng.uniform(lo_r, hi_r)
        elif regime is Regime.EQ1:
            s = 1.0
        else:
            if cap <= family.gt_ratio_lo * 1.01:
                continue
            s = rng.uniform(family.gt_ratio_lo, cap)
        alpha = s * w * lam
        if regime is Regime.EQ1:
            alpha = alpha / np.sum(alpha / lam)
        if np.sum(alpha) < 1.0 and np.all(alpha > 0):
            return BltParams(alpha, lam)
    raise RuntimeError(f"could not draw {regime.value} parameters of degree {d}")


def mixed_draws(rng: np.random.Generator, count: int, max_d: int = 8,
                family: DrawFamily = DEFAULT_FAMILY, regimes=(Regime.LT1, Regime.GT1)):
    """``count`` draws with degree uniform on 1..max_d, cycling through ``regimes``."""
    out = []
    for k in range(count):
        d = int(rng.integers(1, max_d + 1))
        out.append(random_params(rng, d, regimes[k % len(regimes)], family))
    return out
