"""Exact inversion, streaming, and optimization of buffered linear Toeplitz (BLT) matrices."""

from .blt import (
    BltParams,
    InverseBltParams,
    LegacyUWV,
    ValidationReport,
    from_interlaced,
    invert_inverse,
    invert_params,
    legacy_uwv,
    materialize,
    materialize_inverse,
    regime_of,
    scales_from_decays,
    toeplitz_coeffs,
    validate,
)
from .diff import InversionJacobian, jacobian_fd, jacobian_implicit, loss_gradient
from .errors import BltError
from .genfun import RationalGF, genfun_of, maclaurin, reciprocal, series_product_check
from .loss import LossReport, WorkloadSpec, frobenius_loss, max_loss, sensitivity
from .opt import OptConfig, OptTrace, optimize
from .poly import Polynomial, Regime, RootSet
from .stream import NoiseConfig, StreamState, noise_rows, step_multiply, step_solve

__all__ = [
    "BltError", "BltParams", "InverseBltParams", "InversionJacobian", "LegacyUWV", "LossReport",
    "NoiseConfig", "OptConfig", "OptTrace", "Polynomial", "RationalGF", "Regime", "RootSet",
    "StreamState", "ValidationReport", "WorkloadSpec", "from_interlaced", "frobenius_loss",
    "genfun_of", "invert_inverse", "invert_params", "jacobian_fd", "jacobian_implicit", "legacy_uwv", "loss_gradient",
    "maclaurin", "materialize", "materialize_inverse", "max_loss", "noise_rows", "optimize",
    "reciprocal", "regime_of", "scales_from_decays", "sensitivity", "series_product_check",
    "step_multiply", "step_solve", "toeplitz_coeffs", "validate",
]
