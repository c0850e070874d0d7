import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bltinv import blt, genfun, loss, stream
from bltinv.blt import BltParams
from bltinv.poly import Regime
from bltinv.sampling import random_params

seeds = st.integers(0, 2**32 - 1)
degrees = st.integers(1, 8)
regimes = st.sampled_from([Regime.LT1, Regime.GT1])
unit = st.floats(0.02, 0.98)


@st.composite
def params(draw, regime=None):
    rng = np.random.default_rng(draw(seeds))
    return random_params(rng, draw(degrees), draw(regimes) if regime is None else regime)


@settings(max_examples=60, deadline=None)
@given(params(), st.sampled_from([1, 2, 7, 64, 512]))
def test_inverse_product_is_identity(p, n):
    inv = blt.invert_params(p)
    unit_series = np.eye(n)[0]
    dev = genfun.series_product_check(blt.toeplitz_coeffs(p, n), blt.toeplitz_coeffs(inv, n), unit_series)
    assert dev <= 1e-10


@settings(max_examples=60, deadline=None)
@given(params())
def test_scales_negative_and_sum(p):
    inv = blt.invert_params(p)
    assert np.all(inv.alpha_hat < 0)
    assert abs(inv.alpha_hat.sum() + p.alpha.sum()) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(params(Regime.LT1))
def test_lt1_interlacing(p):
    inv = blt.invert_params(p)
    c = p.canonical()
    chain = np.empty(2 * p.d + 2)
    chain[0], chain[1:-1:2], chain[2:-1:2], chain[-1] = 1.0, c.lam, inv.lambda_hat, 0.0
    assert np.all(np.diff(chain) < 0)


@settings(max_examples=60, deadline=None)
@given(unit, unit)
def test_single_channel_closed_form(a, lam):
    assume(a < lam - 1e-6 or a > lam + 1e-6)
    p = BltParams([a], [lam])
    inv = blt.invert_params(p)
    assert np.allclose(inv.alpha_hat, [-a], rtol=1e-12)
    assert np.allclose(inv.lambda_hat, [lam - a], rtol=1e-10, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(params(), st.integers(1, 64))
def test_streaming_round_trip(p, n):
    x = np.random.default_rng(n).normal(size=(n, 2))
    assert np.max(np.abs(stream.solve(p, stream.multiply(p, x)) - x)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(params(), st.integers(1, 200))
def test_frobenius_never_exceeds_max(p, n):
    rep = loss.max_loss(p, loss.WorkloadSpec.prefix_sum(n))
    assert rep.frobenius_loss <= rep.loss * (1 + 1e-14)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=40))
def test_series_product_with_unit_is_identity(a):
    a = np.array(a)
    assert genfun.series_product_check(a, np.eye(a.size)[0], a) == 0.0


@settings(max_examples=40, deadline=None)
@given(params(Regime.LT1))
def test_from_interlaced_round_trip(p):
    inv = blt.invert_params(p)
    back, _ = blt.from_interlaced(p.lam, inv.lambda_hat)
    assert np.allclose(back.alpha, p.canonical().alpha, rtol=0, atol=1e-8)
