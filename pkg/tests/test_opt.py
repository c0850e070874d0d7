import json

import numpy as np
import pytest

from bltinv import blt, opt
from bltinv.blt import BltParams
from bltinv.errors import InitInvalid, NonFinite
from bltinv.opt import OptConfig
from bltinv.poly import Regime


def test_zero_steps_returns_init(lt1_pair):
    best, inv, trace = opt.optimize(OptConfig(d=2, n=16, steps=0, init=lt1_pair))
    assert best is lt1_pair
    assert len(trace.records) == 1 and trace.best_step == 0
    assert np.allclose(inv.lambda_hat, blt.invert_params(lt1_pair).lambda_hat)


def test_single_channel_two_steps_converges():
    best, _, trace = opt.optimize(OptConfig(d=1, n=2, steps=600))
    assert trace.best_grad_norm <= 1e-6
    assert trace.best_loss <= 1.25


def test_deterministic_per_seed():
    cfg = OptConfig(d=2, n=32, steps=40, seed=5)
    a = opt.optimize(cfg)[2].to_jsonl()
    assert a == opt.optimize(cfg)[2].to_jsonl()
    assert a != opt.optimize(OptConfig(d=2, n=32, steps=40, seed=6))[2].to_jsonl()


def test_iterates_stay_strict_lt1():
    _, _, trace = opt.optimize(OptConfig(d=3, n=64, steps=150, seed=1))
    for rec in trace.records:
        p = BltParams(rec["alpha"], rec["lambda"])
        rep = blt.validate(p, "strict")
        assert rep.valid and rep.regime is Regime.LT1


def test_loss_decreases():
    _, _, trace = opt.optimize(OptConfig(d=2, n=128, steps=200, seed=2))
    assert trace.best_loss < trace.losses[0]


def test_larger_degree_no_worse():
    l1 = opt.optimize(OptConfig(d=1, n=64, steps=600))[2].best_loss
    l2 = opt.optimize(OptConfig(d=2, n=64, steps=600))[2].best_loss
    assert l2 <= 1.02 * l1


def test_other_objectives_and_methods():
    for kw in ({"objective": "frobenius"}, {"objective": "softmax", "temperature": 0.05},
               {"method": "adam", "learning_rate": 0.01}, {"coords": "raw", "learning_rate": 1e-4}):
        _, _, trace = opt.optimize(OptConfig(d=2, n=32, steps=60, **kw))
        assert trace.best_loss <= trace.losses[0]


def test_invalid_configs(gt1_pair):
    with pytest.raises(InitInvalid):
        OptConfig(d=0, n=4)
    with pytest.raises(InitInvalid):
        OptConfig(d=1, n=4, objective="median")
    with pytest.raises(InitInvalid):
        OptConfig(d=1, n=4, learning_rate=0.0)
    with pytest.raises(InitInvalid):
        opt.optimize(OptConfig(d=2, n=4, init=gt1_pair))
    with pytest.raises(InitInvalid):
        opt.optimize(OptConfig(d=3, n=4, init=BltParams([0.1, 0.1], [0.8, 0.4])))


def test_non_finite_aborts(monkeypatch, lt1_pair):
    monkeypatch.setattr(opt, "loss_and_gradient", lambda *a, **k: (np.nan, np.zeros(4)))
    with pytest.raises(NonFinite) as err:
        opt.optimize(OptConfig(d=2, n=8, steps=5, init=lt1_pair))
    assert err.value.trace.records == []


def test_default_init_is_feasible():
    for d in range(1, 9):
        for n in (2, 64, 1024):
            assert opt.feasible(opt.default_init(d, n))
            assert opt.feasible(opt.default_init(d, n, np.random.default_rng(d)))


def test_barrier_gradient(lt1_pair):
    _, g = opt.barrier(lt1_pair)
    theta = np.concatenate([lt1_pair.alpha, lt1_pair.lam])
    fd = np.empty(4)
    for k in range(4):
        e = np.eye(4)[k] * 1e-7
        hi, lo = theta + e, theta - e
        fd[k] = (opt.barrier(BltParams(hi[:2], hi[2:]))[0] - opt.barrier(BltParams(lo[:2], lo[2:]))[0]) / 2e-7
    assert np.allclose(g, fd, rtol=1e-6)


def test_trace_jsonl():
    _, _, trace = opt.optimize(OptConfig(d=1, n=8, steps=10, record_every=3))
    lines = trace.to_jsonl().splitlines()
    assert [json.loads(x)["step"] for x in lines] == [0, 3, 6, 9, 10]
