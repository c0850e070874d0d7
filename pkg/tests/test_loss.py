import numpy as np
import pytest

from bltinv import blt, loss
from bltinv.blt import BltParams
from bltinv.errors import DimensionMismatch, SingularWorkload
from bltinv.loss import WorkloadSpec

IDENTITY = BltParams([0.0], [0.5])


def test_sensitivity_examples(example):
    assert loss.sensitivity(example, 3) == pytest.approx(np.sqrt(1.52), abs=1e-15)
    for n in (1, 5, 100):
        assert loss.sensitivity(IDENTITY, n) == 1.0


def test_sensitivity_is_largest_column(draws):
    for p in draws:
        cols = np.linalg.norm(blt.materialize(p, 64), axis=0)
        assert loss.sensitivity(p, 64) == pytest.approx(cols.max(), rel=1e-14)
        assert np.argmax(cols) == 0


def test_identity_prefix_losses():
    wl = WorkloadSpec.prefix_sum(2)
    rep = loss.max_loss(IDENTITY, wl)
    assert rep.sensitivity == 1.0
    assert rep.loss == pytest.approx(np.sqrt(2), abs=1e-12)
    assert loss.frobenius_loss(IDENTITY, wl) == pytest.approx(np.sqrt(1.5), abs=1e-12)


def test_single_channel_hand_value():
    rep = loss.max_loss(BltParams([0.5], [0.8]), WorkloadSpec.prefix_sum(2), keep_rows=True)
    assert rep.sensitivity == pytest.approx(np.sqrt(1.25), abs=1e-15)
    assert rep.loss == pytest.approx(1.25, abs=1e-10)
    assert np.allclose(rep.per_row_norms, [1.0, np.sqrt(1.25)])


def test_one_by_one(example):
    rep = loss.max_loss(example, WorkloadSpec.prefix_sum(1))
    assert rep.loss == 1.0 and rep.frobenius_loss == 1.0


def test_frobenius_below_max(draws):
    for p in draws[:60]:
        rep = loss.max_loss(p, WorkloadSpec.prefix_sum(128))
        assert rep.frobenius_loss <= rep.loss * (1 + 1e-15)
        assert rep.loss == pytest.approx(rep.sensitivity * rep.max_row_norm)


def test_permutation_invariance(draws):
    wl = WorkloadSpec.prefix_sum(64)
    rng = np.random.default_rng(0)
    for p in draws[:40]:
        perm = rng.permutation(p.d)
        q = BltParams(p.alpha[perm], p.lam[perm])
        assert loss.max_loss(q, wl).loss == pytest.approx(loss.max_loss(p, wl).loss, rel=1e-12)


@pytest.mark.parametrize("n", [1, 7, 64, 512])
def test_streaming_rows_match_dense_prefix(draws, n):
    wl = WorkloadSpec.prefix_sum(n)
    for p in draws[:20]:
        dense = np.linalg.norm(wl.dense() @ blt.materialize_inverse(p, n), axis=1)
        rep = loss.max_loss(p, wl, keep_rows=True)
        assert np.max(np.abs(rep.per_row_norms - dense)) <= 1e-9


def test_streaming_rows_match_dense_explicit(draws):
    n = 200
    a = np.tril(np.random.default_rng(1).uniform(0.5, 1.5, (n, n)))
    wl = WorkloadSpec.explicit(a)
    for p in draws[:10]:
        dense_b = a @ blt.materialize_inverse(p, n)
        rows = list(loss.b_rows(loss.inverse_column(p, n), wl))
        for t in (0, 1, 57, n - 1):
            assert np.allclose(rows[t], dense_b[t, : t + 1], rtol=0, atol=1e-9)
        got = loss.max_loss(p, wl, keep_rows=True).per_row_norms
        assert np.max(np.abs(got - np.linalg.norm(dense_b, axis=1))) <= 1e-9


def test_explicit_prefix_equals_prefix(lt1_pair):
    n = 50
    a = loss.max_loss(lt1_pair, WorkloadSpec.prefix_sum(n))
    b = loss.max_loss(lt1_pair, WorkloadSpec.explicit(np.tril(np.ones((n, n)))))
    assert a.loss == pytest.approx(b.loss, rel=1e-13)


def test_workload_validation():
    with pytest.raises(SingularWorkload):
        WorkloadSpec.explicit([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(SingularWorkload):
        WorkloadSpec.explicit([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(DimensionMismatch):
        WorkloadSpec.explicit(np.ones((2, 3)))


def test_report_json():
    rep = loss.max_loss(IDENTITY, WorkloadSpec.prefix_sum(3), keep_rows=True)
    assert '"loss"' in rep.to_json()
    assert len(rep.to_dict(rows=True)["per_row_norms"]) == 3


def test_loss_growth_in_n(draws, capsys):
    # diagnostic only: reports any decrease of the loss as n doubles
    ns = [2**k for k in range(1, 10)]
    drops = 0
    for p in draws[:30]:
        vals = [loss.max_loss(p, WorkloadSpec.prefix_sum(n)).loss for n in ns]
        drops += int(np.any(np.diff(vals) < 0))
    with capsys.disabled():
        print(f"\nloss decreased somewhere in n for {drops}/30 draws")
