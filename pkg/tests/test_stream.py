import time

import numpy as np
import pytest

from bltinv import blt, stream
from bltinv.blt import BltParams, InverseBltParams
from bltinv.errors import DimensionMismatch
from bltinv.stream import NoiseConfig, StreamState


def test_multiply_ones(example):
    st = StreamState(example)
    assert np.allclose([stream.step_multiply(st, [1.0])[0] for _ in range(3)], [1, 1.6, 2.0], atol=1e-15)


def test_multiply_impulse_gives_column(lt1_pair):
    y = stream.multiply(lt1_pair, np.eye(20)[:, :1])
    assert np.allclose(y[:, 0], blt.toeplitz_coeffs(lt1_pair, 20), atol=1e-15)


def test_zero_scales_pass_through():
    p = BltParams([0.0, 0.0], [0.7, 0.2])
    x = np.random.default_rng(0).normal(size=(10, 3))
    assert np.array_equal(stream.multiply(p, x), x)
    assert np.array_equal(stream.solve(p, x), x)


def test_solve_impulse(example):
    x = stream.solve(example, np.eye(4)[:, :1])
    assert np.allclose(x[:, 0], [1, -0.6, -0.04, -0.024], atol=1e-15)


def test_round_trip():
    rng = np.random.default_rng(3)
    lam = np.sort(rng.uniform(0.1, 0.95, 6))[::-1]
    p = BltParams(0.5 * lam / 6, lam)
    x = rng.normal(size=(1000, 2))
    assert np.max(np.abs(stream.solve(p, stream.multiply(p, x)) - x)) <= 1e-10


def test_solve_equals_multiply_by_inverse(draws):
    rng = np.random.default_rng(4)
    for p in draws[:50]:
        y = rng.normal(size=(1000, 1))
        a = stream.solve(p, y)
        b = stream.multiply(blt.invert_params(p), y)
        assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.abs(a).max())


@pytest.mark.parametrize("t", [1, 2, 10, 100])
def test_buffers_hold_discounted_history(lt1_pair, t):
    rng = np.random.default_rng(t)
    x = rng.normal(size=(t, 3))
    st = StreamState(lt1_pair, 3)
    for row in x:
        stream.step_multiply(st, row)
    for i, lam in enumerate(lt1_pair.lam):
        direct = sum(lam ** (t - 1 - k) * x[k] for k in range(t))
        assert np.allclose(st.buffers[i], direct, rtol=0, atol=1e-12)
    assert st.t == t + 1


def test_buffers_start_empty(lt1_pair):
    st = StreamState(lt1_pair, 4)
    assert st.t == 1 and not st.buffers.any()


def test_width_checked(lt1_pair):
    st = StreamState(lt1_pair, 2)
    with pytest.raises(DimensionMismatch):
        stream.step_multiply(st, [1.0, 2.0, 3.0])
    with pytest.raises(DimensionMismatch):
        stream.step_solve(st, 1.0)


def test_streaming_matches_dense(draws):
    n, m = 512, 4
    z = np.random.default_rng(5).normal(size=(n, m))
    for p in draws[:40]:
        inv = blt.invert_params(p)
        rows = np.array(list(stream.noise_rows(inv, NoiseConfig(sigma=1.0, m=m), n, z_source=z)))
        dense = blt.materialize_inverse(p, n) @ z
        assert np.max(np.abs(rows - dense)) <= 1e-8


def test_noise_deterministic(lt1_pair):
    inv = blt.invert_params(lt1_pair)
    cfg = NoiseConfig(sigma=1.3, seed=42, m=3)
    a = np.array(list(stream.noise_rows(inv, cfg, 50)))
    b = np.array(list(stream.noise_rows(inv, cfg, 50)))
    assert np.array_equal(a, b)
    c = np.array(list(stream.noise_rows(inv, NoiseConfig(sigma=1.3, seed=43, m=3), 50)))
    assert not np.array_equal(a, c)


def test_zero_sigma_gives_zero_rows(lt1_pair):
    rows = list(stream.noise_rows(blt.invert_params(lt1_pair), NoiseConfig(sigma=0.0, m=2), 20))
    assert not np.any(rows)


def test_impulse_rows_single_channel():
    inv = InverseBltParams([-0.5], [0.3], "LT1")
    rows = list(stream.noise_rows(inv, NoiseConfig(sigma=1.0), 5, z_source=lambda t: [1.0 if t == 0 else 0.0]))
    assert np.allclose(np.ravel(rows), [1, -0.5, -0.15, -0.045, -0.0135], atol=1e-15)


def test_gaussian_scale():
    cfg = NoiseConfig(sigma=0.7, sensitivity=1.9, seed=11)
    z = cfg.scale * stream.GaussianStream(cfg.seed).normals(1_000_000)
    assert abs(z.std() / (0.7 * 1.9) - 1) <= 0.01
    assert abs(z.mean()) <= 0.01


def test_gaussian_odd_width():
    g = stream.GaussianStream(0)
    assert g.normals(3).shape == (3,)


def test_rho_calibration():
    assert NoiseConfig(rho=0.5).sigma == pytest.approx(1.0)
    assert NoiseConfig(rho=2.0).sigma == pytest.approx(0.5)
    with pytest.raises(ValueError):
        NoiseConfig(sigma=3.0, rho=0.5)
    with pytest.raises(ValueError):
        NoiseConfig()
    with pytest.raises(ValueError):
        NoiseConfig(sigma=-1.0)


def test_dump_round_trip(tmp_path, lt1_pair):
    rows = np.array(list(stream.noise_rows(blt.invert_params(lt1_pair), NoiseConfig(sigma=1.0, m=3), 17)))
    path = tmp_path / "rows.bin"
    assert stream.write_rows(path, rows) == (17, 3)
    raw = path.read_bytes()
    assert raw[:4] == b"BLTN" and len(raw) == 16 + 17 * 3 * 8
    assert np.array_equal(stream.read_rows(path), rows)


def test_dump_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"XXXX" + bytes(12))
    with pytest.raises(ValueError):
        stream.read_rows(path)


def _per_step(params, n, m=4):
    st = StreamState(params, m)
    x = np.ones(m)
    t0 = time.perf_counter()
    for _ in range(n):
        stream.step_multiply(st, x)
    return (time.perf_counter() - t0) / n


@pytest.mark.slow
def test_per_step_time_is_flat(draws):
    p = max(draws, key=lambda q: q.d)
    _per_step(p, 1000)  # warm up
    small = min(_per_step(p, 1000) for _ in range(3))
    large = _per_step(p, 100_000)
    assert large / small < 2.0
