import io
import math

import numpy as np
import pytest
from scipy import stats

import oracles
from extremal_gamma.errors import DomainError, ResourceError, UsageError
from extremal_gamma.family import ShapeFamily
from extremal_gamma.limits import Gumbel, Uniform01
from extremal_gamma.norming import LINEAR, NormingConstants, SolverDiag, Transform, dirichlet_norming, gamma_norming
from extremal_gamma.sampling import (
    BUDGET_ENV,
    DirichletMaxSample,
    LogSample,
    RngStream,
    dirichlet_logs,
    normalized_statistic,
    sample_dirichlet_max,
    sample_gamma_log,
    sample_row_max_log,
    simulate_batch,
    simulate_raw,
    write_batch_csv,
)
from extremal_gamma.verify import ks_statistic


def _norming(transform, c=1.0, d=0.0, model="gamma", n=10, alpha=1.0, beta=math.nan):
    return NormingConstants(c, d, transform, Uniform01(), SolverDiag(), model=model, n=n, alpha_n=alpha, beta_n=beta)


def test_stream_is_reproducible():
    a = RngStream(7, 3).generator().random(5)
    b = RngStream(7, 3).generator().random(5)
    c = RngStream(7, 4).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("seed, stream", [(-1, 0), (0, 2**64), (1.5, 0)])
def test_stream_rejects_bad_keys(seed, stream):
    with pytest.raises(DomainError):
        RngStream(seed, stream)


def test_exponential_mean():
    x = np.exp(sample_gamma_log(1.0, RngStream(1), size=10**6))
    assert abs(x.mean() - 1.0) < 4e-3


def test_small_shape_power_moment():
    a = 0.01
    v = np.exp(a * sample_gamma_log(a, RngStream(2), size=10**6))
    target = math.exp(math.lgamma(2 * a) - math.lgamma(a))
    se = v.std(ddof=1) / math.sqrt(v.size)
    assert abs(v.mean() - target) < 4 * se


def test_tiny_shape_stays_finite():
    logs = sample_gamma_log(1e-10, RngStream(3), size=1000)
    assert np.all(np.isfinite(logs))
    assert np.all(logs < 0)
    assert np.median(logs) < -1e9


@pytest.mark.parametrize("a", [0.0, -1.0, math.nan])
def test_gamma_shape_validated(a):
    with pytest.raises(DomainError):
        sample_gamma_log(a, RngStream(0))


@pytest.mark.slow
@pytest.mark.parametrize("a", [0.5, 0.1, 0.01])
def test_boost_matches_inverse_cdf(a):
    # Two-sample KS against an independent inverse-CDF sampler, repeated.
    trials, size = 100, 10**4
    rejections = 0
    for t in range(trials):
        boosted = sample_gamma_log(a, RngStream(100 + t, 0), size=size)
        reference = oracles.gamma_inverse_cdf_logs(a, size, np.random.default_rng([t, 99]))
        if stats.ks_2samp(boosted, reference).pvalue < 0.01:
            rejections += 1
    assert rejections < 0.05 * trials


def test_small_shape_power_is_uniform():
    delta = 1e-3
    u = np.exp(delta * sample_gamma_log(delta, RngStream(4), size=10**5))
    assert ks_statistic(u, Uniform01()) < 0.02


def test_row_max_of_one_is_a_single_draw():
    assert sample_row_max_log(1, 2.5, RngStream(5, 1)).log_value == sample_gamma_log(2.5, RngStream(5, 1), size=1)[0]


def test_row_max_exponential_is_gumbel():
    n = 10**4
    values = simulate_batch("gamma", ShapeFamily(1, 0, 0), None, n, 10**4, seed=6, workers=4)
    assert ks_statistic(values, Gumbel()) < 0.05


def test_row_max_power_in_unit_interval():
    for r in range(200):
        s = sample_row_max_log(100, 1e-4, RngStream(7, r))
        assert 0 < math.exp(100 * 1e-4 * s.log_value) < 1


def test_dirichlet_single_coordinate_is_uniform():
    gen = RngStream(8).generator()
    draws = np.array([math.exp(sample_dirichlet_max(1, 1.0, 1.0, gen).log_max) for _ in range(10**5)])
    se = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - 0.5) < 3 * se


@pytest.mark.parametrize("n, a, b", [(50, 1.0, 1.0), (1000, 1e-6, 3.0), (1000, 1e-6, 1e-3), (20, 40.0, 1e3)])
def test_dirichlet_simplex(n, a, b):
    for r in range(50):
        stream = RngStream(9, r)
        sample = sample_dirichlet_max(n, a, b, stream)
        assert sample.log_max <= 0
        assert math.isfinite(sample.log_t_n)
        assert sample.t_n == math.exp(sample.log_t_n)
        logs, log_z = dirichlet_logs(n, a, b, RngStream(9, r))
        total = np.logaddexp(np.logaddexp.reduce(logs - sample.log_sum), log_z - sample.log_sum)
        assert abs(math.expm1(total)) < 1e-12


def test_argmax_index_uniform():
    n, reps = 10, 10**5
    gen = RngStream(10).generator()
    idx = np.argmax(sample_gamma_log(0.5, gen, size=(reps, n)), axis=1)
    counts = np.bincount(idx, minlength=n)
    assert stats.chisquare(counts).pvalue > 0.01


def test_normalized_linear_identity():
    s = LogSample(math.log(3.25))
    assert normalized_statistic(s, _norming(LINEAR)) == pytest.approx(3.25, rel=1e-15)


def test_normalized_power():
    s = LogSample(-400.0)
    value = normalized_statistic(s, _norming(Transform("power", exponent=0.01)))
    assert value == pytest.approx(math.exp(-4.0), rel=1e-14)


def test_normalized_power_scaled():
    nc = _norming(Transform("power_scaled", exponent=0.5, sigma=4.0), model="dirichlet", beta=4.0)
    s = DirichletMaxSample(math.log(0.25), 0.0, 1.0)
    assert normalized_statistic(s, nc) == pytest.approx(1.0, rel=1e-15)


def test_normalized_dirichlet_linear_scales_by_total_shape():
    nc = _norming(LINEAR, c=2.0, d=1.0, model="dirichlet", n=10, alpha=0.5, beta=5.0)
    s = DirichletMaxSample(math.log(0.3), 0.0, 1.0)
    assert normalized_statistic(s, nc) == pytest.approx((10 * 0.3 - 1.0) / 2.0)


def test_normalized_rejects_mismatched_model():
    with pytest.raises(UsageError):
        normalized_statistic(LogSample(0.0), _norming(LINEAR, model="dirichlet"))
    with pytest.raises(UsageError):
        normalized_statistic(LogSample(0.0), _norming(Transform("power_scaled"), model="gamma"))


@pytest.mark.parametrize(
    "model, shape, beta",
    [
        ("gamma", ShapeFamily(1, 0, 0), None),
        ("gamma", ShapeFamily(1, -2, 0), None),
        ("dirichlet", ShapeFamily(1, -2, 0), ShapeFamily(1, -1, 0)),
        ("dirichlet", ShapeFamily(2, -1, 0), ShapeFamily(1, 0, 0)),
    ],
)
def test_worker_count_does_not_change_output(model, shape, beta):
    one = simulate_batch(model, shape, beta, 300, 400, seed=11, workers=1)
    eight = simulate_batch(model, shape, beta, 300, 400, seed=11, workers=8)
    assert one.tobytes() == eight.tobytes()


def test_seed_changes_values_not_law():
    shape = ShapeFamily(1, 0, 0)
    a = simulate_batch("gamma", shape, None, 500, 4000, seed=1)
    b = simulate_batch("gamma", shape, None, 500, 4000, seed=2)
    assert not np.array_equal(a, b)
    assert stats.ks_2samp(a, b).statistic < 0.05


def test_zero_replicates_rejected():
    with pytest.raises(UsageError):
        simulate_batch("gamma", ShapeFamily(1, 0, 0), None, 100, 0, seed=1)


def test_budget(monkeypatch):
    monkeypatch.setenv(BUDGET_ENV, "1000")
    with pytest.raises(ResourceError):
        simulate_raw("gamma", ShapeFamily(1, 0, 0), None, 100, 11, seed=1)
    assert len(simulate_raw("gamma", ShapeFamily(1, 0, 0), None, 100, 10, seed=1)) == 10


def test_dirichlet_needs_beta():
    with pytest.raises(UsageError):
        simulate_batch("dirichlet", ShapeFamily(1, 0, 0), None, 100, 10, seed=1)


def test_statistics_respect_transform_ranges():
    n = 1000
    shape, beta = ShapeFamily(1, -2, 0), ShapeFamily(3, 0, 0)
    values = simulate_batch("dirichlet", shape, beta, n, 100, seed=7, norming=dirichlet_norming(n, shape, beta))
    assert values.shape == (100,)
    assert np.all((values > 0) & (values <= 1))


def test_batch_csv_round_trip():
    values = simulate_batch("gamma", ShapeFamily(2, 0, 0), None, 50, 20, seed=3)
    buf = io.StringIO()
    write_batch_csv(buf, values)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "replicate,statistic"
    parsed = np.array([float(line.split(",")[1]) for line in lines[1:]])
    assert [int(line.split(",")[0]) for line in lines[1:]] == list(range(20))
    assert parsed.tobytes() == values.tobytes()


def test_simulated_gamma_statistic_uses_norming():
    n = 200
    shape = ShapeFamily(1, 0, 0.5)
    nc = gamma_norming(n, shape)
    raw = simulate_raw("gamma", shape, None, n, 5, seed=4)
    batch = simulate_batch("gamma", shape, None, n, 5, seed=4)
    expected = [(math.exp(s.log_value) - nc.d_n) / nc.c_n for s in raw]
    assert batch == pytest.approx(expected, rel=1e-15)
