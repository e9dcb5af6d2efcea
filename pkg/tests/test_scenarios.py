import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from suffquant.errors import InsufficientSamples
from suffquant.model import validate
from suffquant.scenarios import (
    GaussianParams,
    SampleSet,
    SensingParams,
    ci_witness,
    design,
    empirical_model,
    evaluate,
    gaussian_mmse,
    gaussian_posterior_w,
    gaussian_sample,
    scenario_report,
    sensing_closed_form,
    sensing_sample,
)

import oracles

N = 200_000


@pytest.fixture(scope="module")
def gauss():
    return gaussian_sample(GaussianParams(4, 0.5), N, seed=0)


def test_independent_noises_when_rho_zero():
    s = gaussian_sample(GaussianParams(3, 0.0), N, seed=1)
    e1 = s.raw[0][:, 0] - s.theta
    e2 = s.raw[1][:, 1] - s.theta
    assert abs(np.corrcoef(e1, e2)[0, 1]) < 4 / math.sqrt(N)


def test_sum_moments(gauss):
    n, rho = 4, 0.5
    var = n * n * (1 + rho) + n * (1 - rho)
    t1 = gauss.stats[:, 0]
    assert abs(t1.mean()) < 4 * math.sqrt(var / N)
    assert t1.var() == pytest.approx(var, rel=0.05)
    np.testing.assert_allclose(t1, gauss.raw[0].sum(axis=1))
    np.testing.assert_array_equal(gauss.alt[:, 0], gauss.raw[0][:, 0])


def test_samples_reproducible_and_chunk_stable():
    p = GaussianParams(2, 0.3)
    a, b = gaussian_sample(p, 70_000, seed=4), gaussian_sample(p, 70_000, seed=4)
    np.testing.assert_array_equal(a.raw[0], b.raw[0])
    short = gaussian_sample(p, 1 << 16, seed=4)
    np.testing.assert_array_equal(short.theta, a.theta[: 1 << 16])
    assert not np.array_equal(gaussian_sample(p, 1000, seed=5).theta, a.theta[:1000])


def test_posterior_w_examples():
    assert gaussian_posterior_w(GaussianParams(1, 0.0), [2.0]) == pytest.approx((1.0, 0.5))
    mean, _ = gaussian_posterior_w(GaussianParams(2, 0.5), [1.0, 2.0])
    assert mean == pytest.approx(4.5 / 3.5)
    p = GaussianParams(4, 0.5)
    assert gaussian_posterior_w(p, [0.1, 2, -1, 3]) == gaussian_posterior_w(p, [3, -1, 2, 0.1])


def test_posterior_w_matches_gaussian_conditioning():
    # independent oracle: condition the joint Gaussian of (W, x1) directly
    n, rho = 3, 0.4
    cov_x = (1 + rho) * np.ones((n, n)) + (1 - rho) * np.eye(n)
    c = (1 + rho) * np.ones(n)
    x = np.array([0.3, -1.2, 2.0])
    mean = c @ np.linalg.solve(cov_x, x)
    var = (1 + rho) - c @ np.linalg.solve(cov_x, c)
    assert gaussian_posterior_w(GaussianParams(n, rho), x) == pytest.approx((mean, var), abs=1e-12)


def test_mmse_values():
    assert gaussian_mmse(GaussianParams(1, 0.0)) == pytest.approx(1 / 3)
    assert gaussian_mmse(GaussianParams(4, 0.5)) == pytest.approx(0.36)
    seq = [gaussian_mmse(GaussianParams(n, 0.0)) for n in range(1, 30)]
    assert all(a > b for a, b in zip(seq, seq[1:])) and seq[-1] < 0.02
    for n in (1, 5):
        for rho in (0.0, 0.5, 0.95):
            assert 0 < gaussian_mmse(GaussianParams(n, rho)) < 1


def test_mmse_matches_monte_carlo_regression(gauss):
    t = gauss.stats
    coef, *_ = np.linalg.lstsq(t, gauss.theta, rcond=None)
    mse = np.mean((gauss.theta - t @ coef) ** 2)
    assert mse == pytest.approx(0.36, abs=0.01)


def test_params_validation():
    with pytest.raises(ValueError):
        GaussianParams(0, 0.5)
    with pytest.raises(ValueError):
        GaussianParams(2, 1.0)
    with pytest.raises(ValueError):
        SensingParams(constellation=[(1, 0, 0.5)])
    with pytest.raises(ValueError):
        SensingParams(noise_var=0)


def test_sensing_energy_means():
    s = sensing_sample(SensingParams(K=2), N, seed=0)
    e = s.stats**2
    h0 = s.theta == 0
    assert e[h0].mean() == pytest.approx(1.0, rel=0.05)
    assert e[~h0].mean() == pytest.approx(2.0, rel=0.05)
    np.testing.assert_allclose(s.stats[:, 1], np.hypot(*s.raw[1].T))
    again = sensing_sample(SensingParams(K=2), N, seed=0)
    np.testing.assert_array_equal(s.stats, again.stats)


def test_closed_form_threshold():
    cf = sensing_closed_form(SensingParams())
    assert cf["threshold_sq"] == pytest.approx(2 * math.log(2), abs=1e-10)
    assert cf["risk"] == pytest.approx(0.375, abs=1e-12)
    grid = minimize_scalar(oracles.qpsk_energy_error, bounds=(0, 10), method="bounded", options={"xatol": 1e-10})
    assert grid.x == pytest.approx(cf["threshold_sq"], abs=1e-6)


def test_closed_form_general_params_minimize_error():
    p = SensingParams(constellation=[(0.5, 0, 0.5), (2.0, 1, 0.5)], prior_h1=0.3, fading_var=2.0, noise_var=0.5)
    cf = sensing_closed_form(p)
    lam = [2.0 * 0.25 + 0.5, 2.0 * 4 + 0.5]

    def pe(t):
        return 0.7 * math.exp(-t / 0.5) + 0.3 * sum(0.5 * (1 - math.exp(-t / l)) for l in lam)

    grid = np.linspace(0, 20, 200001)
    assert cf["risk"] <= min(pe(t) for t in grid[::100]) + 1e-12
    assert cf["risk"] == pytest.approx(pe(cf["threshold_sq"]))


def test_empirical_binning_two_bins(gauss):
    b = empirical_model(gauss, "sufficient", 2)
    for axis in (0, 1):
        np.testing.assert_allclose(b.mass.sum(axis=axis), 0.5, atol=3 / math.sqrt(N))
    assert b.cells.sum() == pytest.approx(1.0, abs=1e-12)
    assert validate(b.model).ok


def test_four_equal_cells_for_independent_statistics():
    rng = np.random.default_rng(0)
    v = rng.standard_normal((N, 2))
    s = SampleSet("sensing", rng.integers(0, 2, N), np.zeros(N), (), v, v, 0)
    b = empirical_model(s, "sufficient", 2)
    np.testing.assert_allclose(b.mass, 0.25, atol=3 / math.sqrt(N))


def test_insufficient_samples():
    s = gaussian_sample(GaussianParams(), 1000, seed=0)
    with pytest.raises(InsufficientSamples):
        empirical_model(s, "sufficient", 64)


def test_design_risk_respects_mmse(gauss):
    b = empirical_model(gauss, "sufficient", 32)
    d = design(b, 4, restarts=4, seed=0)
    assert d.risk >= gaussian_mmse(GaussianParams()) - 0.01
    ev = evaluate(b, d, gaussian_sample(GaussianParams(), N, seed=0, stream_id=1))
    assert ev.risk >= 0.36 - 3 * ev.se


def test_ci_witness_holds(gauss):
    w = ci_witness(gauss)
    assert w["holds"]
    assert ci_witness(sensing_sample(SensingParams(K=1), 10_000, seed=0)) is None


def test_scenario_report_small_and_deterministic():
    kw = dict(samples=100_000, bins=32, restarts=4, seed=3)
    a = scenario_report("sensing", **kw, csv_limit=5)
    b = scenario_report("sensing", **kw)
    assert a.results == b.results
    r = a.results
    assert r["sufficient"]["risk"] < r["alternative"]["risk"]
    assert r["sufficient"]["risk"] >= r["benchmark"]["risk"] - 3 * r["sufficient"]["se"]
    assert a.csv_rows[0] == ["stat_1", "level_1", "estimate"] and len(a.csv_rows) == 6
    g = scenario_report("gaussian", **kw)
    assert g.results["sufficient"]["risk"] >= 0.36 - 0.01
    assert g.results["posterior_w"]["relative_error"] < 0.02
    with pytest.raises(ValueError):
        scenario_report("radar")
