import numpy as np
import pytest

from suffquant.errors import AlphabetMismatch
from suffquant.model import CostMatrix
from suffquant.pbpo import (
    DiscreteObjective,
    SquaredErrorObjective,
    best_of_restarts,
    pbpo,
    pbpo_best,
    quantile_init,
    run_sweeps,
)
from suffquant.quantizer import Quantizer, exhaustive_search, risk
from suffquant.verify import ModelRecipe, random_model


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("init", ["quantile", "random"])
def test_trace_non_increasing_and_final_equals_risk(seed, init):
    m = random_model(ModelRecipe("generic", 3, 5, 4, positive=seed % 2 == 0, seed=seed))
    cost = CostMatrix(3, 3, np.random.default_rng(seed).random((3, 3)))
    d = pbpo(m, cost, 2, 3, init=init, seed=seed)
    assert np.all(np.diff(d.risk_trace) <= 1e-12)
    assert d.risk_trace[-1] == pytest.approx(d.risk, abs=1e-9)
    assert risk(m, *d.quantizers, d.estimator, cost) == pytest.approx(d.risk, abs=1e-12)


def test_binary_channel_reaches_exhaustive_minimum(bsc_model):
    cost = CostMatrix.zero_one(bsc_model.theta)
    d = pbpo_best(bsc_model, cost, 2, 2, restarts=16, seed=0)
    assert d.risk == pytest.approx(0.2, abs=1e-12)
    assert d.risk == pytest.approx(exhaustive_search(bsc_model, cost, 2, 2).min_risk, abs=1e-12)
    assert len(d.restart_risks) == 16


def test_determinism():
    m = random_model(ModelRecipe("generic", 2, 4, 4, seed=1))
    cost = CostMatrix.zero_one(m.theta)
    a, b = pbpo_best(m, cost, 2, 2, seed=5), pbpo_best(m, cost, 2, 2, seed=5)
    assert a.as_dict() == b.as_dict()


@pytest.mark.parametrize("seed", range(5))
def test_fixed_point_is_person_by_person_optimal(seed):
    m = random_model(ModelRecipe("generic", 3, 4, 4, seed=seed))
    cost = CostMatrix.zero_one(m.theta)
    d = pbpo(m, cost, 2, 2, init="random", seed=seed, max_iter=200)
    assert d.converged
    g1, g2 = d.quantizers
    base = risk(m, g1, g2, d.estimator, cost)
    for side, g in (("x1", g1), ("x2", g2)):
        for i in range(len(g.codes)):
            for u in range(g.levels):
                codes = list(g.codes)
                codes[i] = u
                alt = Quantizer(side, g.domain, g.levels, tuple(codes))
                pair = (alt, g2) if side == "x1" else (g1, alt)
                assert risk(m, *pair, d.estimator, cost) >= base - 1e-12


def test_explicit_init(bsc_model):
    cost = CostMatrix.zero_one(bsc_model.theta)
    g = (Quantizer("x1", bsc_model.x1, 2, (0, 1)), Quantizer("x2", bsc_model.x2, 2, (0, 1)))
    d = pbpo(bsc_model, cost, 2, 2, init=g)
    assert d.risk == pytest.approx(0.2)
    with pytest.raises(AlphabetMismatch):
        pbpo(bsc_model, cost, 3, 2, init=g)
    with pytest.raises(ValueError):
        pbpo(bsc_model, cost, 2, 2, init="bogus")
    with pytest.raises(ValueError):
        pbpo(bsc_model, cost, 2, 2, max_iter=0)


def test_max_iter_reports_non_convergence():
    m = random_model(ModelRecipe("generic", 3, 5, 5, seed=7))
    d = pbpo(m, CostMatrix.zero_one(m.theta), 2, 2, init="random", seed=3, max_iter=1)
    assert d.iterations == 1
    assert isinstance(d.converged, bool)


def test_quantile_init_is_contiguous_and_balanced():
    g = quantile_init([np.full(8, 1 / 8)], [4])[0]
    assert g.tolist() == [0, 0, 1, 1, 2, 2, 3, 3]
    g = quantile_init([np.array([0.7, 0.1, 0.1, 0.1])], [2])[0]
    assert g.tolist() == [0, 1, 1, 1]


def test_squared_error_objective_matches_direct_sum():
    rng = np.random.default_rng(0)
    n = 20000
    theta = rng.standard_normal(n)
    b1 = rng.integers(0, 6, n)
    b2 = rng.integers(0, 5, n)
    mass = np.zeros((6, 5))
    first = np.zeros((6, 5))
    second = np.zeros((6, 5))
    np.add.at(mass, (b1, b2), 1 / n)
    np.add.at(first, (b1, b2), theta / n)
    np.add.at(second, (b1, b2), theta**2 / n)
    obj = SquaredErrorObjective(mass, first, second)
    d = best_of_restarts(obj, [2, 2], restarts=4, seed=0)
    u1, u2 = d.gammas[0][b1], d.gammas[1][b2]
    direct = np.mean((theta - d.h[u1, u2]) ** 2)
    assert d.risk == pytest.approx(direct, rel=1e-9)
    assert np.all(np.diff(d.risk_trace) <= 1e-12)


@pytest.mark.parametrize("K", [1, 3])
def test_discrete_objective_any_sensor_count(K):
    rng = np.random.default_rng(K)
    cells = rng.random((2,) + (4,) * K)
    cells /= cells.sum()
    obj = DiscreteObjective(cells, 1 - np.eye(2))
    d = run_sweeps(obj, [2] * K, [np.zeros(4, dtype=int)] * K)
    assert np.all(np.diff(d.risk_trace) <= 1e-12)
    assert d.h.shape == (2,) * K
