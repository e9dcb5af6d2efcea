import numpy as np
import pytest

from suffquant.model import CostMatrix, Statistic
from suffquant.rng import derive_seed
from suffquant.sufficiency import conditional_independence, minimal_sufficient, validate_hci
from suffquant.verify import (
    SUITES,
    ModelRecipe,
    centralized_example,
    example4_model,
    intersection_counterexample,
    random_model,
    run_trial,
    theorem_suite,
    verify_equivalence,
)


@pytest.mark.parametrize("seed", range(5))
def test_recipes_satisfy_their_structure(seed):
    ci = random_model(ModelRecipe("ci", 3, 4, 3, seed=seed))
    assert conditional_independence(ci, "x1", "x2", "theta").holds
    hci = random_model(ModelRecipe("hci", 2, 3, 4, w=3, positive=False, seed=seed))
    validate_hci(hci)
    deg = random_model(ModelRecipe("degenerate", 2, 4, 4, seed=seed))
    p = deg.joint
    assert np.all(p[:, ~np.eye(4, dtype=bool)] == 0)


def test_positivity_flag():
    pos = random_model(ModelRecipe("generic", 3, 4, 4, positive=True, seed=1))
    assert pos.joint.min() > 0
    sparse = random_model(ModelRecipe("generic", 3, 4, 4, positive=False, seed=1))
    assert (sparse.joint == 0).any()
    assert abs(sparse.joint.sum() - 1) < 1e-12


def test_recipe_validation():
    with pytest.raises(ValueError):
        ModelRecipe("hci", 2, 2, 2)
    with pytest.raises(ValueError):
        ModelRecipe("bogus")
    with pytest.raises(ValueError):
        ModelRecipe("ci", 0, 2, 2)


def test_same_seed_same_tensor():
    r = ModelRecipe("ci", 3, 5, 4, seed=42)
    np.testing.assert_array_equal(random_model(r).joint, random_model(r).joint)
    other = random_model(ModelRecipe("ci", 3, 5, 4, seed=43))
    assert not np.array_equal(random_model(r).joint, other.joint)


def test_equivalence_on_centralized_example():
    m = centralized_example()
    t1 = minimal_sufficient(m, "x1")
    eq = verify_equivalence(m, t1, Statistic.identity("x2", m.x2), CostMatrix.zero_one(m.theta), 2, 2)
    assert eq.passes
    assert eq.r_raw == pytest.approx(0.2, abs=1e-12) and eq.r_stat == pytest.approx(0.2, abs=1e-12)


def test_equivalence_gap_on_example4():
    m = example4_model()
    eq = verify_equivalence(
        m, Statistic.identity("x1", m.x1), Statistic.constant("x2", m.x2), CostMatrix.zero_one(m.theta), 2, 2
    )
    assert not eq.passes and eq.gap == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_every_suite_passes_small_runs(suite):
    rep = theorem_suite(suite, trials=6, seed=3)
    assert rep.ok, rep.failures
    assert rep.passes + len(rep.failures) == rep.trials
    for r_raw, r_stat in rep.pairs:
        assert r_stat >= r_raw - 1e-12


@pytest.mark.parametrize("suite", ["thm3", "thm4", "thm5", "degenerate"])
def test_suites_hold_for_random_costs(suite):
    assert theorem_suite(suite, trials=10, seed=11, cost="random").ok


def test_suite_reports_are_reproducible_and_schedule_free(monkeypatch):
    monkeypatch.setenv("SUFFQUANT_THREADS", "1")
    serial = theorem_suite("thm3", trials=12, seed=5).as_dict()
    monkeypatch.setenv("SUFFQUANT_THREADS", "4")
    threaded = theorem_suite("thm3", trials=12, seed=5).as_dict()
    assert serial == threaded


def test_failure_seed_reproduces_trial():
    rep = theorem_suite("ex7", trials=5, seed=2)
    s = derive_seed(2, 3)
    t = run_trial("ex7", s)
    assert t.pair == rep.pairs[3]


def test_thm4_checks_global_sufficiency_first():
    t = run_trial("thm4", 12345)
    assert t.detail["global_sufficient"]


def test_ex7_finds_nonsufficient_optimal_statistic():
    rep = theorem_suite("ex7", trials=20, seed=0)
    assert rep.ok and rep.extra["nonsufficient_instances"] >= 1


def test_intersection_needs_positivity():
    assert intersection_counterexample()


def test_unknown_suite():
    with pytest.raises(ValueError):
        theorem_suite("thm9")
    with pytest.raises(ValueError):
        theorem_suite("thm1", trials=0)


def test_size_bounds_are_respected():
    rep = theorem_suite("thm3", trials=10, seed=1, sizes={"theta": 2, "x": 2})
    assert rep.ok
    for t in range(10):
        assert run_trial("thm3", derive_seed(1, t), {"theta": 2, "x": 2}).detail["sizes"] == [2, 2, 2]
