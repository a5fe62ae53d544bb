import pytest

from holdem_bayes.nash import CFRPlus, NashNotCertified, cached_nash, solve_nash
from holdem_bayes.response import best_response, expected_value, exploitability
from holdem_bayes.strategy import validate_strategy
from oracles import kuhn_matrix, matrix_game_value


@pytest.fixture(scope="module")
def kuhn_value_lp():
    M, _, _ = kuhn_matrix()
    return matrix_game_value(M)


def test_lp_oracle_value_is_minus_one_eighteenth(kuhn_value_lp):
    assert kuhn_value_lp == pytest.approx(-1 / 18, abs=1e-9)


def test_kuhn_certified(kuhn_tree, kuhn_value_lp):
    eps = 0.001
    res = solve_nash(kuhn_tree, eps)
    assert res.exploitability <= eps
    assert abs(res.value - kuhn_value_lp) <= 2 * eps
    assert res.value == pytest.approx(expected_value(kuhn_tree, *res.pair), abs=1e-12)
    for s in res.pair:
        assert validate_strategy(s) == []


def test_best_response_to_nash_within_epsilon(kuhn_tree, kuhn_value_lp):
    eps = 0.001
    p1, p2 = solve_nash(kuhn_tree, eps).pair
    assert kuhn_value_lp - eps <= best_response(kuhn_tree, p2, 0).value <= kuhn_value_lp + eps
    assert -kuhn_value_lp - eps <= best_response(kuhn_tree, p1, 1).value <= -kuhn_value_lp + eps


def test_leduc_certified_and_stable_across_seeds(leduc_tree):
    eps = 0.005
    values = []
    for seed in range(5):
        res = solve_nash(leduc_tree, eps, seed=seed)
        assert exploitability(leduc_tree, res.pair) <= eps
        values.append(res.value)
    assert max(values) - min(values) <= 2 * eps


def test_budget_exhausted_carries_best_pair(leduc_tree):
    with pytest.raises(NashNotCertified) as info:
        solve_nash(leduc_tree, 1e-9, max_iterations=20, check_every=10)
    err = info.value
    assert err.exploitability > 1e-9 and len(err.pair) == 2
    assert err.exploitability == pytest.approx(exploitability(leduc_tree, err.pair))


def test_epsilon_must_be_positive(kuhn_tree):
    with pytest.raises(ValueError):
        solve_nash(kuhn_tree, 0.0)


def test_exploitability_decreases(kuhn_tree):
    cfr = CFRPlus(kuhn_tree)
    cfr.iterate(10)
    early = exploitability(kuhn_tree, (cfr.average(0), cfr.average(1)))
    cfr.iterate(200)
    late = exploitability(kuhn_tree, (cfr.average(0), cfr.average(1)))
    assert late < early


def test_cached_solution_is_shared(leduc_spec):
    assert cached_nash(leduc_spec, True, 0.005, None) is cached_nash(leduc_spec, True, 0.005, None)
