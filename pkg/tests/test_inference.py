import numpy as np
import pytest
from scipy import stats

from holdem_bayes.game import (
    FOLD_END, SHOWDOWN, Action, Card, build_record, replay,
)
from holdem_bayes.inference import (
    Observation, PosteriorDegenerate, PosteriorEnsemble,
    fold_log_likelihood, log_likelihood, observe, showdown_log_likelihood,
)
from holdem_bayes.strategy import (
    StrategyEnsemble, sample_dirichlet_strategy, sample_ensemble, special_strategies,
    uniform_strategy,
)
from oracles import compatible_hands, joint_probability, simulate_hand, trace_likelihood

F, C, R = Action.FOLD, Action.CALL, Action.RAISE


def card(t):
    return Card.parse(t)


def random_observations(tree, n, seed, kind=None, need_p2_action=True):
    """Hands between a random P1 and random P2, filtered by ending kind."""
    rng = np.random.default_rng(seed)
    spec = tree.spec
    out = []
    while len(out) < n:
        alpha = sample_dirichlet_strategy(tree, 1.0, rng, seat=0)
        beta = sample_dirichlet_strategy(tree, 1.0, rng, seat=1)
        rec = simulate_hand(spec, alpha, beta, rng)
        obs = observe(spec, rec, 0)
        decisions, _ = replay(spec, rec)
        if kind is not None and obs.kind != kind:
            continue
        if need_p2_action and not any(d.seat == 1 for d in decisions):
            continue
        out.append((alpha, beta, rec, obs))
    return out


class TestShowdownLikelihood:
    def test_always_call_only_calls(self, leduc_tree):
        rec = build_record(leduc_tree.spec, (card("Ks"),), (card("Qs"),),
                           [(0, C), (1, C), ("board", (card("Jh"),)), (0, C), (1, C)])
        beta = special_strategies(leduc_tree, 1)["always_call"]
        assert showdown_log_likelihood(beta, observe(leduc_tree.spec, rec)) == 0.0

    def test_uniform_two_three_way_decisions(self, leduc_tree):
        rec = build_record(leduc_tree.spec, (card("Ks"),), (card("Qs"),),
                           [(0, R), (1, R), (0, C), ("board", (card("Jh"),)),
                            (0, R), (1, R), (0, C)])
        # P2 faced a raise with both raises open twice: three legal actions each time
        beta = uniform_strategy(leduc_tree, 1)
        assert np.isclose(showdown_log_likelihood(beta, observe(leduc_tree.spec, rec)),
                          np.log(1 / 9), rtol=0, atol=1e-15)

    def test_matches_step_by_step_trace(self, leduc_tree):
        for _, beta, rec, obs in random_observations(leduc_tree, 200, 1, SHOWDOWN):
            expected = trace_likelihood(leduc_tree.spec, beta, rec, rec.D)
            assert abs(np.exp(showdown_log_likelihood(beta, obs)) - expected) <= 1e-12

    def test_zero_probability_action_is_minus_inf(self, leduc_tree):
        rec = build_record(leduc_tree.spec, (card("Ks"),), (card("Qs"),),
                           [(0, C), (1, R), (0, C), ("board", (card("Jh"),)), (0, C), (1, C)])
        beta = special_strategies(leduc_tree, 1)["always_call"]
        assert log_likelihood(beta, observe(leduc_tree.spec, rec)) == -np.inf


class TestFoldLikelihood:
    def _p1_folds_after_call(self, tree):
        rec = build_record(tree.spec, (card("Ks"),), (card("Qs"),),
                           [(0, C), (1, R), (0, F)])
        return observe(tree.spec, rec)

    def test_always_call_counts_compatible_hands(self, leduc_tree):
        # P2 checked behind, P1 folds is impossible; use a P2 raise then P1 fold
        rec = build_record(leduc_tree.spec, (card("Ks"),), (card("Qs"),),
                           [(0, R), (1, R), (0, F)])
        beta = special_strategies(leduc_tree, 1)["uniform"]
        obs = observe(leduc_tree.spec, rec)
        assert obs.kind == FOLD_END and obs.record.D is None
        # five compatible P2 cards, each raising with probability 1/3
        assert np.isclose(fold_log_likelihood(beta, obs), np.log(5 / 3), atol=1e-15)

    def test_constant_action_probability_factorizes(self, leduc_tree):
        obs = self._p1_folds_after_call(leduc_tree)
        probs = special_strategies(leduc_tree, 1)["always_call"].probs.copy()
        probs[:, :] = (0.0, 0.7, 0.3)
        probs[leduc_tree.legal_mask[1][:, F]] = (0.2, 0.5, 0.3)
        beta = type(special_strategies(leduc_tree, 1)["uniform"])(leduc_tree, 1, probs)
        assert np.isclose(fold_log_likelihood(beta, obs), np.log(5 * 0.3), atol=1e-15)

    def test_matches_brute_force_over_hidden_hands(self, leduc_tree):
        spec = leduc_tree.spec
        for alpha, beta, rec, obs in random_observations(leduc_tree, 200, 2, FOLD_END):
            _, end = replay(spec, rec)
            total = sum(trace_likelihood(spec, beta, rec, d)
                        for d in compatible_hands(spec, rec.C + end.board))
            assert abs(np.exp(fold_log_likelihood(beta, obs)) - total) <= 1e-12

    def test_wrong_kind(self, leduc_tree):
        obs = self._p1_folds_after_call(leduc_tree)
        with pytest.raises(ValueError):
            showdown_log_likelihood(uniform_strategy(leduc_tree, 1), obs)


class TestObservation:
    def test_fold_hides_opponent_cards(self, leduc_tree):
        rec = build_record(leduc_tree.spec, (card("Ks"),), (card("Qs"),), [(0, R), (1, F)])
        assert observe(leduc_tree.spec, rec, 0).record.D is None
        assert observe(leduc_tree.spec, rec, 1).record.C is None

    def test_inconsistent_observations_rejected(self, leduc_tree):
        rec = build_record(leduc_tree.spec, (card("Ks"),), (card("Qs"),), [(0, R), (1, F)])
        with pytest.raises(ValueError):
            Observation(rec, FOLD_END, 0)
        with pytest.raises(ValueError):
            Observation(rec.with_hidden(1), SHOWDOWN, 0)


def test_likelihood_ratio_independent_of_p1_strategy(leduc_tree):
    spec = leduc_tree.spec
    rng = np.random.default_rng(5)
    for alpha, beta, rec, obs in random_observations(leduc_tree, 100, 3):
        other_beta = sample_dirichlet_strategy(leduc_tree, 1.0, rng, seat=1)
        other_alpha = sample_dirichlet_strategy(leduc_tree, 1.0, rng, seat=0)
        ours = np.exp(log_likelihood(beta, obs) - log_likelihood(other_beta, obs))
        for a in (alpha, other_alpha):
            if obs.kind == SHOWDOWN:
                num = joint_probability(spec, rec, a, beta)
                den = joint_probability(spec, rec, a, other_beta)
            else:
                _, end = replay(spec, rec)
                ds = compatible_hands(spec, rec.C + end.board)
                num = sum(joint_probability(spec, rec, a, beta, d) for d in ds)
                den = sum(joint_probability(spec, rec, a, other_beta, d) for d in ds)
            if den > 0:
                assert np.isclose(num / den, ours, rtol=1e-9, atol=0)


def test_padding_slots_do_not_enter_likelihood(leduc_tree):
    # P1's call closes round one and the hand ends early: most slots are padding
    rec = build_record(leduc_tree.spec, (card("Ks"),), (card("Qs"),),
                       [(0, C), (1, R), (0, C), ("board", (card("Jh"),)), (0, R), (1, F)])
    assert rec.B == (R, F, F, F) and rec.A == (C, C, R, F)
    beta = special_strategies(leduc_tree, 1)["uniform"]
    obs = observe(leduc_tree.spec, rec)
    # four P2 cards avoid Ks and the board Jh; two real P2 decisions
    # (raise among 2, fold among 3); the pads add nothing
    assert np.isclose(np.exp(log_likelihood(beta, obs)), 4 * (1 / 2) * (1 / 3), atol=1e-15)


class TestPosterior:
    def test_bayes_arithmetic(self, leduc_tree):
        probs = np.repeat(uniform_strategy(leduc_tree, 1).probs[None], 2, axis=0)
        row = leduc_tree.by_name[1]["P2:Q::r"]
        probs[0, row] = (0.8, 0.2, 0.0)
        probs[1, row] = (0.9, 0.1, 0.0)
        post = PosteriorEnsemble.from_prior(StrategyEnsemble(leduc_tree, 1, probs))
        rec = build_record(leduc_tree.spec, (card("Ks"),), (card("Qs"),),
                           [(0, R), (1, C), ("board", (card("Jh"),)), (0, C), (1, C)])
        rec_obs = observe(leduc_tree.spec, rec)
        # later P2 decision is uniform under both samples and cancels
        post = post.update(rec_obs)
        assert np.allclose(post.weights, (2 / 3, 1 / 3), atol=1e-15)

    def test_equally_likely_leaves_weights(self, leduc_tree):
        ens = sample_ensemble(leduc_tree, 1, 3, 2.0, 0)
        probs = np.repeat(ens.probs[:1], 3, axis=0)
        post = PosteriorEnsemble(StrategyEnsemble(leduc_tree, 1, probs), np.log([0.2, 0.3, 0.5]))
        for _, _, _, obs in random_observations(leduc_tree, 20, 4):
            post = post.update(obs)
        assert np.allclose(post.weights, (0.2, 0.3, 0.5), atol=1e-12)

    def test_order_invariance(self, leduc_tree):
        ens = sample_ensemble(leduc_tree, 1, 200, 2.0, 9)
        obs = [o for *_, o in random_observations(leduc_tree, 40, 6)]
        a = PosteriorEnsemble.from_prior(ens)
        b = PosteriorEnsemble.from_prior(ens)
        for o in obs:
            a = a.update(o)
        for i in np.random.default_rng(0).permutation(len(obs)):
            b = b.update(obs[i])
        assert np.max(np.abs(a.weights - b.weights)) <= 1e-9
        assert a.observation_count == b.observation_count == 40

    def test_weights_stay_normalized(self, leduc_tree):
        post = PosteriorEnsemble.from_prior(sample_ensemble(leduc_tree, 1, 50, 2.0, 1))
        for _, _, _, o in random_observations(leduc_tree, 30, 7):
            post = post.update(o)
            assert np.isclose(post.weights.sum(), 1.0, atol=1e-12) and np.all(post.weights >= 0)

    def test_degenerate(self, leduc_tree):
        ens = StrategyEnsemble.of([special_strategies(leduc_tree, 1)["always_call"]] * 2)
        rec = build_record(leduc_tree.spec, (card("Ks"),), (card("Qs"),),
                           [(0, C), (1, R), (0, F)])
        with pytest.raises(PosteriorDegenerate, match="posterior degenerate"):
            PosteriorEnsemble.from_prior(ens).update(observe(leduc_tree.spec, rec))

    def test_minus_inf_weight_is_representable(self, leduc_tree):
        s = special_strategies(leduc_tree, 1)
        ens = StrategyEnsemble.of([s["always_call"], s["uniform"]])
        rec = build_record(leduc_tree.spec, (card("Ks"),), (card("Qs"),),
                           [(0, C), (1, R), (0, F)])
        post = PosteriorEnsemble.from_prior(ens).update(observe(leduc_tree.spec, rec))
        assert post.weights.tolist() == [0.0, 1.0]
        assert post.log_weights[0] == -np.inf

    def test_ground_truth_member_wins(self, leduc_tree):
        ens = sample_ensemble(leduc_tree, 1, 30, 2.0, 11)
        alpha = uniform_strategy(leduc_tree, 0)
        for truth, seed in ((4, 0), (17, 1), (29, 2)):
            post = PosteriorEnsemble.from_prior(ens)
            rng = np.random.default_rng(seed)
            for _ in range(400):
                rec = simulate_hand(leduc_tree.spec, alpha, ens[truth], rng)
                post = post.update(observe(leduc_tree.spec, rec))
            assert post.map_index() == truth

    def test_save_load(self, leduc_tree, tmp_path):
        post = PosteriorEnsemble.from_prior(sample_ensemble(leduc_tree, 1, 10, 2.0, 1))
        post = post.update(random_observations(leduc_tree, 1, 8)[0][3])
        post.save(tmp_path / "p.npz")
        back = PosteriorEnsemble.load(tmp_path / "p.npz")
        assert back.tree is leduc_tree and back.observation_count == 1
        assert np.array_equal(back.log_weights, post.log_weights)
        assert np.array_equal(back.ensemble.probs, post.ensemble.probs)


def _post(tree, weights):
    n = len(weights)
    with np.errstate(divide="ignore"):
        return PosteriorEnsemble(sample_ensemble(tree, 1, n, 2.0, 0), np.log(weights))


class TestDiagnostics:
    def test_ess(self, kuhn_tree):
        assert np.isclose(_post(kuhn_tree, np.full(8, 1 / 8)).effective_sample_size(), 8)
        assert _post(kuhn_tree, [1.0, 0, 0]).effective_sample_size() == 1
        assert np.isclose(_post(kuhn_tree, [0.5, 0.5, 0, 0]).effective_sample_size(), 2)

    def test_map_index(self, kuhn_tree):
        assert _post(kuhn_tree, [0.1, 0.7, 0.2]).map_index() == 1
        assert _post(kuhn_tree, [0.25] * 4).map_index() == 0

    def test_thompson_degenerate(self, kuhn_tree):
        post, rng = _post(kuhn_tree, [1.0, 0, 0, 0]), np.random.default_rng(0)
        assert all(post.thompson_draw(rng) == 0 for _ in range(1000))

    def test_thompson_half_half(self, kuhn_tree):
        post, rng = _post(kuhn_tree, [0.5, 0.5]), np.random.default_rng(1)
        hits = sum(post.thompson_draw(rng) for _ in range(10_000))
        assert abs(hits - 5000) <= 3 * np.sqrt(10_000 * 0.25)

    def test_thompson_goodness_of_fit(self, kuhn_tree):
        w = np.array([0.05, 0.1, 0.15, 0.2, 0.5])
        post, rng = _post(kuhn_tree, w), np.random.default_rng(2)
        draws = np.array([post.thompson_draw(rng) for _ in range(100_000)])
        counts = np.bincount(draws, minlength=5)
        assert stats.chisquare(counts, w * counts.sum()).pvalue > 1e-3


def test_update_is_noop_when_opponent_never_acted():
    from holdem_bayes.game import GameSpec, leduc
    from holdem_bayes.tree import get_tree
    # unequal antes let P1 fold before P2 decides anything
    spec = GameSpec("blind-leduc", leduc().deck, 1, leduc().rounds, (1, 2))
    tree = get_tree(spec)
    rec = build_record(spec, (card("Ks"),), (card("Qs"),), [(0, F)])
    obs = observe(spec, rec)
    assert obs.kind == FOLD_END
    post = PosteriorEnsemble(sample_ensemble(tree, 1, 4, 2.0, 0), np.log([0.1, 0.2, 0.3, 0.4]))
    after = post.update(obs)
    assert np.array_equal(after.log_weights, post.log_weights)
    assert after.observation_count == 1
