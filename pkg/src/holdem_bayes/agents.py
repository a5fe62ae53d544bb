"""Players: static strategies, Bayesian responders, and a frequentist baseline."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numpy as np

from .game import Action, FOLD_END, PublicState, replay
from .inference import Observation, PosteriorEnsemble
from .nash import cached_nash
from .response import WeightedOpponent, bayesian_best_response, best_response
from .strategy import (
    DEFAULT_CONCENTRATION, BehaviourStrategy, read_strategy, sample_ensemble,
    special_strategies, uniform_strategy,
)
from .tree import GameTree

log = logging.getLogger(__name__)

DEFAULT_ENSEMBLE_SIZE = 1000
DEFAULT_EPSILON = 0.005


@dataclass(frozen=True)
class View:
    """What the acting seat sees when asked for a decision."""

    seat: int
    hand: tuple
    state: PublicState


class Agent:
    kind = "agent"

    def __init__(self):
        self.tree: Optional[GameTree] = None
        self.seat: Optional[int] = None

    @property
    def name(self) -> str:
        return self.kind

    def start_trial(self, tree: GameTree, seat: int, streams: dict, opponent=None):
        """Reset all per-trial state. ``streams`` holds this seat's named generators."""
        self.tree, self.seat = tree, seat
        self._act_rng = streams["act"]

    def begin_hand(self):
        pass

    def act(self, view: View) -> Action:
        raise NotImplementedError

    def observe_hand_end(self, obs: Observation):
        pass

    def diagnostics(self) -> Optional[dict]:
        return None

    def _sample(self, row: np.ndarray) -> Action:
        u = self._act_rng.random()
        return Action(int(min(np.searchsorted(np.cumsum(row), u, side="right"), 2)))


class StrategyAgent(Agent):
    """Plays a fixed behaviour strategy for its seat."""

    def __init__(self, kind: str, strategies=None, factory=None):
        super().__init__()
        self.kind = kind
        self._strategies = strategies or {}
        self._factory = factory
        self.strategy: Optional[BehaviourStrategy] = None

    def start_trial(self, tree, seat, streams, opponent=None):
        super().start_trial(tree, seat, streams, opponent)
        if self._factory is not None:
            self.strategy = self._factory(tree, seat, streams["init"])
        else:
            self.strategy = self._strategies[seat]
            if self.strategy.tree is not tree:
                raise ValueError(f"{self.name}: strategy was built for another game tree")

    def act(self, view):
        row = self.strategy.probs[self.tree.infoset_of(view.seat, view.hand, view.state)]
        return self._sample(row)


class ResponseAgent(Agent):
    """Plays a pure response recomputed at the start of every hand."""

    def __init__(self):
        super().__init__()
        self.response: Optional[np.ndarray] = None

    def act(self, view):
        row = self.response[self.tree.infoset_of(view.seat, view.hand, view.state)]
        return Action(int(np.argmax(row)))


class BayesAgent(ResponseAgent):
    """Importance-sampled posterior over the opponent plus a BBR/MAP/Thompson response."""

    def __init__(self, mode: str, ensemble_size: int = DEFAULT_ENSEMBLE_SIZE,
                 concentration=DEFAULT_CONCENTRATION):
        super().__init__()
        if mode not in ("bbr", "map", "thompson"):
            raise ValueError(f"unknown response mode {mode!r}")
        if ensemble_size < 1:
            raise ValueError("ensemble_size must be at least 1")
        self.mode = mode
        self.kind = f"bayes_{mode}"
        self.ensemble_size = ensemble_size
        self.concentration = concentration
        self.posterior: Optional[PosteriorEnsemble] = None

    def start_trial(self, tree, seat, streams, opponent=None):
        super().start_trial(tree, seat, streams, opponent)
        ens = sample_ensemble(tree, 1 - seat, self.ensemble_size, self.concentration,
                              streams["init"])
        self.posterior = PosteriorEnsemble.from_prior(ens)
        self._thompson_rng = streams["thompson"]
        self._cache: dict[int, np.ndarray] = {}
        self.trace: list[dict] = []
        self.response_index: Optional[int] = None

    def _respond_to(self, j: int) -> np.ndarray:
        if j not in self._cache:
            self._cache[j] = best_response(self.tree, self.posterior.ensemble[j], self.seat).strategy.probs
        return self._cache[j]

    def begin_hand(self):
        post = self.posterior
        if self.mode == "bbr":
            opp = WeightedOpponent(post.ensemble, post.weights)
            self.response = bayesian_best_response(self.tree, opp, self.seat).strategy.probs
            self.response_index = None
        else:
            j = post.map_index() if self.mode == "map" else post.thompson_draw(self._thompson_rng)
            self.response_index = j
            self.response = self._respond_to(j)

    def observe_hand_end(self, obs):
        self.posterior = self.posterior.update(obs)
        self.trace.append(self.posterior.diagnostics())

    def diagnostics(self):
        return self.trace[-1] if self.trace else None


class OracleBestResponse(ResponseAgent):
    """Best response to the opponent's true static strategy (an upper bound, not a learner)."""

    kind = "best_response"

    def start_trial(self, tree, seat, streams, opponent=None):
        super().start_trial(tree, seat, streams, opponent)
        target = getattr(opponent, "strategy", None)
        if target is None:
            raise ValueError("best_response needs an opponent that plays a fixed strategy")
        self.response = best_response(tree, target, seat).strategy.probs


class FrequentistAgent(ResponseAgent):
    """Simplified Vexbot-style baseline.

    Keeps Laplace-smoothed counts of the opponent's actions at each public
    decision point, and per (decision point, action) counts of the opponent
    hand classes revealed at showdowns, with one pseudo-count per class. The
    implied behaviour strategy is P(a | node) P(class | node, a) normalized over
    actions; the agent best-responds to it every hand.
    """

    kind = "frequentist"

    @property
    def name(self):
        return "simplified-vexbot"

    def start_trial(self, tree, seat, streams, opponent=None):
        super().start_trial(tree, seat, streams, opponent)
        opp = 1 - seat
        self._node_id = {id(n): k for k, n in enumerate(tree.decision_nodes)}
        self._inf_node = np.array([self._node_id[id(n)] for n in tree.infoset_node[opp]])
        self._inf_class = tree.infoset_class[opp]
        n_nodes = len(tree.decision_nodes)
        self._classes_at = np.array([n.valid.sum() for n in tree.decision_nodes], dtype=float)
        self.action_counts = np.zeros((n_nodes, 3))
        self.card_counts = np.zeros((n_nodes, 3, tree.n_hands))
        self.observed = 0

    def model(self) -> BehaviourStrategy:
        opp = 1 - self.seat
        legal = self.tree.legal_mask[opp]
        nodes, classes = self._inf_node, self._inf_class
        p_action = (self.action_counts[nodes] + 1.0) * legal
        cards = self.card_counts[nodes, :, classes]  # (infosets, 3)
        p_class = (cards + 1.0) / (self.card_counts[nodes].sum(axis=2)
                                   + self._classes_at[nodes][:, None])
        probs = p_action * p_class
        return BehaviourStrategy(self.tree, opp, probs / probs.sum(axis=1, keepdims=True))

    def begin_hand(self):
        self.response = best_response(self.tree, self.model(), self.seat).strategy.probs

    def observe_hand_end(self, obs):
        opp = 1 - self.seat
        decisions, _ = replay(self.tree.spec, obs.record)
        hidden = obs.record.hands()[opp]
        c = None if obs.kind == FOLD_END else self.tree.class_of(hidden)
        for d in decisions:
            if d.seat != opp:
                continue
            k = self._node_id[id(self.tree.node_for(d.state))]
            self.action_counts[k, d.action] += 1
            if c is not None:
                self.card_counts[k, d.action, c] += 1
        self.observed += 1


# -- construction ------------------------------------------------------------------

AGENT_KINDS = ("opti", "prior_sample", "bayes_bbr", "bayes_map", "bayes_thompson",
               "frequentist", "always_call", "always_fold", "uniform", "fixed",
               "best_response")


def _special_factory(name, tree, seat, rng):
    return special_strategies(tree, seat)[name]


def _nash_factory(epsilon, seed, tree, seat, rng):
    return cached_nash(tree.spec, tree.canonical, epsilon, seed).pair[seat]


def _file_factory(path, tree, seat, rng):
    return read_strategy(path, seat, tree.spec)


def _prior_factory(concentration, tree, seat, rng):
    return sample_ensemble(tree, seat, 1, concentration, rng)[0]


def _uniform_factory(tree, seat, rng):
    return uniform_strategy(tree, seat)


def make_agent(kind: str, params: Optional[dict] = None, tree: Optional[GameTree] = None) -> Agent:
    """Build an agent by kind name. ``tree`` lets 'opti' solve up front."""
    params = dict(params or {})
    conc = params.get("concentration", DEFAULT_CONCENTRATION)
    if kind == "opti":
        if "path" in params:
            return StrategyAgent("opti", factory=partial(_file_factory, params["path"]))
        eps = float(params.get("epsilon", DEFAULT_EPSILON))
        seed = params.get("seed")
        if tree is not None:
            pair = cached_nash(tree.spec, tree.canonical, eps, seed).pair
            return StrategyAgent("opti", strategies={0: pair[0], 1: pair[1]})
        return StrategyAgent("opti", factory=partial(_nash_factory, eps, seed))
    if kind == "prior_sample":
        return StrategyAgent("prior_sample", factory=partial(_prior_factory, conc))
    if kind in ("bayes_bbr", "bayes_map", "bayes_thompson"):
        return BayesAgent(kind.split("_", 1)[1],
                          int(params.get("ensemble_size", DEFAULT_ENSEMBLE_SIZE)), conc)
    if kind == "frequentist":
        return FrequentistAgent()
    if kind == "always_call":
        return StrategyAgent(kind, factory=partial(_special_factory, "always_call"))
    if kind == "always_fold":
        return StrategyAgent(kind, factory=partial(_special_factory, "always_fold_when_legal"))
    if kind == "uniform":
        return StrategyAgent(kind, factory=_uniform_factory)
    if kind == "fixed":
        if "path" not in params:
            raise ValueError("fixed agent needs a 'path' to a strategy file")
        path = params["path"]
        with open(path):
            pass  # fail early on a missing file
        return StrategyAgent("fixed", factory=partial(_file_factory, path))
    if kind == "best_response":
        return OracleBestResponse()
    raise ValueError(f"unknown agent kind {kind!r}; expected one of {', '.join(AGENT_KINDS)}")
