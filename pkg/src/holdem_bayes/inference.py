"""Observation likelihoods and the importance-sampled posterior over opponent strategies.

Only the opponent's own action probabilities enter a likelihood. Card-deal
and modeller-action factors are the same for every candidate strategy in a
given hand, so they cancel once the weights are normalized and are never
computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .game import FOLD_END, SHOWDOWN, GameError, HandRecord, replay
from .strategy import BehaviourStrategy, StrategyEnsemble
from .tree import GameTree


class PosteriorDegenerate(RuntimeError):
    pass


@dataclass(frozen=True)
class Observation:
    """A finished hand as seen by ``viewer``; the opponent's cards are present
    only after a showdown."""

    record: HandRecord
    kind: str
    viewer: int = 0

    def __post_init__(self):
        hidden = self.record.hands()[1 - self.viewer]
        if self.kind == SHOWDOWN and hidden is None:
            raise ValueError("a showdown observation must include the opponent's cards")
        if self.kind == FOLD_END and hidden is not None:
            raise ValueError("a fold observation cannot include the opponent's cards")
        if self.kind not in (SHOWDOWN, FOLD_END):
            raise ValueError(f"unknown observation kind {self.kind!r}")


def observe(spec, record: HandRecord, viewer: int = 0) -> Observation:
    """What ``viewer`` learns from an oracle-view record."""
    _, end = replay(spec, record)
    if end.terminal == FOLD_END:
        return Observation(record.with_hidden(1 - viewer), FOLD_END, viewer)
    return Observation(record, SHOWDOWN, viewer)


def ensemble_log_likelihood(tree: GameTree, probs: np.ndarray, obs: Observation,
                            opp_seat: Optional[int] = None) -> np.ndarray:
    """Unnormalized log-likelihood of ``obs`` under each of ``probs``' strategies.

    ``probs`` is ``(N, infosets, 3)`` for the modelled seat. Returns shape ``(N,)``.
    """
    opp = 1 - obs.viewer if opp_seat is None else opp_seat
    decisions, end = replay(tree.spec, obs.record)
    moves = [(tree.node_for(d.state), int(d.action)) for d in decisions if d.seat == opp]
    n = probs.shape[0]
    hidden = obs.record.hands()[opp]
    with np.errstate(divide="ignore"):
        if hidden is not None:
            c = tree.class_of(hidden)
            ll = np.zeros(n)
            for node, a in moves:
                ll += np.log(probs[:, node.idx[c], a])
            return ll
        known = set(obs.record.hands()[1 - opp]) | set(end.board)
        candidates = [tree.class_of(h) for h in tree.raw_hands if known.isdisjoint(h)]
        if not moves:
            return np.full(n, np.log(len(candidates)))
        classes = np.asarray(candidates)
        terms = np.zeros((n, len(classes)))
        for node, a in moves:
            terms += np.log(probs[:, node.idx[classes], a])
        return logsumexp(terms, axis=1)


def showdown_log_likelihood(beta: BehaviourStrategy, obs: Observation) -> float:
    if obs.kind != SHOWDOWN:
        raise ValueError("showdown likelihood needs a showdown observation")
    return float(ensemble_log_likelihood(beta.tree, beta.probs[None], obs, beta.seat)[0])


def fold_log_likelihood(beta: BehaviourStrategy, obs: Observation) -> float:
    if obs.kind != FOLD_END:
        raise ValueError("fold likelihood needs a fold observation")
    return float(ensemble_log_likelihood(beta.tree, beta.probs[None], obs, beta.seat)[0])


def log_likelihood(beta: BehaviourStrategy, obs: Observation) -> float:
    return float(ensemble_log_likelihood(beta.tree, beta.probs[None], obs, beta.seat)[0])


@dataclass(frozen=True)
class PosteriorEnsemble:
    ensemble: StrategyEnsemble
    log_weights: np.ndarray
    observation_count: int = 0
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lw = np.array(self.log_weights, dtype=np.float64)
        if lw.shape != (len(self.ensemble),):
            raise ValueError("one log-weight per ensemble member is required")
        lw -= logsumexp(lw)
        lw.setflags(write=False)
        object.__setattr__(self, "log_weights", lw)
        w = np.exp(lw)
        w.setflags(write=False)
        object.__setattr__(self, "_weights", w)

    @classmethod
    def from_prior(cls, ensemble: StrategyEnsemble) -> "PosteriorEnsemble":
        return cls(ensemble, np.zeros(len(ensemble)))

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def tree(self) -> GameTree:
        return self.ensemble.tree

    def log_likelihoods(self, obs: Observation) -> np.ndarray:
        return ensemble_log_likelihood(self.tree, self.ensemble.probs, obs, self.ensemble.seat)

    def update(self, obs: Observation) -> "PosteriorEnsemble":
        decisions, _ = replay(self.tree.spec, obs.record)
        if not any(d.seat == self.ensemble.seat for d in decisions):
            # the opponent never acted: every sample explains the hand equally
            return self._counted()
        lw = self.log_weights + self.log_likelihoods(obs)
        if not np.any(np.isfinite(lw)):
            raise PosteriorDegenerate(
                "posterior degenerate: every sample rules out the observation")
        return PosteriorEnsemble(self.ensemble, lw, self.observation_count + 1)

    def _counted(self) -> "PosteriorEnsemble":
        # copy without renormalizing, so the weights stay bit-identical
        new = object.__new__(PosteriorEnsemble)
        for name in ("ensemble", "log_weights", "_weights"):
            object.__setattr__(new, name, getattr(self, name))
        object.__setattr__(new, "observation_count", self.observation_count + 1)
        return new

    def effective_sample_size(self) -> float:
        return float(1.0 / np.sum(self.weights ** 2))

    def map_index(self) -> int:
        return int(np.argmax(self.log_weights))  # first maximum wins ties

    def thompson_draw(self, rng: np.random.Generator) -> int:
        cdf = np.cumsum(self.weights)
        j = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        return min(j, len(cdf) - 1)

    def diagnostics(self) -> dict:
        return {"ess": self.effective_sample_size(), "max_weight": float(self.weights.max()),
                "map_index": self.map_index()}

    def save(self, path):
        t = self.tree
        np.savez(path, probs=self.ensemble.probs, log_weights=self.log_weights,
                 observation_count=self.observation_count, seat=self.ensemble.seat,
                 game=t.spec.name, canonical=t.canonical)

    @classmethod
    def load(cls, path, spec=None) -> "PosteriorEnsemble":
        from .game import load_spec
        from .tree import get_tree
        with np.load(path) as data:
            name = str(data["game"])
            if spec is None:
                spec = load_spec(name)
            elif spec.name != name:
                raise GameError(f"posterior is for game {name!r}")
            tree = get_tree(spec, bool(data["canonical"]))
            ens = StrategyEnsemble(tree, int(data["seat"]), data["probs"])
            return cls(ens, data["log_weights"], int(data["observation_count"]))


def update_posterior(post: PosteriorEnsemble, obs: Observation) -> PosteriorEnsemble:
    return post.update(obs)


def effective_sample_size(post: PosteriorEnsemble) -> float:
    return post.effective_sample_size()


def map_index(post: PosteriorEnsemble) -> int:
    return post.map_index()


def thompson_draw(post: PosteriorEnsemble, rng: np.random.Generator) -> int:
    return post.thompson_draw(rng)
