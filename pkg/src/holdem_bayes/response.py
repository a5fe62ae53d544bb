"""Best responses to single strategies and to weighted strategy ensembles.

The Bayesian best response walks the public tree once. Opponent reach is
kept per (ensemble sample, opponent hand class), so each sample's actions
stay correlated across the hand rather than being blended into one mean
strategy. At the responder's own nodes the child values are maximized per
information set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .strategy import BehaviourStrategy, StrategyEnsemble
from .tree import Chance, GameTree, Terminal


class ResponseError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedOpponent:
    ensemble: StrategyEnsemble
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(self.ensemble),):
            raise ValueError("one weight per ensemble member is required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be a probability vector")
        object.__setattr__(self, "weights", w)

    @classmethod
    def single(cls, beta: BehaviourStrategy) -> "WeightedOpponent":
        return cls(StrategyEnsemble(beta.tree, beta.seat, beta.probs[None]), np.ones(1))


@dataclass(frozen=True)
class ResponseResult:
    strategy: BehaviourStrategy  # pure
    value: float  # responder's expected chips per hand


def _resp_matrix(U: np.ndarray, seat: int) -> np.ndarray:
    return U if seat == 0 else -U.T


def _backup(node, seat: int, opp_probs: np.ndarray, reach: np.ndarray,
            choice: np.ndarray) -> np.ndarray:
    """Value per responder hand class; ``reach`` is (samples, opponent classes)."""
    if isinstance(node, Terminal):
        return _resp_matrix(node.U, seat) @ reach.sum(axis=0)
    if isinstance(node, Chance):
        total = _backup(node.children[0], seat, opp_probs, reach, choice)
        for child in node.children[1:]:
            total = total + _backup(child, seat, opp_probs, reach, choice)
        return total
    if node.seat != seat:
        local = opp_probs[:, node.idx_safe, :]
        total = None
        for a, child in zip(node.actions, node.children):
            v = _backup(child, seat, opp_probs, reach * local[:, :, a], choice)
            total = v if total is None else total + v
        return total
    values = np.stack([_backup(child, seat, opp_probs, reach, choice)
                       for child in node.children])
    # argmax keeps the first maximum: ties go to the lowest action in Fold<Call<Raise
    best = np.argmax(values, axis=0)
    acts = np.asarray(node.actions)
    choice[node.idx[node.valid]] = acts[best[node.valid]]
    return values[best, np.arange(values.shape[1])]


def bayesian_best_response(tree: GameTree, opp: WeightedOpponent,
                           seat: int = 0) -> ResponseResult:
    if opp.ensemble.tree is not tree:
        raise ResponseError("opponent strategies belong to a different game tree")
    if opp.ensemble.seat != 1 - seat:
        raise ResponseError(f"responder is P{seat + 1} but the opponent strategies are "
                            f"for P{opp.ensemble.seat + 1}")
    keep = opp.weights > 0  # zero-weight samples contribute nothing
    probs = opp.ensemble.probs[keep]
    reach = np.repeat(opp.weights[keep][:, None], tree.n_hands, axis=1)
    choice = np.ones(tree.n_infosets(seat), dtype=np.int64)
    value = float(_backup(tree.root, seat, probs, reach, choice).sum())
    pure = np.zeros((tree.n_infosets(seat), 3))
    pure[np.arange(len(choice)), choice] = 1.0
    return ResponseResult(BehaviourStrategy(tree, seat, pure), value)


def best_response(tree: GameTree, beta: BehaviourStrategy, seat: Optional[int] = None) -> ResponseResult:
    seat = 1 - beta.seat if seat is None else seat
    return bayesian_best_response(tree, WeightedOpponent.single(beta), seat)


def map_response(tree: GameTree, post, seat: int = 0) -> ResponseResult:
    return best_response(tree, post.ensemble[post.map_index()], seat)


def thompson_response(tree: GameTree, post, rng: np.random.Generator,
                      seat: int = 0) -> ResponseResult:
    return best_response(tree, post.ensemble[post.thompson_draw(rng)], seat)


# -- exact evaluation ---------------------------------------------------------------


def _evaluate(node, p1: np.ndarray, p2: np.ndarray, r1: np.ndarray, r2: np.ndarray) -> float:
    """P1's expected value; ``r2`` may carry a leading sample axis."""
    if isinstance(node, Terminal):
        m2 = r2.sum(axis=0) if r2.ndim == 2 else r2
        return float(r1 @ node.U @ m2)
    if isinstance(node, Chance):
        return sum(_evaluate(c, p1, p2, r1, r2) for c in node.children)
    total = 0.0
    if node.seat == 0:
        local = p1[node.idx_safe]
        for a, child in zip(node.actions, node.children):
            total += _evaluate(child, p1, p2, r1 * local[:, a], r2)
    else:
        local = p2[:, node.idx_safe] if p2.ndim == 3 else p2[node.idx_safe]
        for a, child in zip(node.actions, node.children):
            total += _evaluate(child, p1, p2, r1, r2 * local[..., a])
    return total


def expected_value(tree: GameTree, p1: BehaviourStrategy,
                   p2: Union[BehaviourStrategy, WeightedOpponent]) -> float:
    """P1's exact expected chips per hand; ``p2`` may be a weighted ensemble."""
    r1 = np.ones(tree.n_hands)
    if isinstance(p2, WeightedOpponent):
        probs = p2.ensemble.probs
        r2 = np.repeat(p2.weights[:, None], tree.n_hands, axis=1)
    else:
        probs = p2.probs
        r2 = np.ones(tree.n_hands)
    return _evaluate(tree.root, p1.probs, probs, r1, r2)


def exploitability(tree: GameTree, pair: Sequence[BehaviourStrategy]) -> float:
    """Sum of both seats' best-response gains against the pair; zero iff Nash."""
    p1, p2 = pair
    return best_response(tree, p2, 0).value + best_response(tree, p1, 1).value


def mean_strategy(opp: WeightedOpponent) -> BehaviourStrategy:
    """Weight-averaged table; a point estimate that ignores within-hand correlation."""
    ens = opp.ensemble
    return BehaviourStrategy(ens.tree, ens.seat, np.tensordot(opp.weights, ens.probs, axes=1))

