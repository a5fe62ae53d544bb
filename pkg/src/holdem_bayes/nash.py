"""Approximate Nash equilibria by CFR+ self-play, certified by exploitability."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .response import expected_value, exploitability
from .strategy import BehaviourStrategy
from .tree import Chance, GameTree, Terminal, get_tree

log = logging.getLogger(__name__)


class NashNotCertified(RuntimeError):
    def __init__(self, pair, exploitability_value, iterations):
        super().__init__(f"exploitability {exploitability_value:.6g} after {iterations} "
                         "iterations is above the requested epsilon")
        self.pair = pair
        self.exploitability = exploitability_value
        self.iterations = iterations


@dataclass(frozen=True)
class NashResult:
    pair: tuple[BehaviourStrategy, BehaviourStrategy]
    exploitability: float
    iterations: int
    value: float  # P1's expected value of the pair


class CFRPlus:
    """Alternating-update CFR+ with linearly weighted strategy averaging."""

    def __init__(self, tree: GameTree, seed: Optional[int] = None):
        self.tree = tree
        self.legal = [m.astype(np.float64) for m in tree.legal_mask]
        self.regret = [np.zeros_like(m) for m in self.legal]
        if seed is not None:
            # seeds only change the starting point, not the fixed point
            rng = np.random.default_rng(seed)
            self.regret = [rng.uniform(0.0, 0.1, m.shape) * m for m in self.legal]
        self.avg = [np.zeros_like(m) for m in self.legal]
        self.iterations = 0

    def current(self, seat: int) -> np.ndarray:
        r = self.regret[seat]
        total = r.sum(axis=1, keepdims=True)
        uniform = self.legal[seat] / self.legal[seat].sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(total > 0, r / total, uniform)

    def average(self, seat: int) -> BehaviourStrategy:
        a = self.avg[seat]
        total = a.sum(axis=1, keepdims=True)
        uniform = self.legal[seat] / self.legal[seat].sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            probs = np.where(total > 0, a / total, uniform)
        return BehaviourStrategy(self.tree, seat, probs)

    def iterate(self, n: int = 1):
        for _ in range(n):
            self.iterations += 1
            for seat in (0, 1):
                sigma = [self.current(0), self.current(1)]
                ones = np.ones(self.tree.n_hands)
                self._walk(self.tree.root, seat, sigma, ones, ones)

    def _walk(self, node, seat, sigma, r_own, r_opp):
        if isinstance(node, Terminal):
            U = node.U if seat == 0 else -node.U.T
            return U @ r_opp
        if isinstance(node, Chance):
            total = 0.0
            for child in node.children:
                total = total + self._walk(child, seat, sigma, r_own, r_opp)
            return total
        local = sigma[node.seat][node.idx_safe]
        if node.seat != seat:
            total = 0.0
            for a, child in zip(node.actions, node.children):
                total = total + self._walk(child, seat, sigma, r_own, r_opp * local[:, a])
            return total
        values = np.zeros((self.tree.n_hands, 3))
        for a, child in zip(node.actions, node.children):
            values[:, a] = self._walk(child, seat, sigma, r_own * local[:, a], r_opp)
        v = (values * local).sum(axis=1)
        idx = node.idx[node.valid]
        ok = node.valid
        legal = self.legal[seat][idx]
        self.regret[seat][idx] = np.maximum(
            self.regret[seat][idx] + (values[ok] - v[ok, None]) * legal, 0.0)
        self.avg[seat][idx] += self.iterations * r_own[ok, None] * local[ok]
        return v


def solve_nash(tree: GameTree, epsilon: float = 0.005, seed: Optional[int] = None,
               max_iterations: int = 100_000, check_every: int = 50) -> NashResult:
    """Run CFR+ until the averaged pair's exploitability is certified <= epsilon."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    solver = CFRPlus(tree, seed)
    best = None
    while solver.iterations < max_iterations:
        solver.iterate(min(check_every, max_iterations - solver.iterations))
        pair = (solver.average(0), solver.average(1))
        expl = exploitability(tree, pair)
        log.debug("iteration %d exploitability %.6g", solver.iterations, expl)
        if best is None or expl < best[1]:
            best = (pair, expl)
        if expl <= epsilon:
            return NashResult(pair, expl, solver.iterations, expected_value(tree, *pair))
    raise NashNotCertified(best[0], best[1], solver.iterations)


@lru_cache(maxsize=8)
def cached_nash(spec, canonical: bool, epsilon: float, seed: Optional[int]) -> NashResult:
    return solve_nash(get_tree(spec, canonical), epsilon, seed)
