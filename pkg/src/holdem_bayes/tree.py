"""Compiled public game tree shared by response, inference and solving code.

Private hands are grouped into classes: with canonical keys a class is a rank
multiset (suits never affect Kuhn/Leduc showdowns), otherwise it is the raw
hand. Boards are grouped the same way, so every information set sits at
exactly one (decision node, hand class) pair. Terminal nodes carry a payoff
matrix ``U[c, d]``: P1's net chips times the total probability of dealing a
P1 hand in class ``c``, a P2 hand in class ``d`` and a board in the node's
board class. Summing ``U`` weighted by the two players' reach probabilities
gives an exact expected value.
"""

from __future__ import annotations

import dataclasses
import itertools
from functools import lru_cache
from typing import Optional

import numpy as np

from .game import (
    ACTIONS, Card, GameSpec, InfoSetKey, PublicState, apply_action,
    board_groups, canonical_cards, deal_board, deal_count, enumerate_infosets,
    initial_state, legal_actions, pending_board_cards, private_hands,
    terminal_payoff,
)


class Terminal:
    __slots__ = ("state", "U")

    def __init__(self, state, U):
        self.state = state
        self.U = U


class Chance:
    __slots__ = ("state", "children")

    def __init__(self, state, children):
        self.state = state
        self.children = children


class DecisionNode:
    __slots__ = ("state", "seat", "actions", "children", "idx", "idx_safe",
                 "valid", "legal")

    def __init__(self, state, seat, actions):
        self.state = state
        self.seat = seat
        self.actions = actions
        self.children = []
        self.idx = None       # infoset index per hand class, -1 if impossible
        self.idx_safe = None  # same with -1 replaced by 0, for gathers
        self.valid = None
        self.legal = np.array([a in actions for a in ACTIONS])


class GameTree:
    def __init__(self, spec: GameSpec, canonical: bool = True):
        self.spec = spec
        self.canonical = canonical
        self.raw_hands = private_hands(spec)
        self.hand_classes: list[tuple] = []
        self._class_of: dict[tuple, int] = {}
        for h in self.raw_hands:
            label = canonical_cards(h, canonical)
            if label not in self._class_of:
                self._class_of[label] = len(self.hand_classes)
                self.hand_classes.append(label)
        self.n_hands = len(self.hand_classes)

        self.infosets = [enumerate_infosets(spec, s, canonical) for s in (0, 1)]
        self.index = [{k: i for i, k in enumerate(keys)} for keys in self.infosets]
        self.by_name = [{str(k): i for i, k in enumerate(keys)} for keys in self.infosets]
        self.legal_mask = [np.zeros((len(k), 3), dtype=bool) for k in self.infosets]
        self.infoset_node: list[list[Optional[DecisionNode]]] = [
            [None] * len(k) for k in self.infosets]
        self.infoset_class = [np.zeros(len(k), dtype=np.int64) for k in self.infosets]

        self._nodes: dict[tuple, DecisionNode] = {}
        self._raw_boards = self._enumerate_raw_boards()
        self.decision_nodes: list[DecisionNode] = []
        self.terminals: list[Terminal] = []
        self.root = self._build(initial_state(spec))

    # -- construction ---------------------------------------------------------

    def board_class(self, board) -> tuple:
        return tuple(canonical_cards(g, self.canonical)
                     for g in board_groups(self.spec, board))

    def _enumerate_raw_boards(self) -> dict[tuple, list[tuple[Card, ...]]]:
        spec = self.spec
        out: dict[tuple, list] = {}

        def walk(board, r):
            out.setdefault(self.board_class(board), []).append(board)
            if r == len(spec.rounds):
                return
            n = spec.rounds[r].board_cards
            if n == 0:
                walk(board, r + 1)
                return
            rest = [c for c in spec.deck if c not in board]
            for combo in itertools.combinations(rest, n):
                walk(board + combo, r + 1)

        walk((), 0)
        for k in out:
            out[k] = list(dict.fromkeys(out[k]))
        return out

    def _build(self, state: PublicState):
        spec = self.spec
        if state.is_terminal:
            node = Terminal(state, self._payoff_matrix(state))
            self.terminals.append(node)
            return node
        if state.awaiting_board:
            used = set(state.board)
            rest = [c for c in spec.deck if c not in used]
            seen = {}
            for combo in itertools.combinations(rest, pending_board_cards(spec, state)):
                seen.setdefault(canonical_cards(combo, self.canonical), combo)
            return Chance(state, [self._build(deal_board(spec, state, combo))
                                  for combo in seen.values()])
        seat = state.to_act
        node = DecisionNode(state, seat, legal_actions(spec, state))
        bclass = self.board_class(state.board)
        idx = np.full(self.n_hands, -1, dtype=np.int64)
        for c, label in enumerate(self.hand_classes):
            i = self.index[seat].get(InfoSetKey(seat, label, bclass, state.betting))
            if i is not None:
                idx[c] = i
                self.legal_mask[seat][i] = node.legal
                self.infoset_node[seat][i] = node
                self.infoset_class[seat][i] = c
        node.idx = idx
        node.valid = idx >= 0
        node.idx_safe = np.where(node.valid, idx, 0)
        self._nodes[(bclass, state.betting)] = node
        self.decision_nodes.append(node)
        node.children = [self._build(apply_action(spec, state, a)) for a in node.actions]
        return node

    def _payoff_matrix(self, state: PublicState) -> np.ndarray:
        spec = self.spec
        U = np.zeros((self.n_hands, self.n_hands))
        boards = self._raw_boards[self.board_class(state.board)]
        weight = 1.0 / deal_count(spec, len(state.board))
        for C in self.raw_hands:
            c = self.class_of(C)
            for D in self.raw_hands:
                if not set(C).isdisjoint(D):
                    continue
                d = self.class_of(D)
                for B in boards:
                    if set(B).isdisjoint(C) and set(B).isdisjoint(D):
                        s = dataclasses.replace(state, board=B)
                        U[c, d] += weight * terminal_payoff(spec, s, C, D)
        return U

    # -- lookups ----------------------------------------------------------------

    def class_of(self, hand) -> int:
        return self._class_of[canonical_cards(hand, self.canonical)]

    def node_for(self, state: PublicState) -> DecisionNode:
        return self._nodes[(self.board_class(state.board), state.betting)]

    def infoset_of(self, seat: int, hand, state: PublicState) -> int:
        i = self.node_for(state).idx[self.class_of(hand)]
        if i < 0:
            raise KeyError(f"no infoset for P{seat + 1} holding {hand} in {state}")
        return int(i)

    def n_infosets(self, seat: int) -> int:
        return len(self.infosets[seat])

    def __reduce__(self):
        # unpickle to the process-wide shared instance
        return (get_tree, (self.spec, self.canonical))


def get_tree(spec: GameSpec, canonical: bool = True) -> GameTree:
    """Shared tree per (game, canonical); strategies compare trees by identity."""
    return _tree(spec, bool(canonical))


@lru_cache(maxsize=None)
def _tree(spec: GameSpec, canonical: bool) -> GameTree:
    return GameTree(spec, canonical)
