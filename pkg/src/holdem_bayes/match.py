"""Hand-by-hand play between two agents, with bankroll accounting."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .agents import Agent, OracleBestResponse, View
from .game import (
    GameError, HandRecord, apply_action, build_record, deal_board, initial_state,
    legal_actions, pending_board_cards, terminal_payoff,
)
from .inference import observe
from .tree import GameTree

STREAMS = ("deck", "init0", "act0", "thompson0", "init1", "act1", "thompson1")


class IllegalAgentAction(GameError):
    pass


def trial_streams(master_seed: int, trial_index: int) -> dict[str, np.random.Generator]:
    """Independent named generators for one trial.

    Each consumer owns its stream, so extra draws in one never shift another.
    """
    return {name: np.random.default_rng(np.random.SeedSequence(
        entropy=master_seed, spawn_key=(trial_index, code)))
        for code, name in enumerate(STREAMS)}


def seat_streams(streams: dict, seat: int) -> dict:
    return {k: streams[f"{k}{seat}"] for k in ("init", "act", "thompson")}


def play_hand(tree: GameTree, agents: Sequence[Agent], rng: np.random.Generator):
    """Deal and play one hand. Returns the oracle-view record and P1's net chips."""
    spec = tree.spec
    order = rng.permutation(len(spec.deck))
    cards = [spec.deck[i] for i in order]
    p = spec.private_cards
    hands = (tuple(cards[:p]), tuple(cards[p:2 * p]))
    board_src = iter(cards[2 * p:])

    for ag in agents:
        ag.begin_hand()
    state = initial_state(spec)
    events = []
    while not state.is_terminal:
        need = pending_board_cards(spec, state)
        if need:
            dealt = tuple(next(board_src) for _ in range(need))
            state = deal_board(spec, state, dealt)
            events.append(("board", dealt))
            continue
        seat = state.to_act
        action = agents[seat].act(View(seat, hands[seat], state))
        if action not in legal_actions(spec, state):
            raise IllegalAgentAction(
                f"agent {agents[seat].name} (P{seat + 1}) chose illegal {action!r} in {state}")
        state = apply_action(spec, state, action)
        events.append((seat, action))

    record = build_record(spec, hands[0], hands[1], events)
    net = terminal_payoff(spec, state, hands[0], hands[1])
    for seat, ag in enumerate(agents):
        ag.observe_hand_end(observe(spec, record, seat))
    return record, net


@dataclass
class MatchLog:
    agents: tuple[str, str]
    master_seed: int
    trial_index: int
    records: list[HandRecord] = field(default_factory=list)
    nets: list[int] = field(default_factory=list)
    diagnostics: list[list] = field(default_factory=lambda: [[], []])

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(np.asarray(self.nets, dtype=np.float64))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["hand_index", "p1_net", "p1_cumulative"])
        for i, (n, c) in enumerate(zip(self.nets, self.cumulative), start=1):
            w.writerow([i, n, f"{c:.17g}"])
        return buf.getvalue()


def run_trial(tree: GameTree, agents: Sequence[Agent], hands: int, master_seed: int = 0,
              trial_index: int = 0) -> MatchLog:
    if hands < 1:
        raise ValueError("a trial needs at least one hand")
    streams = trial_streams(master_seed, trial_index)
    # oracles read their opponent's freshly drawn strategy, so start them last
    for seat in sorted((0, 1), key=lambda s: isinstance(agents[s], OracleBestResponse)):
        agents[seat].start_trial(tree, seat, seat_streams(streams, seat), agents[1 - seat])
    log = MatchLog((agents[0].name, agents[1].name), master_seed, trial_index)
    for _ in range(hands):
        record, net = play_hand(tree, agents, streams["deck"])
        log.records.append(record)
        log.nets.append(net)
        for seat in (0, 1):
            d = agents[seat].diagnostics()
            if d is not None:
                log.diagnostics[seat].append(d)
    return log
