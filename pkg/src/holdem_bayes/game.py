"""Limit hold'em variants described as data, plus the rules that drive them.

Everything here is immutable and pure. A hand is played by threading a
:class:`PublicState` through :func:`apply_action` and :func:`deal_board`;
private cards never live in the public state.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Iterator, Optional, Sequence

RANK_CHARS = "23456789TJQKA"
SUIT_CHARS = "shdc"


class GameError(ValueError):
    """Raised on illegal play or malformed game data."""


class Action(enum.IntEnum):
    FOLD = 0
    CALL = 1
    RAISE = 2

    @property
    def char(self) -> str:
        return "fcr"[self]

    @classmethod
    def from_char(cls, c: str) -> "Action":
        try:
            return cls("fcr".index(c))
        except ValueError:
            raise GameError(f"unknown action character {c!r}") from None


ACTIONS = (Action.FOLD, Action.CALL, Action.RAISE)


@dataclass(frozen=True, order=True)
class Card:
    rank: int  # 2..14, higher is stronger
    suit: int

    def __str__(self) -> str:
        return RANK_CHARS[self.rank - 2] + SUIT_CHARS[self.suit]

    @classmethod
    def parse(cls, text: str) -> "Card":
        if len(text) != 2 or text[0] not in RANK_CHARS or text[1] not in SUIT_CHARS:
            raise GameError(f"bad card {text!r}")
        return cls(RANK_CHARS.index(text[0]) + 2, SUIT_CHARS.index(text[1]))


def rank_char(rank: int) -> str:
    return RANK_CHARS[rank - 2]


@dataclass(frozen=True)
class RoundSpec:
    board_cards: int
    raise_size: int
    max_raises: int


@dataclass(frozen=True)
class GameSpec:
    name: str
    deck: tuple[Card, ...]
    private_cards: int
    rounds: tuple[RoundSpec, ...]
    antes: tuple[int, int]
    max_decisions: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if len(set(self.deck)) != len(self.deck):
            raise GameError("deck contains duplicate cards")
        if not self.rounds:
            raise GameError("a game needs at least one betting round")
        for r in self.rounds:
            if r.raise_size <= 0:
                raise GameError("raise_size must be positive")
            if r.max_raises < 1:
                raise GameError("max_raises must be at least 1")
            if r.board_cards < 0:
                raise GameError("board_cards must be nonnegative")
        if self.private_cards < 1:
            raise GameError("private_cards must be at least 1")
        needed = 2 * self.private_cards + sum(r.board_cards for r in self.rounds)
        if needed > len(self.deck):
            raise GameError(f"deck of {len(self.deck)} cards cannot deal {needed}")
        if len(self.antes) != 2 or min(self.antes) < 0:
            raise GameError("antes must be two nonnegative amounts")
        object.__setattr__(self, "max_decisions", _longest_line(self))

    @property
    def board_total(self) -> int:
        return sum(r.board_cards for r in self.rounds)

    def board_before_round(self, round_index: int) -> int:
        """Number of board cards visible once ``round_index`` has been dealt."""
        return sum(r.board_cards for r in self.rounds[: round_index + 1])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "deck": [str(c) for c in self.deck],
            "private_cards": self.private_cards,
            "rounds": [
                {"board_cards": r.board_cards, "raise_size": r.raise_size,
                 "max_raises": r.max_raises}
                for r in self.rounds
            ],
            "antes": list(self.antes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameSpec":
        if "deck" in data:
            deck = tuple(Card.parse(c) for c in data["deck"])
        else:
            ranks, suits = data["ranks"], data["suits"]
            deck = tuple(Card(RANK_CHARS.index(r) + 2, SUIT_CHARS.index(s))
                         for r in ranks for s in suits)
        return cls(
            name=data["name"],
            deck=deck,
            private_cards=int(data.get("private_cards", 1)),
            rounds=tuple(RoundSpec(int(r["board_cards"]), int(r["raise_size"]),
                                   int(r["max_raises"])) for r in data["rounds"]),
            antes=tuple(int(a) for a in data["antes"]),
        )


def leduc() -> GameSpec:
    deck = tuple(Card(rank, suit) for rank in (11, 12, 13) for suit in (0, 1))
    return GameSpec("leduc", deck, 1, (RoundSpec(0, 2, 2), RoundSpec(1, 4, 2)), (1, 1))


def kuhn() -> GameSpec:
    deck = tuple(Card(rank, 0) for rank in (11, 12, 13))
    return GameSpec("kuhn", deck, 1, (RoundSpec(0, 1, 1),), (1, 1))


BUILTIN_GAMES = {"leduc": leduc, "kuhn": kuhn}


def load_spec(name_or_path: str) -> GameSpec:
    """Return a built-in game by name, or read one from a JSON config file."""
    if name_or_path in BUILTIN_GAMES:
        return BUILTIN_GAMES[name_or_path]()
    try:
        with open(name_or_path) as fh:
            return GameSpec.from_dict(json.load(fh))
    except FileNotFoundError:
        raise GameError(f"unknown game {name_or_path!r}") from None


# -- public state -------------------------------------------------------------

FOLD_END = "fold"
SHOWDOWN = "showdown"


@dataclass(frozen=True)
class PublicState:
    round_index: int
    betting: tuple[tuple[Action, ...], ...]  # one tuple per round reached
    board: tuple[Card, ...]
    contributions: tuple[int, int]
    to_act: Optional[int]
    terminal: Optional[str] = None
    winner: Optional[int] = None  # set for FOLD_END only

    @property
    def action_history(self) -> tuple[tuple[int, Action], ...]:
        # P1 opens every round and play alternates
        return tuple((i % 2, a) for rnd in self.betting for i, a in enumerate(rnd))

    @property
    def is_terminal(self) -> bool:
        return self.terminal is not None

    @property
    def awaiting_board(self) -> bool:
        return self.terminal is None and self.to_act is None

    @property
    def last_action(self) -> Optional[Action]:
        for rnd in reversed(self.betting):
            if rnd:
                return rnd[-1]
        return None


def initial_state(spec: GameSpec) -> PublicState:
    to_act = None if spec.rounds[0].board_cards else 0
    return PublicState(0, ((),), (), tuple(spec.antes), to_act)


def legal_actions(spec: GameSpec, state: PublicState) -> tuple[Action, ...]:
    if state.is_terminal:
        raise GameError("no actions at terminal state")
    if state.to_act is None:
        raise GameError("board cards must be dealt before acting")
    rnd = state.betting[state.round_index]
    acts = []
    if state.contributions[0] != state.contributions[1]:
        acts.append(Action.FOLD)
    acts.append(Action.CALL)
    if rnd.count(Action.RAISE) < spec.rounds[state.round_index].max_raises:
        acts.append(Action.RAISE)
    return tuple(acts)


def apply_action(spec: GameSpec, state: PublicState, action: Action) -> PublicState:
    if state.is_terminal or state.to_act is None:
        raise GameError(f"cannot apply {Action(action).name} to {state}")
    if action not in legal_actions(spec, state):
        raise GameError(f"illegal action {Action(action).name} in state {state}")
    seat, opp = state.to_act, 1 - state.to_act
    r = state.round_index
    rnd = state.betting[r] + (Action(action),)
    betting = state.betting[:r] + (rnd,)
    contrib = list(state.contributions)

    if action == Action.FOLD:
        return PublicState(r, betting, state.board, state.contributions, None,
                           FOLD_END, opp)
    if action == Action.RAISE:
        contrib[seat] = contrib[opp] + spec.rounds[r].raise_size
        return PublicState(r, betting, state.board, tuple(contrib), opp)

    contrib[seat] = contrib[opp]
    if len(rnd) == 1:
        return PublicState(r, betting, state.board, tuple(contrib), opp)
    # a call that is not the round's first action closes the round
    if r + 1 == len(spec.rounds):
        return PublicState(r, betting, state.board, tuple(contrib), None, SHOWDOWN)
    to_act = None if spec.rounds[r + 1].board_cards else 0
    return PublicState(r + 1, betting + ((),), state.board, tuple(contrib), to_act)


def pending_board_cards(spec: GameSpec, state: PublicState) -> int:
    if not state.awaiting_board:
        return 0
    return spec.board_before_round(state.round_index) - len(state.board)


def deal_board(spec: GameSpec, state: PublicState, cards: Sequence[Card]) -> PublicState:
    need = pending_board_cards(spec, state)
    if need == 0 or len(cards) != need:
        raise GameError(f"expected {need} board cards, got {len(cards)}")
    board = state.board + tuple(cards)
    if len(set(board)) != len(board):
        raise GameError("duplicate board card")
    return PublicState(state.round_index, state.betting, board, state.contributions, 0)


def board_groups(spec: GameSpec, board: Sequence[Card]) -> list[tuple[Card, ...]]:
    """Split a flat board into the per-round reveals it came from."""
    out, start = [], 0
    for r in spec.rounds:
        if start >= len(board):
            break
        if r.board_cards:
            out.append(tuple(board[start:start + r.board_cards]))
            start += r.board_cards
    return out


def _longest_line(spec: GameSpec) -> int:
    """Most decision steps any hand can need; a step is one P1 and one P2 slot."""
    best = 0

    def walk(state, steps, p1_in_step):
        nonlocal best
        if state.is_terminal:
            best = max(best, steps)
            return
        if state.to_act is None:
            # board contents do not change the betting tree
            walk(PublicState(state.round_index, state.betting, state.board,
                             state.contributions, 0), steps, False)
            return
        for a in legal_actions(spec, state):
            nxt = apply_action(spec, state, a)
            if state.to_act == 0:
                walk(nxt, steps + 1, True)
            else:
                walk(nxt, steps if p1_in_step else steps + 1, False)

    walk(initial_state(spec), 0, False)
    return best


# -- showdown -----------------------------------------------------------------

P1_WINS, P2_WINS, SPLIT = 1, -1, 0


def hand_strength(cards: Iterable[Card]) -> tuple:
    """Comparable strength: rank multiplicity first (pairs beat singles), then rank.

    Suits never matter, so this covers Kuhn and Leduc exactly but knows nothing
    of straights or flushes.
    """
    counts: dict[int, int] = {}
    for c in cards:
        counts[c.rank] = counts.get(c.rank, 0) + 1
    return tuple(sorted(((n, r) for r, n in counts.items()), reverse=True))


def showdown_value(spec: GameSpec, C: Sequence[Card], D: Sequence[Card],
                   board: Sequence[Card]) -> int:
    allc = list(C) + list(D) + list(board)
    if len(set(allc)) != len(allc):
        raise GameError("card collision between hands and board")
    if len(C) != spec.private_cards or len(D) != spec.private_cards:
        raise GameError("wrong number of private cards")
    if len(board) != spec.board_total:
        raise GameError("showdown needs the full board")
    s1 = hand_strength(list(C) + list(board))
    s2 = hand_strength(list(D) + list(board))
    return P1_WINS if s1 > s2 else P2_WINS if s2 > s1 else SPLIT


def terminal_payoff(spec: GameSpec, state: PublicState,
                    C: Optional[Sequence[Card]] = None,
                    D: Optional[Sequence[Card]] = None) -> int:
    """Net chips won by P1 at a terminal state."""
    if state.terminal == FOLD_END:
        return state.contributions[1] if state.winner == 0 else -state.contributions[0]
    if state.terminal == SHOWDOWN:
        if C is None or D is None:
            raise GameError("showdown payoff needs both private hands")
        outcome = showdown_value(spec, C, D, state.board)
        if outcome == SPLIT:
            return 0  # stakes are level at showdown
        return state.contributions[1] if outcome == P1_WINS else -state.contributions[0]
    raise GameError("payoff requested for a non-terminal state")


# -- hand records ---------------------------------------------------------------


@dataclass(frozen=True)
class HandRecord:
    """One hand as fixed-length decision steps.

    Step ``i`` holds the board cards revealed before it (``R[i]``), then P1's
    decision ``A[i]`` and P2's decision ``B[i]``. Slots where the player does
    not actually decide (after the hand ended, or when P1's call closed the
    round) hold ``Action.FOLD`` as padding. ``D`` is ``None`` when unobserved.
    """

    C: tuple[Card, ...]
    D: Optional[tuple[Card, ...]]
    R: tuple[tuple[Card, ...], ...]
    A: tuple[Action, ...]
    B: tuple[Action, ...]

    def hands(self) -> tuple[Optional[tuple[Card, ...]], Optional[tuple[Card, ...]]]:
        return (self.C, self.D)

    def with_hidden(self, seat: int) -> "HandRecord":
        """Copy with ``seat``'s private cards removed."""
        if seat == 0:
            return HandRecord(None, self.D, self.R, self.A, self.B)
        return HandRecord(self.C, None, self.R, self.A, self.B)

    def to_dict(self) -> dict:
        return {
            "C": [str(c) for c in self.C] if self.C is not None else None,
            "D": [str(c) for c in self.D] if self.D is not None else None,
            "R": [[str(c) for c in r] for r in self.R],
            "A": "".join(a.char for a in self.A),
            "B": "".join(b.char for b in self.B),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HandRecord":
        def cards(x):
            return None if x is None else tuple(Card.parse(c) for c in x)
        return cls(cards(data["C"]), cards(data["D"]),
                   tuple(tuple(Card.parse(c) for c in r) for r in data["R"]),
                   tuple(Action.from_char(c) for c in data["A"]),
                   tuple(Action.from_char(c) for c in data["B"]))


@dataclass(frozen=True)
class Decision:
    step: int
    seat: int
    state: PublicState  # state in which the decision was taken
    action: Action


def build_record(spec: GameSpec, C, D, events) -> HandRecord:
    """Assemble a padded record from a played event stream.

    ``events`` is a sequence of ``("board", cards)`` or ``(seat, action)``.
    """
    k = spec.max_decisions
    R: list[list[Card]] = [[] for _ in range(k)]
    A = [Action.FOLD] * k
    B = [Action.FOLD] * k
    step = -1
    pending: list[Card] = []
    for who, what in events:
        if who == "board":
            pending.extend(what)
        elif who == 0:
            step += 1
            R[step] = pending
            pending = []
            A[step] = Action(what)
        else:
            if step < 0:
                raise GameError("P2 cannot act before P1 in a step")
            B[step] = Action(what)
    if step >= k:
        raise GameError("hand longer than the game's maximum decision count")
    return HandRecord(tuple(C) if C is not None else None,
                      tuple(D) if D is not None else None,
                      tuple(tuple(r) for r in R), tuple(A), tuple(B))


def replay(spec: GameSpec, record: HandRecord) -> tuple[list[Decision], PublicState]:
    """Walk a record through the rules; return its real decisions and end state.

    Padding slots are recognised by the rules alone and must hold Fold.
    """
    k = spec.max_decisions
    if not (len(record.R) == len(record.A) == len(record.B) == k):
        raise GameError(f"record must have exactly {k} steps")
    state = initial_state(spec)
    decisions: list[Decision] = []
    for i in range(k):
        if record.R[i]:
            state = deal_board(spec, state, record.R[i])
        for seat, act in ((0, record.A[i]), (1, record.B[i])):
            if not state.is_terminal and state.to_act == seat:
                decisions.append(Decision(i, seat, state, act))
                state = apply_action(spec, state, act)
            elif act != Action.FOLD:
                raise GameError(f"step {i}: padding slot for P{seat + 1} must be Fold")
    if not state.is_terminal:
        raise GameError("record does not reach a terminal state")
    return decisions, state


def payoff(spec: GameSpec, record: HandRecord) -> int:
    _, state = replay(spec, record)
    return terminal_payoff(spec, state, record.C, record.D)


# -- information sets -------------------------------------------------------------


@dataclass(frozen=True)
class InfoSetKey:
    """What the acting seat can see. With ``canonical`` keys cards are ranks only."""

    seat: int
    private: tuple
    board: tuple
    betting: tuple[tuple[Action, ...], ...]

    def __str__(self) -> str:
        def fmt(xs):
            return "".join(rank_char(x) if isinstance(x, int) else str(x) for x in xs)
        hist = "/".join("".join(a.char for a in rnd) for rnd in self.betting)
        board = ".".join(fmt(g) for g in self.board)
        return f"P{self.seat + 1}:{fmt(self.private)}:{board}:{hist}"


def canonical_cards(cards: Sequence[Card], canonical: bool) -> tuple:
    if canonical:
        return tuple(sorted(c.rank for c in cards))
    return tuple(sorted(cards))


def infoset_key(spec: GameSpec, seat: int, private: Sequence[Card],
                state: PublicState, canonical: bool = True) -> InfoSetKey:
    groups = tuple(canonical_cards(g, canonical) for g in board_groups(spec, state.board))
    return InfoSetKey(seat, canonical_cards(private, canonical), groups, state.betting)


def private_hands(spec: GameSpec) -> list[tuple[Card, ...]]:
    return list(itertools.combinations(spec.deck, spec.private_cards))


def iter_decision_states(spec: GameSpec) -> Iterator[PublicState]:
    """Depth-first over every public decision state, actions in Fold<Call<Raise order
    and board reveals in deck order."""
    def walk(state):
        if state.is_terminal:
            return
        if state.awaiting_board:
            used = set(state.board)
            rest = [c for c in spec.deck if c not in used]
            for cards in itertools.combinations(rest, pending_board_cards(spec, state)):
                yield from walk(deal_board(spec, state, cards))
            return
        yield state
        for a in legal_actions(spec, state):
            yield from walk(apply_action(spec, state, a))

    yield from walk(initial_state(spec))


def enumerate_infosets(spec: GameSpec, seat: int, canonical: bool = True) -> list[InfoSetKey]:
    seen: dict[InfoSetKey, None] = {}
    hands = private_hands(spec)
    for state in iter_decision_states(spec):
        if state.to_act != seat:
            continue
        board = set(state.board)
        for h in hands:
            if board.isdisjoint(h):
                seen.setdefault(infoset_key(spec, seat, h, state, canonical))
    return list(seen)


def deal_count(spec: GameSpec, board_cards: int) -> int:
    """Number of equally likely ordered deals of both hands plus ``board_cards``
    board cards, grouped by round."""
    n, p = len(spec.deck), spec.private_cards
    total = comb(n, p) * comb(n - p, p)
    left = n - 2 * p
    dealt = 0
    for r in spec.rounds:
        if dealt >= board_cards:
            break
        if r.board_cards:
            total *= comb(left, r.board_cards)
            left -= r.board_cards
            dealt += r.board_cards
    return total
