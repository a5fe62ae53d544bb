"""Behaviour strategies, the independent Dirichlet prior, and strategy files."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .game import Action, GameError, GameSpec, load_spec
from .tree import GameTree, get_tree

DEFAULT_CONCENTRATION = 2.0
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BehaviourStrategy:
    """Action probabilities for one seat, one row per infoset in enumeration
    order and one column per action (Fold, Call, Raise)."""

    tree: GameTree
    seat: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def spec(self) -> GameSpec:
        return self.tree.spec

    def action_probs(self, key) -> np.ndarray:
        table = self.tree.by_name if isinstance(key, str) else self.tree.index
        return self.probs[table[self.seat][key]]

    def is_pure(self) -> bool:
        return bool(np.all((self.probs == 0.0) | (self.probs == 1.0)))


@dataclass(frozen=True, eq=False)
class StrategyEnsemble:
    """N strategies for the same seat, stored as one ``(N, infosets, 3)`` array."""

    tree: GameTree
    seat: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        if probs.ndim != 3 or probs.shape[0] < 1:
            raise ValueError("an ensemble needs at least one strategy")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return self.probs.shape[0]

    def __getitem__(self, j: int) -> BehaviourStrategy:
        return BehaviourStrategy(self.tree, self.seat, self.probs[j])

    @classmethod
    def of(cls, strategies: Sequence[BehaviourStrategy]) -> "StrategyEnsemble":
        first = strategies[0]
        for s in strategies:
            if s.tree is not first.tree or s.seat != first.seat:
                raise ValueError("ensemble members must share game and seat")
        return cls(first.tree, first.seat, np.stack([s.probs for s in strategies]))


def _concentration(concentration) -> np.ndarray:
    alpha = np.broadcast_to(np.asarray(concentration, dtype=np.float64), (3,))
    if np.any(~(alpha > 0)):
        raise ValueError(f"Dirichlet concentration must be positive, got {concentration}")
    return alpha


def sample_ensemble(tree: GameTree, seat: int, n: int, concentration=DEFAULT_CONCENTRATION,
                    rng: Union[np.random.Generator, int, None] = None) -> StrategyEnsemble:
    """Draw ``n`` strategies from the independent Dirichlet prior.

    Each infoset gets its own Dirichlet over its legal actions only, built from
    normalized Gamma draws, so a two-action infoset uses Dirichlet(a_i, a_j).
    """
    alpha = _concentration(concentration)
    rng = np.random.default_rng(rng)
    legal = tree.legal_mask[seat]
    g = rng.standard_gamma(np.broadcast_to(alpha, (n,) + legal.shape)) * legal
    return StrategyEnsemble(tree, seat, g / g.sum(axis=-1, keepdims=True))


def sample_dirichlet_strategy(spec: Union[GameSpec, GameTree], concentration=DEFAULT_CONCENTRATION,
                              rng_seed=None, seat: int = 1,
                              canonical: bool = True) -> BehaviourStrategy:
    tree = spec if isinstance(spec, GameTree) else get_tree(spec, canonical)
    return sample_ensemble(tree, seat, 1, concentration, rng_seed)[0]


def validate_strategy(s: BehaviourStrategy) -> list[str]:
    """Every invariant violation found, as readable strings; empty means valid."""
    tree, seat = s.tree, s.seat
    keys = tree.infosets[seat]
    probs = np.asarray(s.probs)
    if probs.ndim != 2 or probs.shape[1] != 3:
        return [f"table has shape {probs.shape}, expected ({len(keys)}, 3)"]
    problems = []
    if probs.shape[0] < len(keys):
        problems += [f"{keys[i]}: missing" for i in range(probs.shape[0], len(keys))]
    elif probs.shape[0] > len(keys):
        problems.append(f"{probs.shape[0] - len(keys)} rows beyond the last infoset")
    legal = tree.legal_mask[seat]
    for i in range(min(len(keys), probs.shape[0])):
        row = probs[i]
        if not np.all(np.isfinite(row)) or np.any(row < 0):
            problems.append(f"{keys[i]}: negative or non-finite probability {row.tolist()}")
            continue
        illegal = row[~legal[i]]
        if np.any(illegal != 0):
            names = [a.name for a, ok in zip(Action, legal[i]) if not ok]
            problems.append(f"{keys[i]}: mass {illegal.sum():.17g} on illegal {names}")
        total = row[legal[i]].sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            problems.append(f"{keys[i]}: legal probabilities sum to {total:.17g}")
    return problems


def uniform_strategy(tree: GameTree, seat: int) -> BehaviourStrategy:
    legal = tree.legal_mask[seat].astype(np.float64)
    return BehaviourStrategy(tree, seat, legal / legal.sum(axis=1, keepdims=True))


def special_strategies(spec: Union[GameSpec, GameTree], seat: int = 1,
                       canonical: bool = True) -> dict[str, BehaviourStrategy]:
    tree = spec if isinstance(spec, GameTree) else get_tree(spec, canonical)
    legal = tree.legal_mask[seat]
    n = len(legal)
    call = np.zeros((n, 3))
    call[:, Action.CALL] = 1.0
    fold = np.where(legal[:, [Action.FOLD]], np.eye(3)[Action.FOLD], np.eye(3)[Action.CALL])
    return {
        "uniform": uniform_strategy(tree, seat),
        "always_call": BehaviourStrategy(tree, seat, call),
        "always_fold_when_legal": BehaviourStrategy(tree, seat, fold),
    }


# -- strategy files -----------------------------------------------------------------


def format_strategies(strategies: Sequence[BehaviourStrategy]) -> str:
    tree = strategies[0].tree
    lines = [f"game={tree.spec.name} canonical_suits={int(tree.canonical)}"]
    for s in strategies:
        if s.tree is not tree:
            raise ValueError("strategies in one file must share a game")
        for key, row in zip(tree.infosets[s.seat], s.probs):
            lines.append(f"{key} " + " ".join(f"{p:.17g}" for p in row))
    return "\n".join(lines) + "\n"


def write_strategies(path, strategies: Union[BehaviourStrategy, Sequence[BehaviourStrategy]]):
    if isinstance(strategies, BehaviourStrategy):
        strategies = [strategies]
    with open(path, "w") as fh:
        fh.write(format_strategies(strategies))


def parse_strategies(text: str, spec: Optional[GameSpec] = None) -> dict[int, BehaviourStrategy]:
    """Parse a strategy file into one strategy per seat present in it.

    Rows are matched by key, so line order does not matter.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise GameError("empty strategy file")
    header = dict(field.split("=", 1) for field in lines[0].split())
    if "game" not in header or "canonical_suits" not in header:
        raise GameError(f"bad strategy header {lines[0]!r}")
    if spec is None:
        spec = load_spec(header["game"])
    elif spec.name != header["game"]:
        raise GameError(f"file is for game {header['game']!r}, not {spec.name!r}")
    tree = get_tree(spec, header["canonical_suits"] == "1")
    tables = [np.full((tree.n_infosets(s), 3), np.nan) for s in (0, 1)]
    seen = [np.zeros(tree.n_infosets(s), dtype=bool) for s in (0, 1)]
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 4:
            raise GameError(f"bad strategy line {ln!r}")
        key = parts[0]
        seat = int(key[1]) - 1 if key.startswith("P") and key[1:2] in "12" else -1
        if seat not in (0, 1) or key not in tree.by_name[seat]:
            raise GameError(f"unknown infoset {key!r}")
        i = tree.by_name[seat][key]
        tables[seat][i] = [float(p) for p in parts[1:]]
        seen[seat][i] = True
    out = {}
    for seat in (0, 1):
        if seen[seat].any():
            if not seen[seat].all():
                missing = [str(tree.infosets[seat][i]) for i in np.flatnonzero(~seen[seat])]
                raise GameError(f"strategy for P{seat + 1} lacks {len(missing)} infosets, "
                                f"first {missing[0]}")
            out[seat] = BehaviourStrategy(tree, seat, tables[seat])
    return out


def read_strategies(path, spec: Optional[GameSpec] = None) -> dict[int, BehaviourStrategy]:
    with open(path) as fh:
        return parse_strategies(fh.read(), spec)


def read_strategy(path, seat: int, spec: Optional[GameSpec] = None) -> BehaviourStrategy:
    found = read_strategies(path, spec)
    if seat not in found:
        raise GameError(f"{path} has no strategy for P{seat + 1}")
    return found[seat]
