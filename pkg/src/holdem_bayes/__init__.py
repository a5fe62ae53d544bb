"""Bayesian opponent modelling for small limit hold'em games (Kuhn, Leduc)."""

from .game import (
    Action, Card, GameError, GameSpec, HandRecord, InfoSetKey, PublicState,
    apply_action, build_record, enumerate_infosets, initial_state, kuhn,
    leduc, legal_actions, load_spec, payoff, replay, showdown_value,
)
from .inference import Observation, PosteriorDegenerate, PosteriorEnsemble, observe
from .nash import NashNotCertified, solve_nash
from .response import (
    WeightedOpponent, bayesian_best_response, best_response, expected_value,
    exploitability,
)
from .strategy import (
    BehaviourStrategy, StrategyEnsemble, sample_dirichlet_strategy, sample_ensemble,
    validate_strategy,
)
from .tree import GameTree, get_tree

__version__ = "0.1.0"

__all__ = [
    "Action",
    "apply_action",
    "bayesian_best_response",
    "BehaviourStrategy",
    "best_response",
    "build_record",
    "Card",
    "enumerate_infosets",
    "expected_value",
    "exploitability",
    "GameError",
    "GameSpec",
    "GameTree",
    "get_tree",
    "HandRecord",
    "InfoSetKey",
    "initial_state",
    "kuhn",
    "leduc",
    "legal_actions",
    "load_spec",
    "NashNotCertified",
    "Observation",
    "observe",
    "payoff",
    "PosteriorDegenerate",
    "PosteriorEnsemble",
    "PublicState",
    "replay",
    "sample_dirichlet_strategy",
    "sample_ensemble",
    "showdown_value",
    "solve_nash",
    "StrategyEnsemble",
    "validate_strategy",
    "WeightedOpponent",
]
