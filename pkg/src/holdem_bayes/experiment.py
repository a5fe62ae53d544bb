"""Multi-trial experiments, bankroll aggregation, and CSV output."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .agents import DEFAULT_ENSEMBLE_SIZE, DEFAULT_EPSILON, make_agent
from .game import load_spec
from .match import run_trial
from .strategy import DEFAULT_CONCENTRATION
from .tree import get_tree

log = logging.getLogger(__name__)

DEFAULT_WINDOW = 10


class ExperimentError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    p1: str
    p2: str
    game: str = "leduc"
    p1_params: dict = field(default_factory=dict)
    p2_params: dict = field(default_factory=dict)
    trials: int = 1000
    hands_per_trial: int = 200
    ensemble_size: int = DEFAULT_ENSEMBLE_SIZE
    concentration: float = DEFAULT_CONCENTRATION
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0
    window: int = DEFAULT_WINDOW
    canonical: bool = True
    workers: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        for name in ("trials", "hands_per_trial", "ensemble_size", "window", "workers"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")
        if not self.concentration > 0 or not self.epsilon > 0:
            raise ValueError("concentration and epsilon must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def agent_params(self, seat: int) -> dict:
        base = {"ensemble_size": self.ensemble_size, "concentration": self.concentration,
                "epsilon": self.epsilon}
        base.update(self.p1_params if seat == 0 else self.p2_params)
        return base


@dataclass
class TrialSeries:
    """Per-hand aggregates; index ``h`` covers hands ``1..h+1``."""

    mean_bankroll: np.ndarray
    stderr: np.ndarray
    win_rate: np.ndarray
    bankrolls: Optional[np.ndarray] = None  # (trials, hands) raw cumulative bankrolls
    label: str = ""

    def __len__(self) -> int:
        return len(self.mean_bankroll)

    @property
    def final(self) -> tuple[float, float]:
        return float(self.mean_bankroll[-1]), float(self.stderr[-1])


def winning_rate(series: Sequence[float], window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Slope of a bankroll curve: centered differences (one-sided at the ends),
    then a centered moving average of ``window`` points, truncated at the ends."""
    x = np.asarray(series, dtype=np.float64)
    if window < 1:
        raise ValueError("window must be at least 1")
    if window > len(x):
        raise ValueError(f"window {window} is longer than the series ({len(x)})")
    if len(x) == 1:
        return np.zeros(1)
    g = np.gradient(x)
    if window == 1:
        return g
    lo, hi = (window - 1) // 2, window // 2
    c = np.concatenate(([0.0], np.cumsum(g)))
    idx = np.arange(len(g))
    start = np.maximum(idx - lo, 0)
    stop = np.minimum(idx + hi + 1, len(g))
    return (c[stop] - c[start]) / (stop - start)


def aggregate(bankrolls: np.ndarray, window: int = DEFAULT_WINDOW, label: str = "") -> TrialSeries:
    b = np.asarray(bankrolls, dtype=np.float64)
    mean = b.mean(axis=0)
    if b.shape[0] > 1:
        stderr = b.std(axis=0, ddof=1) / np.sqrt(b.shape[0])
    else:
        stderr = np.zeros(b.shape[1])
    return TrialSeries(mean, stderr, winning_rate(mean, min(window, len(mean))), b, label)


def _run_trials(cfg: ExperimentConfig, indices: Sequence[int]) -> list[np.ndarray]:
    tree = get_tree(load_spec(cfg.game), cfg.canonical)
    agents = [make_agent(cfg.p1, cfg.agent_params(0), tree),
              make_agent(cfg.p2, cfg.agent_params(1), tree)]
    out = []
    for i in indices:
        try:
            match = run_trial(tree, agents, cfg.hands_per_trial, cfg.seed, i)
        except Exception as exc:
            raise ExperimentError(f"trial {i} (master seed {cfg.seed}, trial index {i}) "
                                  f"failed: {exc}") from exc
        out.append(match.cumulative)
    return out


def run_experiment(cfg: ExperimentConfig) -> TrialSeries:
    """Play ``cfg.trials`` independent trials and aggregate bankrolls per hand.

    Trial ``i`` draws every random number from streams keyed by
    ``(cfg.seed, i)``, so the result does not depend on ``cfg.workers``.
    """
    indices = list(range(cfg.trials))
    label = f"{cfg.p1} vs {cfg.p2}"
    log.info("running %s: %d trials x %d hands", label, cfg.trials, cfg.hands_per_trial)
    if cfg.workers == 1:
        rows = _run_trials(cfg, indices)
    else:
        chunks = [indices[k::cfg.workers] for k in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(_run_trials, [cfg] * len(chunks), chunks))
        rows = [None] * cfg.trials
        for chunk, part in zip(chunks, parts):
            for i, row in zip(chunk, part):
                rows[i] = row
    series = aggregate(np.stack(rows), cfg.window, label)
    if cfg.out:
        emit_csv(series, cfg.out)
    return series


def format_csv(series: TrialSeries) -> str:
    lines = ["hand,mean_bankroll,stderr,win_rate"]
    for h in range(len(series)):
        lines.append(f"{h + 1},{series.mean_bankroll[h]:.17g},{series.stderr[h]:.17g},"
                     f"{series.win_rate[h]:.17g}")
    return "\n".join(lines) + "\n"


def emit_csv(series: TrialSeries, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(series))
    return path


def read_csv(path) -> TrialSeries:
    with open(path) as fh:
        rows = fh.read().splitlines()[1:]
    if not rows:
        empty = np.zeros(0)
        return TrialSeries(empty, empty.copy(), empty.copy())
    data = np.loadtxt(rows, delimiter=",", ndmin=2)
    return TrialSeries(data[:, 1], data[:, 2], data[:, 3])


# -- presets ---------------------------------------------------------------------

PRESETS = {
    "fig2": (("best_response", "bayes_bbr", "bayes_map", "bayes_thompson", "opti",
              "frequentist"), "prior_sample"),
    "fig4": (("bayes_bbr", "bayes_map", "bayes_thompson", "opti", "frequentist"), "opti"),
    "fig6": (("bayes_bbr", "bayes_map", "bayes_thompson", "opti"), "frequentist"),
}


def preset_configs(name: str, only: Optional[Sequence[str]] = None, **overrides) -> list[ExperimentConfig]:
    """One config per P1 agent of a named pairing set (fig2, fig4, fig6)."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    p1s, p2 = PRESETS[name]
    if only:
        bad = set(only) - set(p1s)
        if bad:
            raise ValueError(f"preset {name} has no agents {sorted(bad)}")
        p1s = [k for k in p1s if k in only]
    return [ExperimentConfig(p1=k, p2=p2, **overrides) for k in p1s]


def preset_output_path(out, p1: str) -> Path:
    out = Path(out)
    return out.with_name(f"{out.stem}_{p1}{out.suffix or '.csv'}")


def config_json(cfg: ExperimentConfig) -> str:
    return json.dumps(asdict(cfg), indent=2, sort_keys=True)


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))
