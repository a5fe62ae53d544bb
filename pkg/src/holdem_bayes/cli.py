"""Command line entry point: ``holdem-bayes <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import experiment as ex
from .agents import make_agent
from .game import GameError, HandRecord, load_spec
from .inference import PosteriorEnsemble, observe
from .match import run_trial
from .nash import NashNotCertified, solve_nash
from .response import (
    WeightedOpponent, bayesian_best_response, exploitability, map_response,
    thompson_response,
)
from .strategy import (
    read_strategies, read_strategy, sample_dirichlet_strategy, sample_ensemble,
    validate_strategy, write_strategies,
)
from .tree import get_tree


def _tree(args):
    return get_tree(load_spec(args.game), not args.no_canonical)


def _game_args(p):
    p.add_argument("--game", default="leduc", help="leduc, kuhn, or a JSON game file")
    p.add_argument("--no-canonical", action="store_true",
                   help="keep suits in infoset keys")


def cmd_solve(args):
    tree = _tree(args)
    try:
        res = solve_nash(tree, args.epsilon, args.seed, args.max_iterations)
    except NashNotCertified as err:
        print(f"error: {err}", file=sys.stderr)
        if args.out:
            write_strategies(args.out, list(err.pair))
        return 2
    if args.out:
        write_strategies(args.out, list(res.pair))
    print(f"game={tree.spec.name} iterations={res.iterations} "
          f"exploitability={res.exploitability:.6g} p1_value={res.value:.10g}")
    return 0


def cmd_exploitability(args):
    tree = _tree(args)
    p1 = read_strategy(args.p1, 0, tree.spec)
    p2 = read_strategy(args.p2, 1, tree.spec)
    if p1.tree is not tree or p2.tree is not tree:
        raise GameError("strategy files disagree with --game/--no-canonical")
    print(f"{exploitability(tree, (p1, p2)):.10g}")
    return 0


def cmd_respond(args):
    post = PosteriorEnsemble.load(args.posterior, load_spec(args.game))
    tree = post.tree
    seat = 1 - post.ensemble.seat
    if args.mode == "bbr":
        res = bayesian_best_response(tree, WeightedOpponent(post.ensemble, post.weights), seat)
    elif args.mode == "map":
        res = map_response(tree, post, seat)
    else:
        res = thompson_response(tree, post, np.random.default_rng(args.seed), seat)
    write_strategies(args.out, res.strategy)
    print(f"mode={args.mode} value={res.value:.10g}")
    return 0


def cmd_strategy_sample(args):
    tree = _tree(args)
    s = sample_dirichlet_strategy(tree, args.concentration, args.seed, seat=args.seat - 1)
    write_strategies(args.out, s)
    return 0


def cmd_strategy_validate(args):
    found = read_strategies(args.file)
    bad = 0
    for seat, s in sorted(found.items()):
        problems = validate_strategy(s)
        for p in problems:
            print(p)
        bad += len(problems)
        print(f"P{seat + 1}: {'ok' if not problems else f'{len(problems)} violations'}")
    return 1 if bad else 0


def cmd_posterior_init(args):
    tree = _tree(args)
    ens = sample_ensemble(tree, args.seat - 1, args.size, args.concentration, args.seed)
    PosteriorEnsemble.from_prior(ens).save(args.out)
    return 0


def cmd_posterior_update(args):
    post = PosteriorEnsemble.load(args.posterior, load_spec(args.game))
    viewer = 1 - post.ensemble.seat
    rows = []
    with open(args.hands) as fh:
        for line in fh:
            if line.strip():
                rec = HandRecord.from_dict(json.loads(line))
                post = post.update(observe(post.tree.spec, rec, viewer))
                d = post.diagnostics()
                rows.append(f"{post.observation_count},{d['ess']:.17g},"
                            f"{d['max_weight']:.17g},{d['map_index']}")
    post.save(args.out)
    if args.diagnostics:
        with open(args.diagnostics, "w") as fh:
            fh.write("hand_index,ess,max_weight,map_index\n")
            fh.write("".join(r + "\n" for r in rows))
    return 0


def cmd_play(args):
    tree = _tree(args)
    agents = [make_agent(args.p1, json.loads(args.p1_params), tree),
              make_agent(args.p2, json.loads(args.p2_params), tree)]
    log = run_trial(tree, agents, args.hands, args.seed, args.trial)
    with open(args.out, "w") as fh:
        fh.write(log.to_csv())
    if args.records:
        with open(args.records, "w") as fh:
            for rec in log.records:
                fh.write(json.dumps(rec.to_dict()) + "\n")
    print(f"{log.agents[0]} vs {log.agents[1]}: P1 bankroll {log.cumulative[-1]:g}")
    return 0


def cmd_experiment_run(args):
    overrides = {k: v for k, v in {
        "trials": args.trials, "hands_per_trial": args.hands, "seed": args.seed,
        "ensemble_size": args.ensemble_size, "window": args.window,
        "workers": args.workers, "game": args.game,
    }.items() if v is not None}
    if args.config:
        cfg = ex.ExperimentConfig.from_file(args.config)
        for k, v in overrides.items():
            setattr(cfg, k, v)
        cfg.__post_init__()
        if args.out:
            cfg.out = args.out
        if not cfg.out:
            raise ValueError("no output path: set 'out' in the config or pass --out")
        series = ex.run_experiment(cfg)
        print(f"{series.label}: final mean bankroll {series.final[0]:.4f} "
              f"+/- {series.final[1]:.4f} -> {cfg.out}")
        return 0
    if not args.out:
        raise ValueError("--out is required with --preset")
    only = args.only.split(",") if args.only else None
    for cfg in ex.preset_configs(args.preset, only, **overrides):
        cfg.out = str(ex.preset_output_path(args.out, cfg.p1))
        series = ex.run_experiment(cfg)
        print(f"{series.label}: final mean bankroll {series.final[0]:.4f} "
              f"+/- {series.final[1]:.4f} -> {cfg.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holdem-bayes", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="certified epsilon-Nash pair")
    _game_args(p)
    p.add_argument("--epsilon", type=float, default=0.005)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-iterations", type=int, default=100_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exploitability", help="exploitability of a strategy pair")
    _game_args(p)
    p.add_argument("--p1", required=True)
    p.add_argument("--p2", required=True)
    p.set_defaults(func=cmd_exploitability)

    p = sub.add_parser("respond", help="response to a saved posterior")
    p.add_argument("--game", default="leduc")
    p.add_argument("--posterior", required=True)
    p.add_argument("--mode", choices=("bbr", "map", "thompson"), default="bbr")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_respond)

    strat = sub.add_parser("strategy").add_subparsers(dest="strategy_command", required=True)
    p = strat.add_parser("sample", help="draw a strategy from the Dirichlet prior")
    _game_args(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--seat", type=int, choices=(1, 2), default=2)
    p.add_argument("--concentration", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_strategy_sample)
    p = strat.add_parser("validate", help="check a strategy file")
    p.add_argument("file")
    p.set_defaults(func=cmd_strategy_validate)

    post = sub.add_parser("posterior").add_subparsers(dest="posterior_command", required=True)
    p = post.add_parser("init", help="sample a prior ensemble")
    _game_args(p)
    p.add_argument("--size", type=int, default=1000)
    p.add_argument("--seat", type=int, choices=(1, 2), default=2, help="modelled seat")
    p.add_argument("--concentration", type=float, default=2.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_posterior_init)
    p = post.add_parser("update", help="fold hand records (JSON lines) into a posterior")
    p.add_argument("--game", default="leduc")
    p.add_argument("--posterior", required=True)
    p.add_argument("--hands", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--diagnostics", help="CSV of ess/max weight/MAP index per hand")
    p.set_defaults(func=cmd_posterior_update)

    p = sub.add_parser("play", help="one trial between two agents")
    _game_args(p)
    p.add_argument("--p1", required=True)
    p.add_argument("--p2", required=True)
    p.add_argument("--p1-params", default="{}")
    p.add_argument("--p2-params", default="{}")
    p.add_argument("--hands", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--records", help="write oracle-view hand records as JSON lines")
    p.set_defaults(func=cmd_play)

    exp = sub.add_parser("experiment").add_subparsers(dest="experiment_command", required=True)
    p = exp.add_parser("run", help="run a preset or a config file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(ex.PRESETS))
    src.add_argument("--config")
    p.add_argument("--only", help="comma-separated P1 agents to keep from a preset")
    p.add_argument("--game")
    p.add_argument("--trials", type=int)
    p.add_argument("--hands", type=int)
    p.add_argument("--ensemble-size", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (GameError, ValueError, OSError, ex.ExperimentError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
