"""Command line interface.

Exit codes: 0 on success, 2 on validation failure (bad scenario, parameters,
or labels), 3 when a solve fails to converge; reports are still written in
the non-convergence case.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .experiments import (
    SweepSpec,
    compare_information_structures,
    default_grid,
    posterior_vs_prior,
    rollout,
    state_distribution,
    sweep_sensitivity,
    sweep_static_belief,
)
from .game import SchemaError, parse_game, validate_game
from .pbne import PbneConfig, solve_pbne
from .te import TEParams, build_te_game, default_params, validate_te_params

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3


class CliError(Exception):
    pass


def _load_params(path: str | None) -> TEParams:
    if path is None:
        return default_params()
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CliError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise CliError(f"{path}: expected a JSON object of TEParams fields")
    known = {f.name for f in dataclasses.fields(TEParams)}
    unknown = set(obj) - known
    if unknown:
        raise CliError(f"{path}: unknown parameter(s) {sorted(unknown)}")
    if "compromised_rewards" in obj:
        obj["compromised_rewards"] = tuple(obj["compromised_rewards"])
    try:
        params = dataclasses.replace(default_params(), **obj)
        validate_te_params(params)
    except (TypeError, ValueError) as exc:
        raise CliError(f"{path}: {exc}") from None
    return params


def _load_game(args):
    if getattr(args, "scenario", None):
        if getattr(args, "builtin", None):
            raise CliError("give either --builtin or --scenario, not both")
        with open(args.scenario) as fh:
            return parse_game(fh.read())
    if getattr(args, "builtin", None) != "te":
        raise CliError("choose a game with --builtin te or --scenario FILE")
    params = _load_params(getattr(args, "params", None))
    return build_te_game(
        params,
        prior_adversarial=getattr(args, "prior_adversarial", 0.5),
        prior_sophisticated=getattr(args, "prior_sophisticated", 0.5),
    )


def _pbne_config(args) -> PbneConfig:
    return PbneConfig(
        iter_num=args.iters,
        epsilon=args.epsilon,
        belief_tol=args.belief_tol,
        init=args.init,
    )


def _emit_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _emit_table(table, out: str | None) -> None:
    if out is None:
        table.write_to(sys.stdout)
    else:
        table.to_csv(out)


def _add_game_source(p: argparse.ArgumentParser, builtin_only: bool = False) -> None:
    p.add_argument("--builtin", choices=["te"], help="use the built-in scenario")
    if not builtin_only:
        p.add_argument("--scenario", metavar="FILE", help="scenario JSON file")
    p.add_argument("--params", metavar="FILE", help="JSON overrides for the built-in parameters")
    p.add_argument("--prior-adversarial", type=float, default=0.5)
    p.add_argument("--prior-sophisticated", type=float, default=0.5)


def _add_pbne_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iters", type=int, default=100, help="iteration cap")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--belief-tol", type=float, default=1e-8)
    p.add_argument("--init", choices=["uniform", "prior"], default="uniform")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stagegame", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a game and write the report JSON")
    _add_game_source(p)
    p.add_argument("--x0", required=True, help="stage-0 start state label")
    _add_pbne_args(p)
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("validate", help="validate a scenario or parameter file")
    _add_game_source(p)

    p = sub.add_parser("sweep-belief", help="final-stage equilibria along a belief grid")
    p.add_argument("--target", default="user:sophisticated",
                   help="'<defender|user>:<opponent type>' receiving the swept probability")
    p.add_argument("--state", default="privilege-2")
    p.add_argument("--fixed-type", default=None,
                   help="known type of the non-swept player")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--params", metavar="FILE")
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("sweep-sensitivity", help="parameter sweep, complete-information stage")
    p.add_argument("--target", default="detection_reward_primitive")
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=2400.0)
    p.add_argument("--points", type=int, default=9)
    p.add_argument("--params", metavar="FILE")
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("posterior", help="final-stage posterior of an adversarial user per prior")
    p.add_argument("--x0", default="effectual")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--params", metavar="FILE")
    _add_pbne_args(p)
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("state-dist", help="final-state distribution per prior")
    p.add_argument("--x0", default="effectual")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--params", metavar="FILE")
    _add_pbne_args(p)
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("compare-info", help="utilities under three information structures")
    p.add_argument("--x0", nargs="+", default=["ineffectual", "effectual"])
    p.add_argument("--params", metavar="FILE")
    _add_pbne_args(p)
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("rollout", help="Monte Carlo rollout under the solved profile")
    _add_game_source(p)
    p.add_argument("--x0", required=True)
    p.add_argument("--episodes", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    _add_pbne_args(p)
    p.add_argument("--out", metavar="PATH")

    return ap


def _cmd_solve(args) -> int:
    game = _load_game(args)
    report = solve_pbne(game, args.x0, _pbne_config(args))
    _emit_json(report.to_jsonable(), args.out)
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _cmd_validate(args) -> int:
    game = _load_game(args)
    report = validate_game(game)
    if not report.ok:
        for v in report.violations:
            print(f"{v.location}: {v.rule}: {v.message}", file=sys.stderr)
        return EXIT_VALIDATION
    n_states = sum(game.n_states(k) for k in range(game.horizon + 1))
    print(f"ok: horizon {game.horizon}, {n_states} states, "
          f"{game.n_types(1)}x{game.n_types(2)} types")
    return EXIT_OK


def _cmd_sweep_belief(args) -> int:
    spec = SweepSpec(
        target=args.target,
        grid=default_grid(args.points),
        state=args.state,
        fixed_type=args.fixed_type,
    )
    table = sweep_static_belief(_load_params(args.params), spec)
    _emit_table(table, args.out)
    return EXIT_OK


def _cmd_sweep_sensitivity(args) -> int:
    if args.points < 2:
        raise CliError("--points must be at least 2")
    grid = tuple(
        args.lo + (args.hi - args.lo) * i / (args.points - 1) for i in range(args.points)
    )
    spec = SweepSpec(target=args.target, grid=grid)
    table = sweep_sensitivity(_load_params(args.params), spec)
    _emit_table(table, args.out)
    return EXIT_OK


def _cmd_posterior(args) -> int:
    table = posterior_vs_prior(
        _load_params(args.params), default_grid(args.points), args.x0, _pbne_config(args)
    )
    _emit_table(table, args.out)
    bad = [r for r in table.rows if not r[table.columns.index("converged")]]
    return EXIT_NO_CONVERGENCE if bad else EXIT_OK


def _cmd_state_dist(args) -> int:
    table = state_distribution(
        _load_params(args.params), default_grid(args.points), args.x0, _pbne_config(args)
    )
    _emit_table(table, args.out)
    return EXIT_OK


def _cmd_compare_info(args) -> int:
    table = compare_information_structures(
        _load_params(args.params), tuple(args.x0), _pbne_config(args)
    )
    _emit_table(table, args.out)
    return EXIT_OK


def _cmd_rollout(args) -> int:
    game = _load_game(args)
    report = solve_pbne(game, args.x0, _pbne_config(args))
    result = rollout(game, report.strategies, args.x0, args.episodes, args.seed)
    payload = result.to_jsonable()
    payload["solver"] = {"converged": report.converged, "epsilon": report.epsilon}
    _emit_json(payload, args.out)
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


_COMMANDS = {
    "solve": _cmd_solve,
    "validate": _cmd_validate,
    "sweep-belief": _cmd_sweep_belief,
    "sweep-sensitivity": _cmd_sweep_sensitivity,
    "posterior": _cmd_posterior,
    "state-dist": _cmd_state_dist,
    "compare-info": _cmd_compare_info,
    "rollout": _cmd_rollout,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (CliError, SchemaError, FileNotFoundError, KeyError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
