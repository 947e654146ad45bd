"""Command-line entrypoint for resilient-ham."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from resilient_ham import __version__
from resilient_ham.config import ScaleConfig, Settings, get_settings
from resilient_ham.digraph import Digraph, verify_hamilton_cycle
from resilient_ham.edgelist import parse_arc_list, read_edge_list, write_edge_list
from resilient_ham.engine import find_hamilton_cycle
from resilient_ham.errors import InvalidParam, ResilientHamError
from resilient_ham.harness import SweepConfig, run_sweep
from resilient_ham.oracle import held_karp_hamiltonian
from resilient_ham.pseudorandom import PseudoParams, check_p1, check_p2, check_p3
from resilient_ham.random_models import (
    AdversarySpec,
    apply_adversary,
    budget_for_beta,
    default_cut_set,
    gen_dnp,
    verify_budget,
)
from resilient_ham.reports import error_response
from resilient_ham.telemetry import TelemetryRuntime, setup_telemetry, shutdown_telemetry

logger = logging.getLogger(__name__)

SCALE_PREFIX = "--scale."
ADVERSARY_KINDS = {"random": "random-budgeted", "oneway-cut": "oneway-cut", "custom": "custom-arc-list"}
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CYCLE = 2


def configure_logging(level: str = "INFO") -> None:
    """Configure process logging."""
    logging.basicConfig(level=getattr(logging, level), format="%(asctime)s %(levelname)s %(message)s")


def _emit(payload: Any) -> None:
    if hasattr(payload, "model_dump_json"):
        print(payload.model_dump_json(indent=2))
    else:
        print(json.dumps(payload, indent=2))


def split_scale_flags(extra: Sequence[str]) -> tuple[dict[str, str], list[str]]:
    """Pull `--scale.<knob>=<value>` (or `--scale.<knob> <value>`) out of the leftover argv."""
    overrides: dict[str, str] = {}
    rest: list[str] = []
    tokens = list(extra)
    index = 0
    while index < len(tokens):
        token = tokens[index]
        if token.startswith(SCALE_PREFIX):
            body = token[len(SCALE_PREFIX) :]
            if "=" in body:
                knob, value = body.split("=", 1)
            elif index + 1 < len(tokens):
                knob, value = body, tokens[index + 1]
                index += 1
            else:
                raise InvalidParam(f"scale flag {token} has no value")
            overrides[knob.replace("-", "_")] = value
        else:
            rest.append(token)
        index += 1
    return overrides, rest


def merge_scale(base: ScaleConfig, overrides: dict[str, str]) -> ScaleConfig:
    if not overrides:
        return base
    try:
        return ScaleConfig.model_validate({**base.model_dump(), **overrides})
    except ValidationError as exc:
        raise InvalidParam(f"invalid scale override: {exc.errors()[0]['msg']}", overrides=overrides) from exc


def _alpha_and_r(args: argparse.Namespace) -> tuple[float, float]:
    beta = getattr(args, "beta", None)
    if beta is not None:
        return beta / 4, budget_for_beta(beta)
    return args.alpha, getattr(args, "r", 0.0)


def _params(g: Digraph, args: argparse.Namespace) -> PseudoParams:
    alpha, _ = _alpha_and_r(args)
    if args.p is None:
        return PseudoParams.measured(g, alpha)
    return PseudoParams(g.n, alpha, args.p)


def _read_arcs(path: str | None, n: int) -> list[tuple[int, int]] | None:
    return parse_arc_list(Path(path).read_text(encoding="utf-8"), n) if path else None


def cmd_gen(args: argparse.Namespace, settings: Settings) -> int:
    g = gen_dnp(args.n, args.p, args.seed)
    write_edge_list(g, args.out)
    logger.info("wrote D(%d, %g) with %d arcs to %s", args.n, args.p, g.m, args.out)
    return EXIT_OK


def cmd_attack(args: argparse.Namespace, settings: Settings) -> int:
    g = read_edge_list(args.input)
    _, r = _alpha_and_r(args)
    kind = ADVERSARY_KINDS[args.adversary]
    arcs = _read_arcs(args.arcs, g.n)
    spec = AdversarySpec(
        kind=kind,
        r=r,
        cut_set=default_cut_set(g.n, args.cut_size) if kind == "oneway-cut" else None,
        arcs=arcs,
        seed=args.seed,
    )
    attacked, report = apply_adversary(g, spec)
    if kind == "random-budgeted" and not verify_budget(g, report.deleted, r):
        raise InvalidParam("deletion exceeds the per-vertex budget")
    write_edge_list(attacked, args.out)
    _emit(report)
    return EXIT_OK


def cmd_check(args: argparse.Namespace, settings: Settings) -> int:
    g = read_edge_list(args.input)
    params = _params(g, args)
    trials = args.trials or settings.checker.sampled_trials
    verdicts = [check_p1(g, params)]
    for check in (check_p2, check_p3):
        verdicts.append(check(g, params, args.mode, trials=trials, seed=args.seed, workers=settings.threads))
    _emit({"n": g.n, "alpha": params.alpha, "p": params.p, "verdicts": [v.model_dump(mode="json") for v in verdicts]})
    return EXIT_OK


def cmd_ham(args: argparse.Namespace, settings: Settings, scale: ScaleConfig, telemetry: TelemetryRuntime) -> int:
    g = read_edge_list(args.input)
    params = _params(g, args)
    report = find_hamilton_cycle(g, params, scale, args.seed, telemetry=telemetry)
    _emit(report)
    if report.outcome != "cycle":
        return EXIT_NO_CYCLE
    if args.cycle_out:
        Path(args.cycle_out).write_text(report.cycle_line() + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, settings: Settings, scale: ScaleConfig) -> int:
    alpha, _ = _alpha_and_r(args)
    r_values = args.r_values if args.r_values else ([budget_for_beta(args.beta)] if args.beta else [0.0])
    sweep = SweepConfig(
        n_values=args.n,
        p_values=args.p,
        r_values=r_values,
        adversary=ADVERSARY_KINDS[args.adversary],
        alpha=alpha,
        cut_size=args.cut_size,
        arcs=_read_arcs(args.arcs, max(args.n)),
        scale=scale,
        trials=args.trials,
        seed=args.seed,
        workers=args.workers or settings.threads,
    )
    summary = run_sweep(sweep, Path(args.out) if args.out else None)
    _emit(summary)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, settings: Settings) -> int:
    g = read_edge_list(args.input)
    found, cycle = held_karp_hamiltonian(g, settings.oracle)
    _emit({"n": g.n, "hamiltonian": found, "cycle": cycle})
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    g = read_edge_list(args.input)
    text = Path(args.cycle).read_text(encoding="utf-8").split()
    try:
        cycle = [int(token) for token in text]
    except ValueError as exc:
        raise InvalidParam(f"cycle file holds a non-integer token: {exc}") from exc
    valid = verify_hamilton_cycle(g, cycle)
    _emit({"n": g.n, "valid": valid})
    return EXIT_OK if valid else EXIT_NO_CYCLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resilient-ham", description="Hamilton cycles in pseudorandom digraphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="write a D(n, p) edge list")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    attack = commands.add_parser("attack", help="delete arcs with a budgeted adversary")
    attack.add_argument("--in", dest="input", required=True)
    attack.add_argument("--adversary", choices=sorted(ADVERSARY_KINDS), default="random")
    attack.add_argument("--r", type=float, default=0.0)
    attack.add_argument("--beta", type=float)
    attack.add_argument("--cut-size", type=int)
    attack.add_argument("--arcs", help="arc-list file for the custom adversary")
    attack.add_argument("--seed", type=int, default=0)
    attack.add_argument("--out", required=True)

    check = commands.add_parser("check", help="run the P1-P3 checkers")
    check.add_argument("--in", dest="input", required=True)
    check.add_argument("--alpha", type=float, default=0.05)
    check.add_argument("--beta", type=float)
    check.add_argument("--p", type=float)
    check.add_argument("--mode", choices=("exact", "sampled"), default="sampled")
    check.add_argument("--trials", type=int)
    check.add_argument("--seed", type=int, default=0)

    ham = commands.add_parser("ham", help="find and verify a Hamilton cycle")
    ham.add_argument("--in", dest="input", required=True)
    ham.add_argument("--alpha", type=float, default=0.05)
    ham.add_argument("--beta", type=float)
    ham.add_argument("--p", type=float)
    ham.add_argument("--seed", type=int, default=0)
    ham.add_argument("--cycle-out")

    sweep = commands.add_parser("sweep", help="success rates over an (n, p, r) grid")
    sweep.add_argument("--n", type=int, nargs="+", required=True)
    sweep.add_argument("--p", type=float, nargs="+", required=True)
    sweep.add_argument("--r", dest="r_values", type=float, nargs="+")
    sweep.add_argument("--alpha", type=float, default=0.05)
    sweep.add_argument("--beta", type=float)
    sweep.add_argument("--adversary", choices=sorted(ADVERSARY_KINDS), default="random")
    sweep.add_argument("--cut-size", type=int)
    sweep.add_argument("--arcs", help="arc-list file for the custom adversary")
    sweep.add_argument("--trials", type=int, default=1)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--workers", type=int)
    sweep.add_argument("--out")

    oracle = commands.add_parser("oracle", help="exact Hamiltonicity for small inputs")
    oracle.add_argument("--in", dest="input", required=True)

    verify = commands.add_parser("verify", help="check a cycle file against an edge list")
    verify.add_argument("--in", dest="input", required=True)
    verify.add_argument("--cycle", required=True)
    return parser


def _dispatch(args: argparse.Namespace, settings: Settings, scale: ScaleConfig) -> int:
    if args.command == "sweep":
        return cmd_sweep(args, settings, scale)
    if args.command == "ham":
        telemetry = TelemetryRuntime()
        try:
            telemetry = setup_telemetry(settings)
        except Exception:
            logger.exception("OpenTelemetry initialization failed; continuing without telemetry")
        try:
            return cmd_ham(args, settings, scale, telemetry)
        finally:
            try:
                shutdown_telemetry(telemetry)
            except Exception:
                logger.exception("OpenTelemetry shutdown failed")
    handlers = {
        "gen": cmd_gen,
        "attack": cmd_attack,
        "check": cmd_check,
        "oracle": cmd_oracle,
        "verify": cmd_verify,
    }
    return handlers[args.command](args, settings)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        settings = get_settings()
        configure_logging(settings.log_level)
        overrides, rest = split_scale_flags(extra)
        if rest:
            parser.error(f"unrecognized arguments: {' '.join(rest)}")
        scale = merge_scale(settings.scale, overrides)
        return _dispatch(args, settings, scale)
    except ValidationError as exc:
        failure = InvalidParam(f"invalid input: {exc.errors()[0]['msg']}")
    except OSError as exc:
        failure = InvalidParam(f"cannot access file: {exc}")
    except ResilientHamError as exc:
        failure = exc
    print(error_response(failure).model_dump_json(), file=sys.stderr)
    return EXIT_ERROR


def run() -> None:
    """Console script entry."""
    sys.exit(main())


if __name__ == "__main__":
    run()
