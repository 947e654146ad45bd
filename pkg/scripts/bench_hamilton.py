#!/usr/bin/env python3
"""Benchmark end-to-end Hamilton cycle construction on seeded D(n, p) inputs."""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from resilient_ham.config import ScaleConfig
from resilient_ham.harness import ExperimentConfig, run_trial


def percentile(values: list[float], p: float) -> float:
    """Compute a percentile using linear interpolation."""
    if not values:
        return 0.0
    if len(values) == 1:
        return values[0]

    pos = (len(values) - 1) * (p / 100.0)
    lower = math.floor(pos)
    upper = math.ceil(pos)
    if lower == upper:
        return values[int(pos)]

    lower_val = values[lower]
    upper_val = values[upper]
    return lower_val + (upper_val - lower_val) * (pos - lower)


@dataclass
class TrialResult:
    ok: bool
    latency_ms: float
    failure: str | None
    stage_ms: dict[str, float]


def build_scale(args: argparse.Namespace) -> ScaleConfig:
    """Resolver defaults, or the fixed desk constants with --desk."""
    if not args.desk:
        return ScaleConfig(strategy=args.strategy, debug_invariants=False)
    return ScaleConfig(
        strategy=args.strategy,
        absorber_k=args.absorber_k,
        chord_length=args.walk_length,
        backbone_length=args.walk_length,
        final_length=args.walk_length,
        v1_size=args.v1_size,
        segment_size=args.segment_size,
        reservoir_factor=1.0,
        debug_invariants=False,
    )


def run_trials(args: argparse.Namespace) -> list[TrialResult]:
    config = ExperimentConfig(
        n=args.n,
        p=args.p,
        alpha=args.alpha,
        r=args.r,
        adversary="random-budgeted" if args.r > 0 else "none",
        scale=build_scale(args),
        trials=args.warmup + args.trials,
        seed=args.seed,
    )
    results: list[TrialResult] = []
    for index in range(args.warmup + args.trials):
        started = time.perf_counter()
        record = run_trial(config, index)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        if index < args.warmup:
            continue
        report = record.report
        failure = None
        if report.failure is not None:
            failure = f"{report.failure.stage}:{report.failure.code}"
        results.append(
            TrialResult(
                ok=record.success,
                latency_ms=elapsed_ms,
                failure=failure,
                stage_ms=dict(report.timings),
            )
        )
    return results


def build_summary(args: argparse.Namespace, results: list[TrialResult], total_seconds: float) -> dict[str, object]:
    """Build benchmark summary metrics."""
    success = [r for r in results if r.ok]
    latencies = sorted(r.latency_ms for r in success)

    failure_breakdown: dict[str, int] = {}
    for item in results:
        if item.failure is not None:
            failure_breakdown[item.failure] = failure_breakdown.get(item.failure, 0) + 1

    stage_ms: dict[str, float] = {}
    for item in success:
        for stage, elapsed in item.stage_ms.items():
            stage_ms[stage] = stage_ms.get(stage, 0.0) + elapsed
    stage_mean = {stage: total / len(success) for stage, total in stage_ms.items()} if success else {}

    return {
        "config": {
            "n": args.n,
            "p": args.p,
            "alpha": args.alpha,
            "r": args.r,
            "desk": args.desk,
            "trials": args.trials,
            "warmup": args.warmup,
            "seed": args.seed,
            "strategy": args.strategy,
            "absorber_k": args.absorber_k,
            "walk_length": args.walk_length,
            "v1_size": args.v1_size,
            "segment_size": args.segment_size,
        },
        "results": {
            "total_trials": len(results),
            "cycles": len(success),
            "failures": len(results) - len(success),
            "failure_breakdown": failure_breakdown,
            "elapsed_seconds": total_seconds,
            "latency_ms": {
                "min": latencies[0] if latencies else 0.0,
                "mean": statistics.fmean(latencies) if latencies else 0.0,
                "p50": percentile(latencies, 50),
                "p95": percentile(latencies, 95),
                "max": latencies[-1] if latencies else 0.0,
            },
            "stage_mean_ms": stage_mean,
        },
    }


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Benchmark resilient-ham cycle construction.")
    parser.add_argument("--n", type=int, default=90)
    parser.add_argument("--p", type=float, default=1.0)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--r", type=float, default=0.0, help="random adversary budget fraction")
    parser.add_argument("--desk", action="store_true", help="fixed small constants instead of the resolver")
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--warmup", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--strategy", choices=("greedy", "doubling", "greedy-then-doubling"), default="greedy-then-doubling")
    parser.add_argument("--absorber-k", type=int, default=1)
    parser.add_argument("--walk-length", type=int, default=2)
    parser.add_argument("--v1-size", type=int, default=6)
    parser.add_argument("--segment-size", type=int, default=3)
    parser.add_argument("--output", type=Path)
    return parser.parse_args()


def validate_args(args: argparse.Namespace) -> None:
    if args.n < 2:
        raise SystemExit("--n must be >= 2")
    if not 0 < args.p <= 1:
        raise SystemExit("--p must lie in (0, 1]")
    if not 0 <= args.r < 1:
        raise SystemExit("--r must lie in [0, 1)")
    if args.trials <= 0:
        raise SystemExit("--trials must be > 0")
    if args.warmup < 0:
        raise SystemExit("--warmup must be >= 0")
    if args.walk_length < 2:
        raise SystemExit("--walk-length must be >= 2")
    if args.segment_size < 2:
        raise SystemExit("--segment-size must be >= 2")


def main() -> None:
    args = parse_args()
    validate_args(args)
    started = time.perf_counter()
    results = run_trials(args)
    total_seconds = time.perf_counter() - started
    summary = build_summary(args, results, total_seconds)

    print(json.dumps(summary, indent=2))

    if args.output:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        print(f"Wrote benchmark report: {args.output}", file=sys.stderr)


if __name__ == "__main__":
    main()
