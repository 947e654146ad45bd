"""Seeded experiments: trials over D(n, p), optional adversary, one engine run each."""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, model_validator

from resilient_ham.config import ScaleConfig, get_settings
from resilient_ham.digraph import Digraph
from resilient_ham.engine import RunReport, find_hamilton_cycle
from resilient_ham.pseudorandom import CheckVerdict, PseudoParams, check_p1
from resilient_ham.random_models import AdversarySpec, apply_adversary, default_cut_set, gen_dnp
from resilient_ham.rng import derive_seed

logger = logging.getLogger(__name__)

AdversaryKind = Literal["none", "random-budgeted", "oneway-cut", "custom-arc-list"]
CSV_COLUMNS = ("n", "p", "r", "kind", "trials", "successes", "success_rate")
UNBUDGETED = ("oneway-cut", "custom-arc-list")


class ExperimentConfig(BaseModel):
    """One grid cell: every trial draws its own digraph from the master seed."""

    n: int = Field(ge=2)
    p: float = Field(gt=0.0, le=1.0)
    alpha: float = Field(default=0.05, gt=0.0, le=0.25)
    adversary: AdversaryKind = "none"
    r: float = Field(default=0.0, ge=0.0, le=1.0)
    cut_size: int | None = Field(default=None, ge=1)
    arcs: list[tuple[int, int]] | None = None
    scale: ScaleConfig = Field(default_factory=ScaleConfig)
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    workers: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _adversary_fields(self) -> ExperimentConfig:
        if self.cut_size is not None and self.cut_size >= self.n:
            raise ValueError("cut_size must be smaller than n")
        if (self.adversary == "custom-arc-list") != (self.arcs is not None):
            raise ValueError("arcs are required for, and only for, adversary 'custom-arc-list'")
        return self


class SweepConfig(BaseModel):
    """Grid over n, p and r; trials are paired across r through shared graph seeds."""

    n_values: list[int] = Field(min_length=1)
    p_values: list[float] = Field(min_length=1)
    r_values: list[float] = Field(default_factory=lambda: [0.0])
    adversary: AdversaryKind = "random-budgeted"
    alpha: float = Field(default=0.05, gt=0.0, le=0.25)
    cut_size: int | None = Field(default=None, ge=1)
    arcs: list[tuple[int, int]] | None = None
    scale: ScaleConfig = Field(default_factory=ScaleConfig)
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    workers: int | None = Field(default=None, ge=1)

    def cells(self) -> list[ExperimentConfig]:
        out: list[ExperimentConfig] = []
        for n in self.n_values:
            for p in self.p_values:
                for r in self.r_values:
                    adversary = self.adversary if (r > 0 or self.adversary in UNBUDGETED) else "none"
                    out.append(
                        ExperimentConfig(
                            n=n,
                            p=p,
                            alpha=self.alpha,
                            adversary=adversary,
                            r=r,
                            cut_size=self.cut_size,
                            arcs=self.arcs if adversary == "custom-arc-list" else None,
                            scale=self.scale,
                            trials=self.trials,
                            seed=self.seed,
                            workers=self.workers,
                        )
                    )
        return out


class TrialRecord(BaseModel):
    """One trial. `elapsed_ms` and the report timings are excluded from the determinism contract."""

    trial: int
    n: int
    p: float
    r: float
    kind: str
    graph_seed: int
    run_seed: int
    arcs: int
    deleted: int
    p_measured: float
    p1: CheckVerdict
    report: RunReport
    success: bool
    cycle_hash: str | None = None
    elapsed_ms: float = 0.0

    def deterministic_dump(self) -> dict[str, Any]:
        return self.model_dump(
            mode="json",
            exclude={"elapsed_ms": True, "p1": {"elapsed_ms"}, "report": {"timings"}},
        )


def trial_seeds(config: ExperimentConfig, index: int) -> tuple[int, int, int]:
    """(graph, adversary, run) seeds; none depends on r, so cells differing only in r are paired."""
    cell = (config.n, repr(config.p))
    return (
        derive_seed(config.seed, "graph", *cell, index),
        derive_seed(config.seed, "adversary", *cell, index),
        derive_seed(config.seed, "run", *cell, index),
    )


def _present_arcs(g: Digraph, arcs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """The committed arc list restricted to the arcs this trial's digraph actually has."""
    present = [(u, v) for u, v in arcs if 0 <= u < g.n and 0 <= v < g.n and u != v and g.has_arc(u, v)]
    logger.debug("custom adversary: %d of %d listed arcs present", len(present), len(arcs))
    return present


def run_trial(config: ExperimentConfig, index: int) -> TrialRecord:
    started = time.perf_counter()
    graph_seed, adversary_seed, run_seed = trial_seeds(config, index)
    g = gen_dnp(config.n, config.p, graph_seed)
    deleted = 0
    if config.adversary != "none":
        spec = AdversarySpec(
            kind=config.adversary,
            r=config.r,
            cut_set=default_cut_set(config.n, config.cut_size) if config.adversary == "oneway-cut" else None,
            arcs=_present_arcs(g, config.arcs) if config.arcs is not None else None,
            seed=adversary_seed,
        )
        g, deletion = apply_adversary(g, spec)
        deleted = len(deletion.deleted)

    # the attacked digraph is judged at its own density, not the nominal p
    params = PseudoParams.measured(g, config.alpha)
    p1 = check_p1(g, params)
    report = find_hamilton_cycle(g, params, config.scale, run_seed)
    return TrialRecord(
        trial=index,
        n=config.n,
        p=config.p,
        r=config.r,
        kind=config.adversary,
        graph_seed=graph_seed,
        run_seed=run_seed,
        arcs=g.m,
        deleted=deleted,
        p_measured=params.p,
        p1=p1,
        report=report,
        success=report.outcome == "cycle",
        cycle_hash=report.cycle_hash,
        elapsed_ms=(time.perf_counter() - started) * 1000.0,
    )


def resolve_workers(requested: int | None, trials: int) -> int:
    workers = requested or get_settings().threads or os.cpu_count() or 1
    return max(1, min(workers, trials))


def run_experiment(config: ExperimentConfig) -> list[TrialRecord]:
    """All trials of one cell, sorted by trial index whatever the schedule."""
    indices = list(range(config.trials))
    workers = resolve_workers(config.workers, config.trials)
    if workers == 1:
        records = [run_trial(config, index) for index in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_trial, [config] * len(indices), indices))
    records.sort(key=lambda record: record.trial)
    successes = sum(record.success for record in records)
    logger.info(
        "cell n=%d p=%g r=%g kind=%s: %d/%d verified cycles",
        config.n,
        config.p,
        config.r,
        config.adversary,
        successes,
        len(records),
    )
    return records


def summarize(config: ExperimentConfig, records: list[TrialRecord]) -> dict[str, Any]:
    successes = sum(record.success for record in records)
    failures: dict[str, int] = {}
    for record in records:
        if record.report.failure is not None:
            key = f"{record.report.failure.stage}:{record.report.failure.code}"
            failures[key] = failures.get(key, 0) + 1
    return {
        "n": config.n,
        "p": config.p,
        "r": config.r,
        "kind": config.adversary,
        "trials": len(records),
        "successes": successes,
        "success_rate": successes / len(records) if records else 0.0,
        "failure_breakdown": dict(sorted(failures.items())),
    }


def write_jsonl(records: list[TrialRecord], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.model_dump_json() + "\n")


def write_csv(rows: list[dict[str, Any]], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def run_sweep(sweep: SweepConfig, out_dir: Path | None = None) -> dict[str, Any]:
    """Run every cell; write trials.jsonl, summary.json and success.csv when out_dir is given."""
    records: list[TrialRecord] = []
    rows: list[dict[str, Any]] = []
    for cell in sweep.cells():
        cell_records = run_experiment(cell)
        records.extend(cell_records)
        rows.append(summarize(cell, cell_records))
    summary = {"config": sweep.model_dump(mode="json"), "cells": rows}
    if out_dir is not None:
        write_jsonl(records, out_dir / "trials.jsonl")
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        write_csv(rows, out_dir / "success.csv")
        logger.info("wrote sweep results to %s", out_dir)
    return summary
