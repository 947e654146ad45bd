"""End-to-end Hamilton cycle construction.

Stages run in a fixed order:

    P1 -> scale -> partition -> absorbers -> backbone -> path_cover
       -> final_connection -> absorb -> verify

With `ScaleConfig.heuristic` on, hypotheses that only hold for very large n
(the Q1 degree bound, endpoint degrees, reservoir floors, verified segments)
are recorded as run notes instead of failing the run; the final
verification is never relaxed.

Each reservoir serves one stage only: V2 the absorber cycles, V3 the
chords, V4 the backbone, V1 the final cyclic connection. The ledger
records which stage reserved which vertex and is audited after every run.
"""

from __future__ import annotations

import hashlib
import logging
import time
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from typing import Any, Literal

from pydantic import BaseModel, Field

from resilient_ham.absorber import AbsorbingStructure, absorb, build_absorbers, build_backbone
from resilient_ham.config import ScaleConfig
from resilient_ham.connector import ConnectRequest, ReservationLedger, connect_all
from resilient_ham.cover import merge_path_cover
from resilient_ham.digraph import Digraph, SignPattern, VertexSet, verify_hamilton_cycle
from resilient_ham.errors import BudgetExhausted, HallViolation, HypothesisViolated, InternalError, ResilientHamError
from resilient_ham.matcher import perfect_matching_chain
from resilient_ham.partitioner import partition_path_segments, partition_v1_v5
from resilient_ham.pseudorandom import PseudoParams, check_p1
from resilient_ham.rng import derive_seed
from resilient_ham.scale import ResolvedScale, resolve_scale
from resilient_ham.telemetry import TelemetryRuntime

logger = logging.getLogger(__name__)

STAGES = (
    "P1",
    "scale",
    "partition",
    "absorbers",
    "backbone",
    "path_cover",
    "final_connection",
    "absorb",
    "verify",
)
RESERVOIR_TAGS = {"final": 0, "cycles": 1, "chords": 2, "backbone": 3}

DirectedPath = tuple[int, ...]


class StageFailure(BaseModel):
    stage: str
    code: str
    message: str
    context: dict[str, Any] = Field(default_factory=dict)


class RunReport(BaseModel):
    """Result of one find_hamilton_cycle call. `timings` is excluded from the determinism contract."""

    outcome: Literal["cycle", "failure"]
    n: int
    seed: int
    cycle: list[int] | None = None
    cycle_hash: str | None = None
    failure: StageFailure | None = None
    attempts: int = 0
    retries: dict[str, int] = Field(default_factory=dict)
    scale: ResolvedScale | None = None
    overrides: dict[str, Any] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)
    timings: dict[str, float] = Field(default_factory=dict)

    def cycle_line(self) -> str:
        """The cycle as one space-separated vertex line."""
        return " ".join(str(v) for v in self.cycle or [])

    def deterministic_dump(self) -> dict[str, Any]:
        return self.model_dump(mode="json", exclude={"timings"})


def cycle_hash(cycle: Sequence[int]) -> str:
    return hashlib.sha256(",".join(str(v) for v in cycle).encode("ascii")).hexdigest()


def canonical_rotation(cycle: Sequence[int]) -> list[int]:
    """Rotate so the smallest vertex comes first."""
    order = list(cycle)
    if not order:
        return order
    start = order.index(min(order))
    return order[start:] + order[:start]


class _StageTracker:
    """Times stages, opens one span per stage and feeds the stage metrics."""

    def __init__(self, runtime: TelemetryRuntime) -> None:
        self.runtime = runtime
        self.current = STAGES[0]
        self.timings: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        self.current = name
        started = time.perf_counter()
        status = "error"
        with self.runtime.tracer.start_as_current_span(f"stage.{name}"):
            try:
                yield
                status = "ok"
            finally:
                elapsed = (time.perf_counter() - started) * 1000.0
                self.timings[name] = self.timings.get(name, 0.0) + elapsed
                try:
                    self.runtime.run_metrics.record(stage=name, status=status, duration_ms=elapsed)
                except Exception:
                    logger.exception("Failed to record stage metrics")


def audit_path_cover(g: Digraph, universe: VertexSet, paths: Sequence[DirectedPath]) -> bool:
    """Paths are vertex-disjoint, cover exactly the universe, and follow existing arcs."""
    seen: set[int] = set()
    for path in paths:
        if not path:
            return False
        for v in path:
            if v in seen:
                return False
            seen.add(v)
        if not all(g.has_arc(u, v) for u, v in zip(path, path[1:])):
            return False
    return seen == set(universe)


def path_cover(
    g: Digraph,
    universe: VertexSet,
    params: PseudoParams,
    scale: ScaleConfig,
    seed: int,
    *,
    segment_size: int | None = None,
) -> list[DirectedPath]:
    """Vertex-disjoint directed paths covering the universe.

    Equal segments S_1..S_m are chained by perfect matchings along +; every
    vertex outside the segments becomes a path of length 0.
    """
    if not universe:
        return []
    last: HallViolation | None = None
    for attempt in range(scale.partition_retries):
        split = partition_path_segments(
            universe,
            g,
            params,
            scale,
            derive_seed(seed, "cover", attempt),
            segment_size=segment_size,
        )
        try:
            chain = perfect_matching_chain(split.segments, g) if split.segments else []
        except HallViolation as exc:
            last = exc
            logger.debug("path cover attempt %d hit a Hall violation at segment %s", attempt, exc.context.get("segment"))
            continue
        paths: list[DirectedPath] = []
        steps = [matching.as_dict() for matching in chain]
        for head in sorted(split.segments[0]) if split.segments else []:
            path = [head]
            for step in steps:
                path.append(step[path[-1]])
            paths.append(tuple(path))
        paths.extend((v,) for v in sorted(split.leftover))
        if not audit_path_cover(g, universe, paths):
            raise InternalError("path cover failed its audit")
        return paths
    assert last is not None
    raise last


def _cover(
    g: Digraph,
    universe: VertexSet,
    params: PseudoParams,
    scale: ScaleConfig,
    resolved: ResolvedScale,
    seed: int,
    notes: list[str],
) -> list[DirectedPath]:
    """path_cover, merged; in heuristic mode an unverifiable segment split falls back to singletons."""
    try:
        paths = path_cover(g, universe, params, scale, seed, segment_size=resolved.segment_size)
    except (BudgetExhausted, HallViolation, HypothesisViolated) as exc:
        if not scale.heuristic:
            raise
        note = f"path_cover: segment chain unavailable ({exc.code}), merging singletons"
        if note not in notes:
            logger.warning(note)
            notes.append(note)
        paths = [(v,) for v in sorted(universe)]
    covered = len(paths)
    paths = merge_path_cover(g, paths, rounds=scale.merge_rounds)
    if not audit_path_cover(g, universe, paths):
        raise InternalError("merged path cover failed its audit")
    logger.info("path cover: %d paths over %d vertices, %d after merging", covered, len(universe), len(paths))
    return paths


def audit_reservoirs(ledger: ReservationLedger, parts: Sequence[VertexSet]) -> None:
    """Every vertex reserved under a stage tag lies in that stage's reservoir."""
    for tag, index in RESERVOIR_TAGS.items():
        stray = ledger.tagged(tag) - parts[index]
        if stray:
            raise InternalError(f"{len(stray)} vertices reserved under {tag!r} lie outside V{index + 1}")


def _assemble(paths: Sequence[DirectedPath], walks: Sequence[Any], backbone: Sequence[int]) -> list[int]:
    """Q1, W1, Q2, ..., Q_t, W_t, P*, W_{t+1}; walk endpoints are shared with their neighbours."""
    order: list[int] = []
    for path, walk in zip(paths, walks):
        order.extend(path)
        order.extend(walk.interior)
    order.extend(backbone)
    order.extend(walks[-1].interior)
    return order


def _final_connection(
    g: Digraph,
    paths: Sequence[DirectedPath],
    structure: AbsorbingStructure,
    v1: VertexSet,
    params: PseudoParams,
    resolved: ResolvedScale,
    scale: ScaleConfig,
    seed: int,
    ledger: ReservationLedger,
    notes: list[str],
) -> list[Any]:
    start, end = structure.path.start, structure.path.end
    pairs = [(paths[i][-1], paths[i + 1][0]) for i in range(len(paths) - 1)]
    if paths:
        pairs += [(paths[-1][-1], start), (end, paths[0][0])]
    else:
        pairs = [(end, start)]

    t = len(pairs)
    ell = resolved.final_length
    found: list[str] = []
    demand = 4 * params.log**2 / params.p
    if t < demand:
        found.append(f"final connection joins {t} pairs, below 4 ln^2 n / p = {demand:.1f}")
    floor = scale.reservoir_factor * t * ell
    if len(v1) < floor:
        found.append(f"final reservoir |V1| = {len(v1)} below c_K t l = {floor:.1f}")
    for note in found:
        if note not in notes:
            logger.warning(note)
            notes.append(note)
    return connect_all(
        g,
        ConnectRequest(tuple(pairs), frozenset(v1), SignPattern.all_plus(ell)),
        scale,
        seed,
        ledger=ledger,
        tag="final",
        params=params,
        check_reservoir=False,
        notes=notes if scale.heuristic else None,
    )


def _attempt(
    g: Digraph,
    params: PseudoParams,
    scale: ScaleConfig,
    resolved: ResolvedScale,
    seed: int,
    tracker: _StageTracker,
    notes: list[str],
) -> list[int]:
    sink = notes if scale.heuristic else None
    with tracker.stage("partition"):
        parts = partition_v1_v5(g, params, scale, derive_seed(seed, "partition"), resolved=resolved, notes=sink)
    v1, v2, v3, v4, v5 = parts
    ledger = ReservationLedger(g.n)

    with tracker.stage("absorbers"):
        absorbers = build_absorbers(
            g, v1, v2, v3, resolved, scale, derive_seed(seed, "absorbers"), ledger=ledger, params=params, notes=sink
        )
    with tracker.stage("backbone"):
        structure = build_backbone(
            g, absorbers, v4, resolved, scale, derive_seed(seed, "backbone"), ledger=ledger, params=params, notes=sink
        )

    with tracker.stage("path_cover"):
        universe = (v2 | v3 | v4 | v5) - frozenset(structure.path.vertices)
        paths = _cover(g, universe, params, scale, resolved, derive_seed(seed, "path_cover"), notes)

    with tracker.stage("final_connection"):
        walks = _final_connection(
            g, paths, structure, v1, params, resolved, scale, derive_seed(seed, "final"), ledger, notes
        )
        before = _assemble(paths, walks, structure.path.vertices)
        if scale.debug_invariants and not (v2 | v3 | v4 | v5) <= set(before):
            raise InternalError("assembled cycle misses part of V2..V5")

    with tracker.stage("absorb"):
        leftover = v1 - ledger.tagged("final")
        absorbed = absorb(structure, leftover)
        cycle = _assemble(paths, walks, absorbed.vertices)

    with tracker.stage("verify"):
        audit_reservoirs(ledger, parts)
        if not verify_hamilton_cycle(g, cycle):
            raise InternalError("assembled cycle failed verification")
    return cycle


def find_hamilton_cycle(
    g: Digraph,
    params: PseudoParams,
    scale: ScaleConfig,
    seed: int,
    *,
    telemetry: TelemetryRuntime | None = None,
) -> RunReport:
    """Las Vegas search for a Hamilton cycle; the report either carries a verified cycle or names the failing stage."""
    tracker = _StageTracker(telemetry or TelemetryRuntime())
    notes: list[str] = []
    base = {"n": g.n, "seed": seed, "overrides": scale.overrides()}

    def failed(exc: ResilientHamError, **extra: Any) -> RunReport:
        logger.info("run failed at stage %s: %s", tracker.current, exc.message)
        return RunReport(
            outcome="failure",
            failure=StageFailure(stage=tracker.current, code=exc.code, message=exc.message, context=exc.payload_context()),
            notes=notes,
            timings=tracker.timings,
            **base,
            **extra,
        )

    try:
        with tracker.stage("P1"):
            verdict = check_p1(g, params)
            if not verdict.passed():
                raise HypothesisViolated("minimum semi-degree condition fails", witness=verdict.witness)
        with tracker.stage("scale"):
            resolved = resolve_scale(g.n, params.alpha, scale, p=params.p)
            notes.extend(resolved.notes)
    except ResilientHamError as exc:
        return failed(exc)

    last: ResilientHamError | None = None
    last_stage = STAGES[0]
    restarts = scale.pipeline_restarts
    for attempt in range(restarts):
        try:
            cycle = _attempt(g, params, scale, resolved, derive_seed(seed, "attempt", attempt), tracker, notes)
        except InternalError:
            raise
        except ResilientHamError as exc:
            last, last_stage = exc, tracker.current
            logger.info("attempt %d failed at %s (%s); %d restarts left", attempt, last_stage, exc.code, restarts - attempt - 1)
            continue
        cycle = canonical_rotation(cycle)
        logger.info("verified Hamilton cycle on %d vertices after %d attempts", g.n, attempt + 1)
        return RunReport(
            outcome="cycle",
            cycle=cycle,
            cycle_hash=cycle_hash(cycle),
            attempts=attempt + 1,
            retries={"pipeline": attempt},
            scale=resolved,
            notes=notes,
            timings=tracker.timings,
            **base,
        )

    assert last is not None
    tracker.current = last_stage
    return failed(last, attempts=restarts, retries={"pipeline": restarts - 1}, scale=resolved)
