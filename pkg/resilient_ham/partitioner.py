"""Degree-preserving random partitions, run as verify-and-retry loops."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from resilient_ham.config import ScaleConfig
from resilient_ham.digraph import Digraph, VertexSet
from resilient_ham.errors import BudgetExhausted, HypothesisViolated, InvalidParam
from resilient_ham.pseudorandom import PseudoParams, check_p1, check_partition_quality
from resilient_ham.rng import derive_seed, make_rng
from resilient_ham.scale import ResolvedScale, resolve_scale

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class PartitionRequest:
    """Split `universe` into parts of the given sizes so that every
    degree vertex keeps min-degree >= (1 - eps) c p s_i into part i."""

    universe: VertexSet
    sizes: tuple[int, ...]
    c: float
    eps: float
    p: float
    degree_vertices: VertexSet = field(default_factory=frozenset)
    retry_budget: int = 10
    min_part_size: int = 0

    def __post_init__(self) -> None:
        if not self.sizes:
            raise InvalidParam("at least one part size is required")
        if any(size < 0 for size in self.sizes):
            raise InvalidParam(f"part sizes must be non-negative, got {self.sizes}")
        if sum(self.sizes) > len(self.universe):
            raise InvalidParam(f"sizes sum to {sum(self.sizes)} > |universe| = {len(self.universe)}")
        if any(0 < size < self.min_part_size for size in self.sizes):
            raise InvalidParam(f"part sizes {self.sizes} below the floor {self.min_part_size}")
        if not 0.0 <= self.eps < 1.0:
            raise InvalidParam(f"eps must lie in [0, 1), got {self.eps}")
        if self.retry_budget < 1:
            raise InvalidParam("retry_budget must be >= 1")

    def required(self) -> np.ndarray:
        return (1 - self.eps) * self.c * self.p * np.asarray(self.sizes, dtype=float)


@dataclass(slots=True)
class _Attempt:
    parts: list[VertexSet]
    violations: int
    worst_vertex: int | None
    worst_part: int | None
    worst_slack: float


def _evaluate(g: Digraph, req: PartitionRequest, parts: list[VertexSet], degree_index: np.ndarray) -> _Attempt:
    labels = np.full(g.n, -1, dtype=np.int64)
    for index, part in enumerate(parts):
        labels[np.fromiter(part, dtype=np.int64, count=len(part))] = index
    if degree_index.size == 0:
        return _Attempt(parts, 0, None, None, 0.0)
    degrees = g.part_degrees(labels, len(parts))[degree_index]
    slack = degrees - req.required()[np.newaxis, :]
    row, col = np.unravel_index(int(np.argmin(slack)), slack.shape)
    return _Attempt(
        parts=parts,
        violations=int((slack < 0).sum()),
        worst_vertex=int(degree_index[row]),
        worst_part=int(col),
        worst_slack=float(slack[row, col]),
    )


def random_partition_with_degrees(g: Digraph, req: PartitionRequest, seed: int) -> list[VertexSet]:
    """Sample uniform partitions until one verifies exactly, up to req.retry_budget draws."""
    universe = np.array(sorted(req.universe), dtype=np.int64)
    degree_index = np.array(sorted(req.degree_vertices), dtype=np.int64)

    if degree_index.size:
        out_deg, in_deg = g.degrees_into(g.mask(universe))
        semi = np.minimum(out_deg, in_deg)[degree_index]
        below = semi < req.c * req.p * universe.size
        if below.any():
            witness = int(degree_index[int(np.argmax(below))])
            raise HypothesisViolated(
                f"vertex {witness} has degree below c p |U| into the universe",
                witness=witness,
            )

    rng = make_rng(seed)
    bounds = np.cumsum((0,) + req.sizes)
    best: _Attempt | None = None
    for attempt in range(req.retry_budget):
        order = rng.permutation(universe)
        parts = [frozenset(order[bounds[i] : bounds[i + 1]].tolist()) for i in range(len(req.sizes))]
        result = _evaluate(g, req, parts, degree_index)
        if result.violations == 0:
            if attempt:
                logger.debug("partition verified after %d retries", attempt)
            return parts
        if best is None or (result.violations, -result.worst_slack) < (best.violations, -best.worst_slack):
            best = result

    assert best is not None
    raise BudgetExhausted(
        f"no partition verified within {req.retry_budget} draws",
        best=[sorted(part) for part in best.parts],
        worst_vertex=best.worst_vertex,
        worst_part=best.worst_part,
        violations=best.violations,
    )


def partition_v1_v5(
    g: Digraph,
    params: PseudoParams,
    scale: ScaleConfig,
    seed: int,
    *,
    resolved: ResolvedScale | None = None,
    notes: list[str] | None = None,
) -> list[VertexSet]:
    """Five parts V1..V5 with the Q1 degree property, sized by the resolved scale.

    With a `notes` list the least-violating draw is returned, and noted, once the
    retry budget is spent; without one the search raises BudgetExhausted.
    """
    if scale.enforce_p1:
        verdict = check_p1(g, params)
        if not verdict.passed():
            raise HypothesisViolated("minimum semi-degree condition fails", witness=verdict.witness)
    sizes = (resolved or resolve_scale(g.n, params.alpha, scale, p=params.p)).part_sizes
    alpha = params.alpha
    request = PartitionRequest(
        universe=frozenset(range(g.n)),
        sizes=tuple(sizes),
        c=0.5 + 2 * alpha,
        eps=alpha / 3,
        p=params.p,
        degree_vertices=frozenset(range(g.n)) if scale.enforce_p1 else frozenset(),
        retry_budget=scale.partition_retries,
    )

    last_witness = None
    parts: list[VertexSet] = []
    for attempt in range(scale.partition_retries):
        try:
            parts = random_partition_with_degrees(g, request, derive_seed(seed, "v1v5", attempt))
        except BudgetExhausted as exc:
            if notes is None:
                raise
            note = f"partition: accepted the least-violating V1..V5 draw ({exc.context['violations']} degree shortfalls)"
            logger.warning(note)
            notes.append(note)
            return [frozenset(part) for part in exc.context["best"]]
        verdict = check_partition_quality(
            g,
            parts,
            params,
            targets=sizes[:4],
            tolerance=scale.window_tolerance,
        )
        if verdict.passed():
            return parts
        last_witness = verdict.witness
        logger.debug("V1..V5 partition rejected on attempt %d: %s", attempt, last_witness)
    if notes is not None:
        note = "partition: accepted a V1..V5 draw outside the size windows"
        logger.warning(note)
        notes.append(note)
        return parts
    raise BudgetExhausted("no V1..V5 partition passed the quality check", best=last_witness)


@dataclass(frozen=True, slots=True)
class PathSegments:
    segments: list[VertexSet]
    leftover: VertexSet


def segment_layout(universe_size: int, segment_size: int) -> tuple[int, int]:
    """(count, size) of equal segments; size is rebalanced when that shrinks the leftover."""
    count = universe_size // segment_size
    if count == 0:
        return 0, segment_size
    balanced = universe_size // count
    return count, max(segment_size, balanced)


def partition_path_segments(
    universe: VertexSet,
    g: Digraph,
    params: PseudoParams,
    scale: ScaleConfig,
    seed: int,
    *,
    segment_size: int | None = None,
) -> PathSegments:
    """Equal segments of `universe` with min-degree >= (1/2 + 3 alpha / 8) p |S_i| into each."""
    size = segment_size if segment_size is not None else resolve_scale(g.n, params.alpha, scale, p=params.p).segment_size
    count, size = segment_layout(len(universe), size)
    if count == 0:
        return PathSegments(segments=[], leftover=frozenset(universe))

    alpha = params.alpha
    c = 0.5 + alpha / 2
    target = 0.5 + 3 * alpha / 8
    request = PartitionRequest(
        universe=frozenset(universe),
        sizes=(size,) * count,
        c=c,
        eps=1 - target / c,
        p=params.p,
        degree_vertices=frozenset(universe),
        retry_budget=scale.partition_retries,
    )
    segments = random_partition_with_degrees(g, request, derive_seed(seed, "segments"))
    used = frozenset().union(*segments)
    return PathSegments(segments=segments, leftover=frozenset(universe) - used)


def verify_segments(g: Digraph, segments: Sequence[VertexSet], universe: VertexSet, params: PseudoParams) -> bool:
    """Recount the segment degree bound for every vertex of the universe."""
    if not segments:
        return True
    labels = np.full(g.n, -1, dtype=np.int64)
    for index, segment in enumerate(segments):
        for v in segment:
            if labels[v] != -1 or v not in universe:
                return False
            labels[v] = index
    degrees = g.part_degrees(labels, len(segments))
    members = np.array(sorted(universe), dtype=np.int64)
    sizes = np.array([len(segment) for segment in segments], dtype=float)
    bound = (0.5 + 3 * params.alpha / 8) * params.p * sizes
    return bool((degrees[members] >= bound[np.newaxis, :]).all())
