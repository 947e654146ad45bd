"""Turn a ScaleConfig into the concrete gadget and part sizes for one digraph.

The textbook constants (k = 3 ln n, walk length 10 ln n, |V1| = n / ln^3 n) only
fit inside n once n is astronomically large. The resolver starts from them and
shrinks k and the walk lengths, then the |V1| floor, then the reservoir slack,
until the five parts fit. Every shrink is reported in `ResolvedScale.notes`.
Explicit overrides are never shrunk.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Iterator

from pydantic import BaseModel, ConfigDict

from resilient_ham.config import ScaleConfig
from resilient_ham.digraph import log_n
from resilient_ham.errors import HypothesisViolated, InvalidParam
from resilient_ham.pseudorandom import q2_windows

logger = logging.getLogger(__name__)

LENGTHS = ("chord_length", "backbone_length", "final_length")


class ResolvedScale(BaseModel):
    """Sizes used by one run; embedded verbatim in the run report."""

    model_config = ConfigDict(frozen=True)

    n: int
    alpha: float
    k: int
    chord_length: int
    backbone_length: int
    final_length: int
    part_sizes: tuple[int, int, int, int, int]
    segment_size: int
    overrides: dict[str, object]
    p: float = 1.0
    notes: tuple[str, ...] = ()

    @property
    def cycle_length(self) -> int:
        return 4 * self.k + 3

    @property
    def absorber_size(self) -> int:
        return 3 + 2 * self.k * (self.chord_length + 1)

    @property
    def targets(self) -> tuple[int, int, int, int]:
        return self.part_sizes[:4]  # type: ignore[return-value]


def walk_pool(p: float, length: int, target: float) -> int:
    """Free reservoir size at which about `target` walks of `length` arcs still join two fixed ends.

    A pool of m vertices carries about m^(length-1) * p^length such walks.
    """
    if length < 2:
        raise InvalidParam(f"walk length must be >= 2, got {length}")
    pool = math.exp((math.log(target) - length * math.log(p)) / (length - 1))
    return math.ceil(round(pool, 9))


@dataclasses.dataclass(frozen=True, slots=True)
class _Plan:
    k: int
    chord_length: int
    backbone_length: int
    final_length: int
    v1_divisor: bool = True
    slack: float = 1.0


class _Sizer:
    def __init__(self, n: int, alpha: float, p: float, scale: ScaleConfig) -> None:
        self.n = n
        self.p = p
        self.scale = scale
        _, (low, high) = q2_windows(n, alpha)
        self.midpoint = max(1, round((low + high) / 2))
        self.ln = log_n(n)

    def pool(self, length: int) -> int:
        return walk_pool(self.p, length, self.scale.walk_target)

    def reservoir(self, override: int | None, demand: int, length: int, slack: float) -> int:
        if override is not None:
            return override
        return max(self.midpoint, demand + max(math.ceil((slack - 1) * demand), self.pool(length)))

    def v1(self, plan: _Plan) -> int:
        scale = self.scale
        if scale.v1_size is not None:
            return scale.v1_size
        floors = [
            math.ceil(self.n / self.ln**3),
            self.pool(plan.final_length) + scale.final_pairs * (plan.final_length - 1),
        ]
        if plan.v1_divisor:
            floors.append(math.ceil(self.n / scale.v1_divisor))
        return max(floors)

    def parts(self, plan: _Plan) -> tuple[int, int, int, int]:
        scale = self.scale
        v1 = self.v1(plan)
        cycle = 4 * plan.k + 3
        v2 = self.reservoir(scale.v2_size, v1 * (cycle - 1), cycle, plan.slack)
        v3 = self.reservoir(
            scale.v3_size, 2 * plan.k * v1 * (plan.chord_length - 1), plan.chord_length, plan.slack
        )
        v4 = self.reservoir(
            scale.v4_size, max(v1 - 1, 0) * (plan.backbone_length - 1), plan.backbone_length, plan.slack
        )
        return v1, v2, v3, v4

    def need(self, plan: _Plan) -> int:
        return sum(self.parts(plan))

    def shrinks(self, plan: _Plan) -> Iterator[_Plan]:
        scale = self.scale
        if scale.absorber_k is None and plan.k > 1:
            yield dataclasses.replace(plan, k=max(1, plan.k // 2))
        for name in LENGTHS:
            if getattr(scale, name) is None and getattr(plan, name) > scale.min_walk_length:
                yield dataclasses.replace(plan, **{name: getattr(plan, name) - 1})

    def descend(self, plan: _Plan) -> _Plan:
        """Greedily take the shrink that saves the most vertices until the parts fit."""
        while self.need(plan) > self.n:
            best = min(self.shrinks(plan), key=self.need, default=None)
            if best is None or self.need(best) >= self.need(plan):
                break
            plan = best
        return plan


def _walk_length(base: float, mult: float, override: int | None, floor: int) -> int:
    if override is not None:
        return override
    return max(floor, math.ceil(math.ceil(base) * mult))


def _initial_plan(ln: float, scale: ScaleConfig) -> _Plan:
    k = scale.absorber_k if scale.absorber_k is not None else max(1, math.ceil(math.ceil(3 * ln) * scale.absorber_k_mult))
    return _Plan(
        k=k,
        chord_length=_walk_length(10 * ln, scale.chord_length_mult, scale.chord_length, scale.min_walk_length),
        backbone_length=_walk_length(10 * ln, scale.backbone_length_mult, scale.backbone_length, scale.min_walk_length),
        final_length=_walk_length(10 * ln, scale.final_length_mult, scale.final_length, scale.min_walk_length),
        slack=scale.reservoir_slack,
    )


def _shrink_notes(initial: _Plan, final: _Plan) -> list[str]:
    notes: list[str] = []
    if final.k != initial.k:
        notes.append(f"scale: absorber k lowered from {initial.k} to {final.k}")
    for name in LENGTHS:
        before, after = getattr(initial, name), getattr(final, name)
        if before != after:
            notes.append(f"scale: {name} lowered from {before} to {after}")
    if not final.v1_divisor:
        notes.append("scale: dropped the n / v1_divisor floor on |V1|")
    if final.slack != initial.slack:
        notes.append(f"scale: reservoir slack lowered from {initial.slack} to {final.slack}")
    return notes


def resolve_scale(n: int, alpha: float, scale: ScaleConfig, *, p: float) -> ResolvedScale:
    """Resolve sizes for a digraph of density p; raise if even the smallest plan exceeds n."""
    if n < 1:
        raise InvalidParam(f"n must be >= 1, got {n}")
    if not 0 < p <= 1:
        raise InvalidParam(f"p must lie in (0, 1], got {p}")
    sizer = _Sizer(n, alpha, p, scale)
    initial = _initial_plan(sizer.ln, scale)
    plan = sizer.descend(initial)
    relaxations = [
        lambda current: dataclasses.replace(current, v1_divisor=False),
        lambda current: dataclasses.replace(current, slack=1.0),
    ]
    for relax in relaxations:
        if sizer.need(plan) <= n:
            break
        plan = sizer.descend(relax(plan))
    v1, v2, v3, v4 = sizer.parts(plan)
    v5 = n - (v1 + v2 + v3 + v4)
    if v5 < 0:
        raise HypothesisViolated(
            f"parts need {v1 + v2 + v3 + v4} vertices but n = {n}",
            witness=[v1, v2, v3, v4],
            k=plan.k,
            chord_length=plan.chord_length,
            backbone_length=plan.backbone_length,
            final_length=plan.final_length,
        )

    segment = scale.segment_size if scale.segment_size is not None else max(math.floor(n / sizer.ln**5), scale.segment_floor)
    notes = _shrink_notes(initial, plan)
    for note in notes:
        logger.warning(note)
    resolved = ResolvedScale(
        n=n,
        alpha=alpha,
        k=plan.k,
        chord_length=plan.chord_length,
        backbone_length=plan.backbone_length,
        final_length=plan.final_length,
        part_sizes=(v1, v2, v3, v4, v5),
        segment_size=segment,
        overrides=scale.overrides(),
        p=p,
        notes=tuple(notes),
    )
    logger.info(
        "scale n=%d p=%.4f k=%d chord=%d backbone=%d final=%d parts=%s segment=%d",
        n,
        p,
        plan.k,
        plan.chord_length,
        plan.backbone_length,
        plan.final_length,
        resolved.part_sizes,
        segment,
    )
    return resolved
