"""Certify or refute the pseudorandomness properties P1-P3 and the partition properties Q1-Q2."""

from __future__ import annotations

import logging
import math
import os
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Literal

import numpy as np
from pydantic import BaseModel

from resilient_ham.config import get_settings
from resilient_ham.digraph import Digraph, VertexSet, log_n
from resilient_ham.errors import InvalidParam, NotAPartition, TooLargeForExact
from resilient_ham.rng import derive_seed, make_rng

logger = logging.getLogger(__name__)

CheckMode = Literal["exact", "sampled"]
Witness = list[list[int]]
# Every GREEDY_EVERY-th sampled trial grows an adversarial set instead of drawing a uniform one.
GREEDY_EVERY = 8


@dataclass(frozen=True, slots=True)
class PseudoParams:
    """(n, alpha, p) together with the derived set-size thresholds."""

    n: int
    alpha: float
    p: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidParam(f"n must be >= 1, got {self.n}")
        if self.alpha <= 0 or 0.5 + 2 * self.alpha > 1:
            raise InvalidParam(f"alpha must lie in (0, 1/4], got {self.alpha}")
        if not 0 < self.p <= 1:
            raise InvalidParam(f"p must lie in (0, 1], got {self.p}")

    @property
    def log(self) -> float:
        return log_n(self.n)

    @property
    def t2(self) -> int:
        """Size cap ceil(ln^2 n / p) for the sparse-set property."""
        return math.ceil(self.log**2 / self.p)

    @property
    def t3(self) -> int:
        """Size floor ceil(ln^1.1 n / p) for the bipartite-density property."""
        return math.ceil(self.log**1.1 / self.p)

    @property
    def min_semidegree(self) -> float:
        return (0.5 + 2 * self.alpha) * self.n * self.p

    def p2_bound(self, size: int) -> float:
        return size * self.log**2.1

    @classmethod
    def measured(cls, g: Digraph, alpha: float) -> PseudoParams:
        """Parameters at the digraph's own arc density."""
        # arcless input: keep params valid so P1 reports the failure
        return cls(g.n, alpha, g.density or 1.0)

    def p3_bound(self, x_size: int, y_size: int) -> float:
        return (1 + self.alpha / 2) * x_size * y_size * self.p


class CheckVerdict(BaseModel):
    """Outcome of one property check."""

    property: Literal["P1", "P2", "P3", "Q"]
    status: Literal["certified-pass", "certified-fail", "sampled-pass", "sampled-fail"]
    witness: Witness | None = None
    trials: int = 0
    elapsed_ms: float = 0.0

    def passed(self) -> bool:
        return self.status.endswith("pass")


def _elapsed_ms(started: float) -> float:
    return (time.perf_counter() - started) * 1000.0


def _resolve_workers(workers: int | None, trials: int) -> int:
    if workers is None:
        workers = get_settings().threads or os.cpu_count() or 1
    return max(1, min(workers, trials))


def _check_params(g: Digraph, params: PseudoParams) -> None:
    if params.n != g.n:
        raise InvalidParam(f"params.n = {params.n} but digraph has {g.n} vertices")


def check_p1(g: Digraph, params: PseudoParams) -> CheckVerdict:
    """Every vertex has min(d+, d-) >= (1/2 + 2 alpha) n p."""
    _check_params(g, params)
    started = time.perf_counter()
    semi = np.minimum(g.out_degrees(), g.in_degrees())
    failing = np.nonzero(semi < params.min_semidegree)[0]
    if failing.size:
        return CheckVerdict(
            property="P1",
            status="certified-fail",
            witness=[[int(failing[0])]],
            trials=g.n,
            elapsed_ms=_elapsed_ms(started),
        )
    return CheckVerdict(property="P1", status="certified-pass", trials=g.n, elapsed_ms=_elapsed_ms(started))


def _require_exact(g: Digraph, exact_limit: int | None) -> None:
    limit = exact_limit if exact_limit is not None else get_settings().checker.exact_limit
    if g.n > limit:
        raise TooLargeForExact(f"exact mode supports n <= {limit}, got {g.n}", n=g.n, limit=limit)


def _induced_arcs(out_masks: list[int], members: Sequence[int], member_mask: int) -> int:
    return sum((out_masks[v] & member_mask).bit_count() for v in members)


def _exact_p2(g: Digraph, params: PseudoParams) -> tuple[Witness | None, int]:
    """First violating set in size-then-lexicographic order, and how many sets were examined."""
    out_masks, _ = g.bitmasks()
    cap = min(params.t2, g.n)
    examined = 0
    for size in range(1, cap + 1):
        bound = params.p2_bound(size)
        for members in combinations(range(g.n), size):
            examined += 1
            member_mask = sum(1 << v for v in members)
            if _induced_arcs(out_masks, members, member_mask) > bound:
                return [list(members)], examined
    return None, examined


def _best_response(
    scores: np.ndarray,
    candidates: np.ndarray,
    floor: int,
) -> np.ndarray | None:
    """Subset of candidates of size >= floor maximizing the sum of scores, if that sum is positive."""
    if candidates.size < floor:
        return None
    order = candidates[np.argsort(-scores[candidates], kind="stable")]
    ranked = scores[order]
    take = max(floor, int((ranked > 0).sum()))
    chosen = order[:take]
    if scores[chosen].sum() <= 0:
        return None
    return np.sort(chosen)


def _exact_p3(g: Digraph, params: PseudoParams) -> tuple[Witness | None, int]:
    """Every X of admissible size against its best-response Y; counts the X sets examined."""
    floor = params.t3
    examined = 0
    if 2 * floor > g.n:
        return None, examined
    _, in_masks = g.bitmasks()
    density = (1 + params.alpha / 2) * params.p
    for size in range(floor, g.n - floor + 1):
        for members in combinations(range(g.n), size):
            examined += 1
            member_mask = sum(1 << v for v in members)
            outside = np.array([y for y in range(g.n) if not member_mask >> y & 1], dtype=np.int64)
            scores = np.zeros(g.n, dtype=float)
            for y in outside.tolist():
                scores[y] = (in_masks[y] & member_mask).bit_count() - density * size
            chosen = _best_response(scores, outside, floor)
            if chosen is None:
                continue
            arcs = sum((in_masks[y] & member_mask).bit_count() for y in chosen.tolist())
            if arcs > params.p3_bound(size, chosen.size):
                return [list(members), chosen.tolist()], examined
    return None, examined


def _run_sampled(
    worker: Callable[[int, int], Witness | None],
    trials: int,
    workers: int,
) -> Witness | None:
    """Split trials over workers; the failing worker with the lowest index wins."""
    shares = [trials // workers + (1 if index < trials % workers else 0) for index in range(workers)]
    if workers == 1:
        return worker(0, shares[0])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(worker, range(workers), shares))
    for result in results:
        if result is not None:
            return result
    return None


def _induced_count(g: Digraph, members: np.ndarray) -> int:
    return edge_count_indexed(g, members, members)


def edge_count_indexed(g: Digraph, sources: np.ndarray, targets: np.ndarray) -> int:
    """e(sources, targets) for index arrays."""
    if sources.size == 0 or targets.size == 0:
        return 0
    target_mask = np.zeros(g.n, dtype=bool)
    target_mask[targets] = True
    total = 0
    for u in sources.tolist():
        total += int(target_mask[g.out_neighbors(u)].sum())
    return total


def _greedy_dense_set(g: Digraph, params: PseudoParams, rng: np.random.Generator, cap: int) -> Witness | None:
    """Grow a set by repeatedly adding the vertex with most arcs to it; check every prefix."""
    start = int(rng.integers(g.n))
    inside = np.zeros(g.n, dtype=bool)
    links = np.zeros(g.n, dtype=np.int64)
    members: list[int] = []
    arcs = 0
    current = start
    for size in range(1, cap + 1):
        inside[current] = True
        members.append(current)
        arcs += int(links[current])
        links[g.out_neighbors(current)] += 1
        links[g.in_neighbors(current)] += 1
        if arcs > params.p2_bound(size):
            return [sorted(members)]
        if size == cap:
            break
        candidates = np.where(inside, -1, links)
        current = int(np.argmax(candidates))
        if inside[current]:
            break
    return None


def _sampled_p2(g: Digraph, params: PseudoParams, trials: int, seed: int, workers: int) -> Witness | None:
    cap = min(params.t2, g.n)

    def worker(index: int, share: int) -> Witness | None:
        rng = make_rng(derive_seed(seed, "p2", index))
        for trial in range(share):
            if trial % GREEDY_EVERY == 0:
                found = _greedy_dense_set(g, params, rng, cap)
                if found is not None:
                    return found
                continue
            size = int(rng.integers(1, cap + 1))
            members = np.sort(rng.choice(g.n, size=size, replace=False))
            if _induced_count(g, members) > params.p2_bound(size):
                return [members.tolist()]
        return None

    return _run_sampled(worker, trials, workers)


def _p3_violation(g: Digraph, params: PseudoParams, xs: np.ndarray, ys: np.ndarray) -> Witness | None:
    if edge_count_indexed(g, xs, ys) > params.p3_bound(xs.size, ys.size):
        return [np.sort(xs).tolist(), np.sort(ys).tolist()]
    return None


def _alternating_pair(g: Digraph, params: PseudoParams, rng: np.random.Generator) -> Witness | None:
    floor = params.t3
    density = (1 + params.alpha / 2) * params.p
    size = int(rng.integers(floor, g.n - floor + 1))
    xs = np.sort(rng.choice(g.n, size=size, replace=False))
    for _ in range(3):
        x_mask = g.mask(xs)
        _, from_x = g.degrees_into(x_mask)
        outside = np.nonzero(~x_mask)[0]
        ys = _best_response(from_x - density * xs.size, outside, floor)
        if ys is None:
            return None
        found = _p3_violation(g, params, xs, ys)
        if found is not None:
            return found
        y_mask = g.mask(ys)
        into_y, _ = g.degrees_into(y_mask)
        outside = np.nonzero(~y_mask)[0]
        xs = _best_response(into_y - density * ys.size, outside, floor)
        if xs is None:
            return None
        found = _p3_violation(g, params, xs, ys)
        if found is not None:
            return found
    return None


def _sampled_p3(g: Digraph, params: PseudoParams, trials: int, seed: int, workers: int) -> Witness | None:
    floor = params.t3

    def worker(index: int, share: int) -> Witness | None:
        rng = make_rng(derive_seed(seed, "p3", index))
        for trial in range(share):
            if trial % GREEDY_EVERY == 0:
                found = _alternating_pair(g, params, rng)
                if found is not None:
                    return found
                continue
            x_size = int(rng.integers(floor, g.n - floor + 1))
            y_size = int(rng.integers(floor, g.n - x_size + 1))
            order = rng.permutation(g.n)
            found = _p3_violation(g, params, order[:x_size], order[x_size : x_size + y_size])
            if found is not None:
                return found
        return None

    return _run_sampled(worker, trials, workers)


def _finish(
    prop: Literal["P2", "P3"],
    mode: CheckMode,
    witness: Witness | None,
    trials: int,
    started: float,
) -> CheckVerdict:
    prefix = "certified" if mode == "exact" else "sampled"
    status = f"{prefix}-{'fail' if witness is not None else 'pass'}"
    if witness is not None:
        logger.info("%s %s with witness of size %s", prop, status, [len(part) for part in witness])
    return CheckVerdict(
        property=prop,
        status=status,  # type: ignore[arg-type]
        witness=witness,
        trials=trials,
        elapsed_ms=_elapsed_ms(started),
    )


def check_p2(
    g: Digraph,
    params: PseudoParams,
    mode: CheckMode = "exact",
    *,
    trials: int | None = None,
    seed: int = 0,
    workers: int | None = None,
    exact_limit: int | None = None,
) -> CheckVerdict:
    """No set X with |X| <= ceil(ln^2 n / p) spans more than |X| ln^2.1 n arcs."""
    _check_params(g, params)
    started = time.perf_counter()
    if mode == "exact":
        _require_exact(g, exact_limit)
        witness, examined = _exact_p2(g, params)
        return _finish("P2", mode, witness, examined, started)
    budget = trials if trials is not None else get_settings().checker.sampled_trials
    witness = _sampled_p2(g, params, budget, seed, _resolve_workers(workers, budget))
    return _finish("P2", mode, witness, budget, started)


def check_p3(
    g: Digraph,
    params: PseudoParams,
    mode: CheckMode = "exact",
    *,
    trials: int | None = None,
    seed: int = 0,
    workers: int | None = None,
    exact_limit: int | None = None,
) -> CheckVerdict:
    """Disjoint X, Y of size >= ceil(ln^1.1 n / p) span at most (1 + alpha/2)|X||Y|p arcs X -> Y."""
    _check_params(g, params)
    started = time.perf_counter()
    if 2 * params.t3 > g.n:
        return CheckVerdict(property="P3", status="certified-pass", trials=0, elapsed_ms=_elapsed_ms(started))
    if mode == "exact":
        _require_exact(g, exact_limit)
        witness, examined = _exact_p3(g, params)
        return _finish("P3", mode, witness, examined, started)
    budget = trials if trials is not None else get_settings().checker.sampled_trials
    witness = _sampled_p3(g, params, budget, seed, _resolve_workers(workers, budget))
    return _finish("P3", mode, witness, budget, started)


def q2_windows(n: int, alpha: float) -> tuple[float, tuple[float, float]]:
    """Target |V1| = n / ln^3 n and the open window for |V2|, |V3|, |V4|."""
    v1 = n / log_n(n) ** 3
    low = alpha * n / (5 * (1 + 2 * alpha))
    high = alpha * n / (4 * (1 + 2 * alpha))
    return v1, (low, high)


def _labels_for(n: int, parts: Sequence[VertexSet]) -> np.ndarray:
    labels = np.full(n, -1, dtype=np.int64)
    for index, part in enumerate(parts):
        for v in part:
            if not 0 <= v < n:
                raise NotAPartition(f"vertex {v} outside [0, {n})")
            if labels[v] != -1:
                raise NotAPartition(f"vertex {v} lies in parts {labels[v]} and {index}")
            labels[v] = index
    missing = np.nonzero(labels < 0)[0]
    if missing.size:
        raise NotAPartition(f"{missing.size} vertices are in no part, e.g. {int(missing[0])}")
    return labels


def check_partition_quality(
    g: Digraph,
    parts: Sequence[VertexSet],
    params: PseudoParams,
    *,
    targets: Sequence[int] | None = None,
    tolerance: float | None = None,
) -> CheckVerdict:
    """Q1 for every vertex and part, and the Q2 size windows for V1..V4.

    With `targets`, V1..V4 must lie within `tolerance` of the resolved sizes
    instead of the asymptotic windows.
    """
    _check_params(g, params)
    started = time.perf_counter()
    labels = _labels_for(g.n, parts)
    tol = tolerance if tolerance is not None else get_settings().checker.q2_tolerance

    def fail(witness: Witness) -> CheckVerdict:
        return CheckVerdict(
            property="Q",
            status="certified-fail",
            witness=witness,
            trials=g.n * len(parts),
            elapsed_ms=_elapsed_ms(started),
        )

    sizes = [len(part) for part in parts]
    if len(parts) != 5:
        return fail([sizes])

    degrees = g.part_degrees(labels, len(parts))
    required = (0.5 + params.alpha) * np.asarray(sizes, dtype=float) * params.p
    short = degrees < required[np.newaxis, :]
    if short.any():
        v, index = np.argwhere(short)[0]
        return fail([[int(v)], [int(index)]])

    if targets is not None:
        for index in range(4):
            target = targets[index]
            if abs(sizes[index] - target) > tol * target:
                return fail([[index], [sizes[index]]])
    else:
        v1, (low, high) = q2_windows(g.n, params.alpha)
        if abs(sizes[0] - v1) > tol * v1:
            return fail([[0], [sizes[0]]])
        for index in (1, 2, 3):
            if not low < sizes[index] < high:
                return fail([[index], [sizes[index]]])

    return CheckVerdict(
        property="Q",
        status="certified-pass",
        trials=g.n * len(parts),
        elapsed_ms=_elapsed_ms(started),
    )


def good_degree_vertices(g: Digraph, universe: VertexSet, c: float, p: float) -> VertexSet:
    """Vertices whose min-degree into `universe` is at least c p |universe|."""
    out_deg, in_deg = g.degrees_into(g.mask(universe))
    good = np.minimum(out_deg, in_deg) >= c * p * len(universe)
    return frozenset(np.nonzero(good)[0].tolist())
