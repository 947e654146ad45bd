"""Expansion predicates and meet-in-the-middle sigma-walk construction."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np

from resilient_ham.connector.base import ReservationLedger
from resilient_ham.digraph import Digraph, Sign, SignPattern, VertexSet, Walk, conforms_to, sigma_layers
from resilient_ham.errors import ExpansionFailed, InternalError, NoBridge, PartialResult

logger = logging.getLogger(__name__)


class _OutOfBudget(Exception):
    pass


def _as_mask(g: Digraph, vertices: VertexSet | np.ndarray) -> np.ndarray:
    return g.mask(vertices)


def big_expansion_holds(g: Digraph, sources: VertexSet, targets: VertexSet, alpha: float) -> bool:
    """|N+(X, Y)| and |N-(X, Y)| both reach (1/2 + alpha/20)|Y|."""
    if not targets:
        return True
    source_mask = g.mask(sources)
    target_mask = g.mask(targets)
    bound = (0.5 + alpha / 20) * len(targets)
    forward = int((g.step(source_mask, Sign.PLUS) & target_mask).sum())
    backward = int((g.step(source_mask, Sign.MINUS) & target_mask).sum())
    return forward >= bound and backward >= bound


def sample_expansion(
    g: Digraph,
    reservoir: VertexSet,
    subset_size: int,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Smallest observed min(|N+(S, R)|, |N-(S, R)|) / |R| over random S of the given size."""
    members = np.array(sorted(reservoir), dtype=np.int64)
    if members.size == 0 or subset_size < 1:
        return 1.0
    reservoir_mask = g.mask(members)
    size = min(subset_size, g.n)
    worst = 1.0
    for _ in range(trials):
        chosen = rng.choice(g.n, size=size, replace=False)
        mask = g.mask(chosen)
        forward = int((g.step(mask, Sign.PLUS) & reservoir_mask).sum())
        backward = int((g.step(mask, Sign.MINUS) & reservoir_mask).sum())
        worst = min(worst, min(forward, backward) / members.size)
    return worst


def expand_to_majority(
    g: Digraph,
    sources: VertexSet,
    targets: VertexSet | np.ndarray,
    sigma: SignPattern,
    ledger: ReservationLedger,
    rng: np.random.Generator,
    *,
    gamma: float,
    threshold: int = 1,
) -> tuple[int, VertexSet]:
    """Pick x in `sources` whose sigma-neighbourhood covers (1/2 + gamma/2) of the free targets.

    Halving: at level i keep a random half of the candidates whose sigma^i image
    stays >= threshold; at the last level halve down to one vertex.
    """
    if len(sigma) < 2:
        raise ExpansionFailed("expansion needs a pattern of length >= 2", level=0)
    target_mask = ledger.free_mask(_as_mask(g, targets))
    candidates = np.array(sorted(sources), dtype=np.int64)
    if candidates.size == 0:
        raise ExpansionFailed("no candidate sources", level=0)
    if target_mask[candidates].any():
        raise ExpansionFailed("sources and targets must be disjoint", level=0)

    def image(group: np.ndarray, level: int) -> int:
        return int(sigma_layers(g, group, target_mask, sigma.prefix(level))[-1].sum())

    for level in range(1, len(sigma)):
        last_level = level == len(sigma) - 1
        if image(candidates, level) < threshold:
            raise ExpansionFailed(
                f"image at level {level} below {threshold}",
                level=level,
                sizes=(int(candidates.size), image(candidates, level)),
            )
        while candidates.size > 1:
            shuffled = rng.permutation(candidates)
            half = math.ceil(shuffled.size / 2)
            halves = [np.sort(shuffled[:half]), np.sort(shuffled[half:])]
            sizes = [image(part, level) for part in halves]
            keep = [i for i in (0, 1) if sizes[i] >= threshold]
            if not keep:
                raise ExpansionFailed(
                    f"neither half keeps an image of {threshold} at level {level}",
                    level=level,
                    sizes=tuple(sizes),
                )
            candidates = halves[max(keep, key=lambda i: (sizes[i], -i))]
            if not last_level:
                break

    chosen = int(candidates[0])
    final = sigma_layers(g, [chosen], target_mask, sigma)[-1]
    reached = frozenset(np.nonzero(final)[0].tolist())
    needed = (0.5 + gamma / 2) * int(target_mask.sum())
    if len(reached) < needed:
        raise ExpansionFailed(
            f"vertex {chosen} reaches {len(reached)} < {needed:.1f}",
            level=len(sigma),
            sizes=(len(reached), int(target_mask.sum())),
        )
    return chosen, reached


def _trace(
    g: Digraph,
    layers: Sequence[np.ndarray],
    pattern: SignPattern,
    root: int,
    end: int,
    blocked: set[int],
    budget: list[int],
    rng: np.random.Generator,
) -> list[int] | None:
    """Vertex-distinct path root=v0, ..., v_d=end with v_j in layers[j] following pattern."""
    depth = len(layers) - 1
    path = [end]
    on_path = {end}

    def visit(vertex: int, level: int) -> bool:
        if level == 0:
            return vertex == root
        budget[0] -= 1
        if budget[0] < 0:
            raise _OutOfBudget
        back = g.neighbors_by_sign(vertex, pattern[level - 1].complement())
        if level - 1 == 0:
            options = [root] if root in set(back.tolist()) else []
        else:
            below = layers[level - 1]
            options = [u for u in back[below[back]].tolist() if u not in on_path and u not in blocked]
            if len(options) > 1:
                options = rng.permutation(options).tolist()
        for u in options:
            path.append(u)
            on_path.add(u)
            if visit(u, level - 1):
                return True
            path.pop()
            on_path.discard(u)
        return False

    if visit(end, depth):
        return list(reversed(path))
    return None


def connect_pair(
    g: Digraph,
    a: int,
    b: int,
    sigma: SignPattern,
    reservoir_a: VertexSet | np.ndarray,
    reservoir_b: VertexSet | np.ndarray,
    ledger: ReservationLedger,
    rng: np.random.Generator,
    *,
    tag: str = "connector",
    budget: int = 20_000,
    bridge_attempts: int = 64,
) -> Walk:
    """A sigma-walk a -> b; the first half grows from a in reservoir_a, the second from b in reservoir_b.

    On success the interior is reserved in the ledger under `tag`.
    """
    length = len(sigma)
    g.check_vertex(a)
    g.check_vertex(b)
    if length == 1:
        u, v = (a, b) if sigma[0] is Sign.PLUS else (b, a)
        if a != b and g.has_arc(u, v):
            return Walk((a, b), sigma)
        raise NoBridge(f"no {sigma[0].value}-arc between {a} and {b}")

    h_a = (length - 1) // 2
    h_b = length - 1 - h_a
    endpoints = g.mask([a, b])
    free_a = ledger.free_mask(_as_mask(g, reservoir_a)) & ~endpoints
    free_b = ledger.free_mask(_as_mask(g, reservoir_b)) & ~endpoints

    forward = [g.mask([a])]
    if h_a:
        forward = sigma_layers(g, [a], free_a, sigma.prefix(h_a))
    backward_pattern = sigma.reverse_complement()
    backward = sigma_layers(g, [b], free_b, backward_pattern.prefix(h_b))
    for level, layer in enumerate(forward[1:], start=1):
        if not layer.any():
            raise ExpansionFailed(f"forward layer {level} from {a} is empty", level=level)
    for level, layer in enumerate(backward[1:], start=1):
        if not layer.any():
            raise ExpansionFailed(f"backward layer {level} from {b} is empty", level=level)

    bridge_sign = sigma[h_a]
    frontier = np.nonzero(forward[-1])[0]
    bridges: list[tuple[int, int]] = []
    for v in frontier.tolist():
        for w in g.neighbors_by_sign(v, bridge_sign).tolist():
            if backward[-1][w] and w != v:
                bridges.append((v, w))
    if not bridges:
        raise NoBridge(f"no {bridge_sign.value}-arc joins the two frontiers of ({a}, {b})")

    order = rng.permutation(len(bridges))[:bridge_attempts]
    remaining = [budget]
    try:
        for index in order.tolist():
            v, w = bridges[index]
            head = _trace(g, forward, sigma, a, v, {b}, remaining, rng) if h_a else [a]
            if head is None or w in head:
                continue
            blocked = set(head) | {a}
            tail = _trace(g, backward, backward_pattern, b, w, blocked, remaining, rng)
            if tail is None:
                continue
            vertices = tuple(head + list(reversed(tail)))
            walk = Walk(vertices, sigma)
            if not conforms_to(g, walk):
                raise InternalError(f"extracted walk {vertices} does not conform")
            ledger.reserve(walk.interior, tag)
            return walk
    except _OutOfBudget:
        logger.debug("extraction budget exhausted for pair (%d, %d)", a, b)
    raise NoBridge(f"no vertex-distinct walk extracted for ({a}, {b})", bridges=len(bridges))


def connect_half_pairs(
    g: Digraph,
    pairs: Sequence[tuple[int, int]],
    reservoir_a: VertexSet | np.ndarray,
    reservoir_b: VertexSet | np.ndarray,
    sigma: SignPattern,
    ledger: ReservationLedger,
    rng: np.random.Generator,
    *,
    target: int | None = None,
    gamma: float = 0.1,
    threshold: int = 1,
    tag: str = "connector",
    budget: int = 20_000,
    bridge_attempts: int = 64,
) -> tuple[list[int], list[Walk]]:
    """Connect floor(t/2) of the pairs (or `target`); indices and walks in connection order.

    Start vertices whose forward image is a majority of the free reservoir are
    tried first. Raises PartialResult, with its walks still reserved, on a shortfall.
    """
    goal = len(pairs) // 2 if target is None else target
    if goal <= 0:
        return [], []
    h_a = (len(sigma) - 1) // 2
    free_a = ledger.free_mask(_as_mask(g, reservoir_a))

    index_of = {a: i for i, (a, _) in enumerate(pairs)}
    preferred: list[int] = []
    if h_a >= 2:
        pool = set(index_of)
        while pool and len(preferred) < goal:
            try:
                chosen, _ = expand_to_majority(
                    g, frozenset(pool), free_a, sigma.prefix(h_a), ledger, rng, gamma=gamma, threshold=threshold
                )
            except ExpansionFailed:
                break
            preferred.append(index_of[chosen])
            pool.discard(chosen)
    rest = [i for i in rng.permutation(len(pairs)).tolist() if i not in set(preferred)]

    connected: list[int] = []
    walks: list[Walk] = []
    for index in preferred + rest:
        if len(connected) >= goal:
            break
        a, b = pairs[index]
        try:
            walk = connect_pair(
                g,
                a,
                b,
                sigma,
                reservoir_a,
                reservoir_b,
                ledger,
                rng,
                tag=tag,
                budget=budget,
                bridge_attempts=bridge_attempts,
            )
        except (NoBridge, ExpansionFailed):
            continue
        connected.append(index)
        walks.append(walk)
    if len(connected) < goal:
        raise PartialResult(f"connected {len(connected)} of the {goal} requested pairs", connected=connected, walks=walks)
    return connected, walks
