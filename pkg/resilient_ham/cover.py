"""Join the paths of a path cover into fewer paths along arcs of the digraph.

Each round links path ends to path starts with a maximum matching. Linked
paths form chains and closed rings; a ring is opened where some chain enters,
leaves or can host it, and finally any two chains are spliced when one fits
between two consecutive vertices of the other. Every output is a vertex
partition of the input into directed paths.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

from resilient_ham.digraph import Digraph
from resilient_ham.matcher import link_matching

logger = logging.getLogger(__name__)

DirectedPath = tuple[int, ...]


def _follow_links(paths: Sequence[DirectedPath], links: dict[int, int]) -> tuple[list[list[int]], list[list[int]]]:
    """Chains and rings formed by the links; a ring closes along an arc from its last vertex to its first."""
    has_predecessor = set(links.values())
    seen: set[int] = set()
    chains: list[list[int]] = []
    for i in range(len(paths)):
        if i in has_predecessor:
            continue
        chain: list[int] = []
        j: int | None = i
        while j is not None:
            seen.add(j)
            chain.extend(paths[j])
            j = links.get(j)
        chains.append(chain)
    rings: list[list[int]] = []
    for i in range(len(paths)):
        if i in seen:
            continue
        ring: list[int] = []
        j = i
        while j not in seen:
            seen.add(j)
            ring.extend(paths[j])
            j = links[j]
        rings.append(ring)
    return chains, rings


def _attach_ring(g: Digraph, ring: list[int], chains: list[list[int]]) -> bool:
    """Open the ring into some chain; False when no arc allows it."""
    position = {v: q for q, v in enumerate(ring)}
    size = len(ring)
    for chain in chains:
        for v in g.out_neighbors(chain[-1]).tolist():
            q = position.get(v)
            if q is not None:
                chain.extend(ring[q:] + ring[:q])
                return True
        for v in g.in_neighbors(chain[0]).tolist():
            q = position.get(v)
            if q is not None:
                chain[:0] = ring[q + 1 :] + ring[: q + 1]
                return True
    for chain in chains:
        for i in range(len(chain) - 1):
            after = chain[i + 1]
            for v in g.out_neighbors(chain[i]).tolist():
                q = position.get(v)
                if q is not None and g.has_arc(ring[(q - 1) % size], after):
                    chain[i + 1 : i + 1] = ring[q:] + ring[:q]
                    return True
    return False


def _insert(g: Digraph, inner: list[int], outer: list[int]) -> list[int] | None:
    """outer[:j] + inner + outer[j:] for the first j whose two seams are arcs."""
    if g.has_arc(inner[-1], outer[0]):
        return inner + outer
    if g.has_arc(outer[-1], inner[0]):
        return outer + inner
    position = {v: j for j, v in enumerate(outer)}
    for v in g.out_neighbors(inner[-1]).tolist():
        j = position.get(v)
        if j and g.has_arc(outer[j - 1], inner[0]):
            return outer[:j] + inner + outer[j:]
    return None


def _splice_chains(g: Digraph, chains: list[list[int]]) -> list[list[int]]:
    """Splice until no two chains combine; settled chains are pairwise unspliceable."""
    pending = list(chains)
    settled: list[list[int]] = []
    while pending:
        chain = pending.pop()
        for index, other in enumerate(settled):
            joined = _insert(g, chain, other) or _insert(g, other, chain)
            if joined is not None:
                del settled[index]
                pending.append(joined)
                break
        else:
            settled.append(chain)
    return settled


def merge_round(g: Digraph, paths: Sequence[DirectedPath]) -> list[DirectedPath]:
    links = link_matching(g, [path[-1] for path in paths], [path[0] for path in paths])
    chains, rings = _follow_links(paths, links)
    for ring in rings:
        if not _attach_ring(g, ring, chains):
            # opened by dropping its closing arc
            chains.append(ring)
    chains = _splice_chains(g, chains)
    return sorted((tuple(chain) for chain in chains), key=lambda path: path[0])


def merge_path_cover(g: Digraph, paths: Sequence[DirectedPath], *, rounds: int) -> list[DirectedPath]:
    """Fewer vertex-disjoint paths over the same vertices; stops early once a round gains nothing."""
    current = list(paths)
    for index in range(rounds):
        if len(current) <= 1:
            break
        merged = merge_round(g, current)
        if len(merged) >= len(current):
            break
        logger.debug("merge round %d: %d -> %d paths", index, len(current), len(merged))
        current = merged
    return current
