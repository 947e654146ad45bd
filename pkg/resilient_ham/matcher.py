"""Bipartite matchings between vertex sets of a digraph, with Hall witnesses on failure."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import networkx as nx
from networkx.algorithms import bipartite

from resilient_ham.digraph import Digraph, Sign, VertexSet
from resilient_ham.errors import HallViolation, InvalidParam

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class BipartiteInstance:
    """Left-to-right edges are the arcs u -> v (dir +) or v -> u (dir -)."""

    left: VertexSet
    right: VertexSet
    direction: Sign
    host: Digraph

    def __post_init__(self) -> None:
        if self.left & self.right:
            raise InvalidParam("left and right sides must be disjoint")

    def edges(self) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        for u in sorted(self.left):
            for v in self.host.neighbors_by_sign(u, self.direction).tolist():
                if v in self.right:
                    out.append((u, v))
        return out


@dataclass(frozen=True, slots=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)


def _is_arc(g: Digraph, u: int, v: int, direction: Sign) -> bool:
    return g.has_arc(u, v) if direction is Sign.PLUS else g.has_arc(v, u)


def verify_matching(inst: BipartiteInstance, matching: Matching, *, per_left: int = 1) -> bool:
    """Arc-by-arc recheck; each left vertex used at most `per_left` times, each right at most once."""
    lefts: dict[int, int] = {}
    rights: set[int] = set()
    for u, v in matching.pairs:
        if u not in inst.left or v not in inst.right or v in rights:
            return False
        if not _is_arc(inst.host, u, v, inst.direction):
            return False
        lefts[u] = lefts.get(u, 0) + 1
        if lefts[u] > per_left:
            return False
        rights.add(v)
    return True


def _solve(
    left_nodes: list[tuple],
    right_nodes: list[tuple],
    edges: list[tuple[tuple, tuple]],
) -> tuple[nx.Graph, dict]:
    graph = nx.Graph()
    graph.add_nodes_from(left_nodes, bipartite=0)
    graph.add_nodes_from(right_nodes, bipartite=1)
    graph.add_edges_from(edges)
    matching = bipartite.hopcroft_karp_matching(graph, top_nodes=left_nodes)
    return graph, matching


def _hall_witness(
    graph: nx.Graph,
    matching: dict,
    left_nodes: list[tuple],
    right_nodes: list[tuple],
) -> tuple[set[tuple], set[tuple]]:
    """Left and right nodes outside a minimum vertex cover; each side's set outnumbers its neighbourhood."""
    cover = bipartite.to_vertex_cover(graph, matching, top_nodes=left_nodes)
    return (
        {node for node in left_nodes if node not in cover},
        {node for node in right_nodes if node not in cover},
    )


def max_bipartite_matching(inst: BipartiteInstance) -> Matching:
    """Maximum-cardinality matching (Hopcroft-Karp over sorted adjacency)."""
    left_nodes = [("L", u) for u in sorted(inst.left)]
    right_nodes = [("R", v) for v in sorted(inst.right)]
    edges = [(("L", u), ("R", v)) for u, v in inst.edges()]
    _, matching = _solve(left_nodes, right_nodes, edges)
    pairs = tuple(sorted((node[1], matching[node][1]) for node in left_nodes if node in matching))
    return Matching(pairs)


def _perfect_matching(inst: BipartiteInstance) -> Matching:
    left_nodes = [("L", u) for u in sorted(inst.left)]
    right_nodes = [("R", v) for v in sorted(inst.right)]
    edges = [(("L", u), ("R", v)) for u, v in inst.edges()]
    graph, matching = _solve(left_nodes, right_nodes, edges)
    pairs = tuple(sorted((node[1], matching[node][1]) for node in left_nodes if node in matching))
    if len(pairs) == len(left_nodes):
        return Matching(pairs)
    left_side, right_side = _hall_witness(graph, matching, left_nodes, right_nodes)
    witness = frozenset(node[1] for node in left_side)
    neighborhood = frozenset(v for u, v in inst.edges() if u in witness)
    exc = HallViolation(
        f"{len(witness)} left vertices have only {len(neighborhood)} neighbours",
        witness=witness,
        neighborhood=neighborhood,
    )
    exc.context["right_witness"] = frozenset(node[1] for node in right_side)
    raise exc


def perfect_matching_chain(segments: Sequence[VertexSet], g: Digraph) -> list[Matching]:
    """A perfect matching along + from each segment into the next."""
    sizes = {len(segment) for segment in segments}
    if len(sizes) > 1:
        raise InvalidParam(f"segments must have equal sizes, got {sorted(sizes)}")
    chain: list[Matching] = []
    for index in range(len(segments) - 1):
        inst = BipartiteInstance(segments[index], segments[index + 1], Sign.PLUS, g)
        try:
            chain.append(_perfect_matching(inst))
        except HallViolation as exc:
            exc.context["segment"] = index
            logger.debug("segment %d has no perfect matching into segment %d", index, index + 1)
            raise
    return chain


def two_matching(sources: VertexSet, target: VertexSet, direction: Sign, g: Digraph) -> Matching:
    """Two distinct direction-neighbours in `target` for every source, all targets distinct."""
    inst = BipartiteInstance(sources, target, direction, g)
    ordered = sorted(sources)
    left_nodes = [("L", u, copy) for u in ordered for copy in (0, 1)]
    right_nodes = [("R", v) for v in sorted(target)]
    edges = [(("L", u, copy), ("R", v)) for u, v in inst.edges() for copy in (0, 1)]
    graph, matching = _solve(left_nodes, right_nodes, edges)
    matched = [node for node in left_nodes if node in matching]
    if len(matched) == len(left_nodes):
        pairs = tuple(sorted((node[1], matching[node][1]) for node in left_nodes))
        return Matching(pairs)
    left_side, _ = _hall_witness(graph, matching, left_nodes, right_nodes)
    witness = frozenset(node[1] for node in left_side)
    neighborhood = frozenset(v for u, v in inst.edges() if u in witness)
    raise HallViolation(
        f"{len(witness)} sources have only {len(neighborhood)} neighbours, need twice as many",
        witness=witness,
        neighborhood=neighborhood,
        demand=2,
    )


def link_matching(g: Digraph, tails: Sequence[int], heads: Sequence[int]) -> dict[int, int]:
    """Maximum set of links i -> j with i != j and an arc tails[i] -> heads[j]; each i and j links once."""
    if len(tails) != len(heads):
        raise InvalidParam(f"{len(tails)} tails but {len(heads)} heads")
    position = {v: j for j, v in enumerate(heads)}
    left_nodes = [("T", i) for i in range(len(tails))]
    right_nodes = [("H", j) for j in range(len(heads))]
    edges = [
        (("T", i), ("H", position[v]))
        for i, u in enumerate(tails)
        for v in g.neighbors_by_sign(u, Sign.PLUS).tolist()
        if v in position and position[v] != i
    ]
    _, matching = _solve(left_nodes, right_nodes, edges)
    return {node[1]: matching[node][1] for node in left_nodes if node in matching}
