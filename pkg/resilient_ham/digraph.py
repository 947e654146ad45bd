"""Immutable simple digraphs and the counting and sigma-walk primitives."""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import sparse

from resilient_ham.errors import EmptyPattern, InvalidParam, InvalidVertex

VertexSet = frozenset[int]


def log_n(n: int) -> float:
    """Natural log guarded from below by 1."""
    return max(1.0, math.log(n)) if n > 1 else 1.0


class Sign(str, Enum):
    PLUS = "+"
    MINUS = "-"

    def complement(self) -> Sign:
        return Sign.MINUS if self is Sign.PLUS else Sign.PLUS

    @classmethod
    def parse(cls, text: str) -> Sign:
        cleaned = text.strip().replace("−", "-")
        if cleaned in {"+", "out"}:
            return cls.PLUS
        if cleaned in {"-", "in"}:
            return cls.MINUS
        raise InvalidParam(f"not a sign: {text!r}")


@dataclass(frozen=True, slots=True)
class SignPattern:
    """A non-empty word over {+, -}; indexing is 0-based."""

    signs: tuple[Sign, ...]

    def __post_init__(self) -> None:
        if not self.signs:
            raise EmptyPattern("sign pattern must have length >= 1")

    @classmethod
    def parse(cls, text: str) -> SignPattern:
        cleaned = text.replace(",", "").replace(" ", "").replace("−", "-")
        if not cleaned:
            raise EmptyPattern("sign pattern must have length >= 1")
        return cls(tuple(Sign.parse(char) for char in cleaned))

    @classmethod
    def all_plus(cls, length: int) -> SignPattern:
        if length < 1:
            raise EmptyPattern("sign pattern must have length >= 1")
        return cls((Sign.PLUS,) * length)

    @classmethod
    def alternating(cls, length: int) -> SignPattern:
        """(+, -, +, ...) of the given length."""
        if length < 1:
            raise EmptyPattern("sign pattern must have length >= 1")
        return cls(tuple(Sign.PLUS if i % 2 == 0 else Sign.MINUS for i in range(length)))

    def prefix(self, length: int) -> SignPattern:
        if not 1 <= length <= len(self.signs):
            raise InvalidParam(f"prefix length {length} outside [1, {len(self.signs)}]")
        return SignPattern(self.signs[:length])

    def slice(self, start: int, stop: int) -> SignPattern:
        """Signs start..stop-1 (0-based), e.g. slice(s, l - s) for the inner pattern."""
        return SignPattern(self.signs[start:stop])

    def reverse_complement(self) -> SignPattern:
        return SignPattern(tuple(sign.complement() for sign in reversed(self.signs)))

    def __len__(self) -> int:
        return len(self.signs)

    def __getitem__(self, index: int) -> Sign:
        return self.signs[index]

    def __iter__(self) -> Iterator[Sign]:
        return iter(self.signs)

    def __str__(self) -> str:
        return "".join(sign.value for sign in self.signs)


@dataclass(frozen=True, slots=True)
class Walk:
    """Vertex sequence v0..vl realizing a pattern of length l."""

    vertices: tuple[int, ...]
    pattern: SignPattern

    def __post_init__(self) -> None:
        if len(self.vertices) != len(self.pattern) + 1:
            raise InvalidParam(
                f"walk has {len(self.vertices)} vertices for a pattern of length {len(self.pattern)}"
            )

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    @property
    def interior(self) -> tuple[int, ...]:
        return self.vertices[1:-1]

    @property
    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    def __len__(self) -> int:
        return len(self.pattern)

    def reversed(self) -> Walk:
        """The same walk read backwards, under the reverse-complement pattern."""
        return Walk(tuple(reversed(self.vertices)), self.pattern.reverse_complement())


class Digraph:
    """Simple digraph on vertices 0..n-1.

    Adjacency is held twice as sorted CSR arrays (out and in) for layer
    expansion, plus a frozenset of u*n+v keys for O(1) arc probes.
    """

    __slots__ = ("_n", "_src", "_dst", "_keys", "_out", "_in")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]] = ()) -> None:
        if n < 0:
            raise InvalidParam(f"vertex count must be >= 0, got {n}")
        pairs = np.asarray(list(arcs), dtype=np.int64).reshape(-1, 2)
        src, dst = pairs[:, 0], pairs[:, 1]
        if pairs.size:
            bad = (src < 0) | (src >= n) | (dst < 0) | (dst >= n)
            if bad.any():
                u, v = pairs[int(np.argmax(bad))]
                raise InvalidVertex(f"arc ({u}, {v}) has an endpoint outside [0, {n})")
            loops = src == dst
            if loops.any():
                raise InvalidParam(f"self-loop at vertex {int(src[int(np.argmax(loops))])}")
        self._build(n, src, dst, check_duplicates=True)

    @classmethod
    def from_adjacency(cls, matrix: np.ndarray) -> Digraph:
        """Build from a boolean n x n matrix; the diagonal must be clear."""
        matrix = np.asarray(matrix, dtype=bool)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidParam("adjacency matrix must be square")
        if matrix.diagonal().any():
            raise InvalidParam("adjacency matrix has self-loops")
        src, dst = np.nonzero(matrix)
        graph = cls.__new__(cls)
        graph._build(matrix.shape[0], src.astype(np.int64), dst.astype(np.int64), check_duplicates=False)
        return graph

    @classmethod
    def complete(cls, n: int) -> Digraph:
        matrix = np.ones((n, n), dtype=bool)
        np.fill_diagonal(matrix, False)
        return cls.from_adjacency(matrix)

    def _build(self, n: int, src: np.ndarray, dst: np.ndarray, *, check_duplicates: bool) -> None:
        keys = src * n + dst
        order = np.argsort(keys, kind="stable")
        keys = keys[order]
        if check_duplicates and keys.size > 1:
            dup = keys[1:] == keys[:-1]
            if dup.any():
                key = int(keys[1:][dup][0])
                raise InvalidParam(f"duplicate arc ({key // n}, {key % n})")
        self._n = n
        self._src = src[order]
        self._dst = dst[order]
        self._keys = frozenset(keys.tolist())
        data = np.ones(keys.size, dtype=np.int32)
        self._out = sparse.csr_array((data, (self._src, self._dst)), shape=(n, n))
        self._out.sort_indices()
        self._in = sparse.csr_array((data, (self._dst, self._src)), shape=(n, n))
        self._in.sort_indices()

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return int(self._src.size)

    @property
    def density(self) -> float:
        """m / (n (n - 1)); 0 below two vertices."""
        return self.m / (self.n * (self.n - 1)) if self.n > 1 else 0.0

    def arcs(self) -> list[tuple[int, int]]:
        """Arcs in (u, v) lexicographic order."""
        return list(zip(self._src.tolist(), self._dst.tolist()))

    def has_arc(self, u: int, v: int) -> bool:
        return 0 <= u < self._n and 0 <= v < self._n and u * self._n + v in self._keys

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self._n:
            raise InvalidVertex(f"vertex {v} outside [0, {self._n})")

    def out_neighbors(self, v: int) -> np.ndarray:
        self.check_vertex(v)
        return self._out.indices[self._out.indptr[v] : self._out.indptr[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        self.check_vertex(v)
        return self._in.indices[self._in.indptr[v] : self._in.indptr[v + 1]]

    def neighbors_by_sign(self, v: int, sign: Sign) -> np.ndarray:
        return self.out_neighbors(v) if sign is Sign.PLUS else self.in_neighbors(v)

    def out_degrees(self) -> np.ndarray:
        return np.diff(self._out.indptr)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self._in.indptr)

    def mask(self, vertices: Iterable[int] | np.ndarray | None = None) -> np.ndarray:
        """Boolean membership vector; None means every vertex."""
        if vertices is None:
            return np.ones(self._n, dtype=bool)
        if isinstance(vertices, np.ndarray) and vertices.dtype == bool:
            return vertices.copy()
        out = np.zeros(self._n, dtype=bool)
        index = np.fromiter(vertices, dtype=np.int64)
        if index.size:
            if index.min() < 0 or index.max() >= self._n:
                raise InvalidVertex(f"vertex set not within [0, {self._n})")
            out[index] = True
        return out

    def step(self, source: np.ndarray, sign: Sign) -> np.ndarray:
        """Mask of N^sign(source): one step along out-arcs (+) or in-arcs (-)."""
        weights = source.astype(np.int32)
        if sign is Sign.PLUS:
            return (self._in @ weights) > 0
        return (self._out @ weights) > 0

    def degrees_into(self, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-vertex (out-degree into target, in-degree from target)."""
        weights = target.astype(np.int32)
        return self._out @ weights, self._in @ weights

    def part_degrees(self, labels: np.ndarray, parts: int) -> np.ndarray:
        """n x parts matrix of min(out, in) degree into each labelled part.

        `labels[v]` is the part index of v, or -1 for unlabelled vertices.
        """
        indicator = np.zeros((self._n, max(parts, 1)), dtype=np.int32)
        labelled = np.nonzero(labels >= 0)[0]
        indicator[labelled, labels[labelled]] = 1
        out_counts = np.asarray(self._out @ indicator)
        in_counts = np.asarray(self._in @ indicator)
        return np.minimum(out_counts, in_counts)[:, :parts]

    def bitmasks(self) -> tuple[list[int], list[int]]:
        """Python-int adjacency bitmasks (out, in) for the exhaustive checkers."""
        out_masks = [0] * self._n
        in_masks = [0] * self._n
        for u, v in zip(self._src.tolist(), self._dst.tolist()):
            out_masks[u] |= 1 << v
            in_masks[v] |= 1 << u
        return out_masks, in_masks

    def without(self, arcs: Iterable[tuple[int, int]]) -> Digraph:
        """A new digraph with the given arcs removed (absent arcs are ignored)."""
        drop = np.fromiter((u * self._n + v for u, v in arcs), dtype=np.int64)
        keys = self._src * self._n + self._dst
        keep = ~np.isin(keys, drop)
        graph = Digraph.__new__(Digraph)
        graph._build(self._n, self._src[keep], self._dst[keep], check_duplicates=False)
        return graph

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return self._n == other._n and self._keys == other._keys

    def __hash__(self) -> int:
        return hash((self._n, self._keys))

    def __repr__(self) -> str:
        return f"Digraph(n={self._n}, m={self.m})"


def _within_mask(g: Digraph, within: Iterable[int] | np.ndarray | None) -> np.ndarray:
    return g.mask(within)


def neighbors(g: Digraph, v: int, direction: Sign, within: Iterable[int] | None = None) -> VertexSet:
    """N^direction(v) intersected with `within`."""
    found = g.neighbors_by_sign(v, direction)
    if within is None:
        return frozenset(found.tolist())
    keep = _within_mask(g, within)
    return frozenset(found[keep[found]].tolist())


def deg_pm(g: Digraph, v: int, within: Iterable[int] | None = None) -> int:
    """min(d+(v, within), d-(v, within))."""
    return min(
        len(neighbors(g, v, Sign.PLUS, within)),
        len(neighbors(g, v, Sign.MINUS, within)),
    )


def edge_count_between(g: Digraph, sources: Iterable[int], targets: Iterable[int]) -> int:
    """Number of arcs (x, y) with x in sources and y in targets."""
    source_mask = g.mask(sources)
    out_into_targets, _ = g.degrees_into(g.mask(targets))
    return int(out_into_targets[source_mask].sum())


def edge_count_within(g: Digraph, vertices: Iterable[int]) -> int:
    members = list(vertices)
    return edge_count_between(g, members, members)


def sigma_layers(
    g: Digraph,
    sources: Iterable[int] | np.ndarray,
    allowed: Iterable[int] | np.ndarray | None,
    sigma: SignPattern,
) -> list[np.ndarray]:
    """Layer masks L0 = sources, Li = N^sigma(i)(L(i-1)) within allowed minus sources.

    Vertex repetition along a walk is not tracked here; extraction enforces it.
    """
    start = g.mask(sources)
    permitted = g.mask(allowed) & ~start
    layers = [start]
    current = start
    for sign in sigma:
        current = g.step(current, sign) & permitted
        layers.append(current)
    return layers


def _distinct_walk_to(g: Digraph, layers: list[np.ndarray], sigma: SignPattern, end: int) -> bool:
    """Backtrack from `end` through the layers looking for a walk with pairwise distinct vertices."""
    used = {end}

    def back(v: int, depth: int) -> bool:
        if depth == 0:
            return True
        previous = layers[depth - 1]
        for u in g.neighbors_by_sign(v, sigma[depth - 1].complement()).tolist():
            if not previous[u] or u in used:
                continue
            used.add(u)
            if back(u, depth - 1):
                return True
            used.discard(u)
        return False

    return back(end, len(sigma))


def sigma_neighborhood(
    g: Digraph,
    sources: Iterable[int],
    allowed: Iterable[int] | None,
    sigma: SignPattern,
) -> VertexSet:
    """Endpoints of sigma-walks from `sources` with distinct vertices, non-initial ones in `allowed`.

    The layers over-approximate; each candidate endpoint is confirmed by backtracking.
    """
    layers = sigma_layers(g, sources, allowed, sigma)
    candidates = np.nonzero(layers[-1])[0].tolist()
    if len(sigma) == 1:
        return frozenset(candidates)
    return frozenset(b for b in candidates if _distinct_walk_to(g, layers, sigma, b))


def conforms_to(g: Digraph, walk: Walk) -> bool:
    """True iff the walk is internally distinct and every patterned arc exists."""
    try:
        vertices = walk.vertices
        if len(vertices) != len(walk.pattern) + 1:
            return False
        body = vertices[:-1]
        if len(set(body)) != len(body):
            return False
        if vertices[-1] in body[1:]:
            return False
        for i, sign in enumerate(walk.pattern):
            u, v = vertices[i], vertices[i + 1]
            if sign is Sign.PLUS and not g.has_arc(u, v):
                return False
            if sign is Sign.MINUS and not g.has_arc(v, u):
                return False
    except (TypeError, AttributeError):
        return False
    return True


def verify_hamilton_cycle(g: Digraph, cycle: Sequence[int]) -> bool:
    """True iff cycle is a permutation of V and every consecutive arc, last to first included, exists."""
    order = list(cycle)
    if g.n < 2 or len(order) != g.n or set(order) != set(range(g.n)):
        return False
    return all(g.has_arc(order[i], order[(i + 1) % g.n]) for i in range(g.n))
