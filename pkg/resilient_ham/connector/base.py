"""Connect request, strategy protocol and the reservation ledger."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from resilient_ham.digraph import Digraph, SignPattern, VertexSet, Walk, conforms_to
from resilient_ham.errors import HypothesisViolated, InternalError, InvalidParam


@dataclass(frozen=True, slots=True)
class ConnectRequest:
    """Connect every (a_i, b_i) by a sigma-walk whose interior lies in the reservoir.

    a_i = b_i asks for a closed walk through a_i.
    """

    pairs: tuple[tuple[int, int], ...]
    reservoir: VertexSet
    sigma: SignPattern

    @property
    def t(self) -> int:
        return len(self.pairs)

    @property
    def length(self) -> int:
        return len(self.sigma)

    def endpoints(self) -> VertexSet:
        return frozenset(v for pair in self.pairs for v in pair)


class ConnectStrategy(Protocol):
    """Strategy contract for connecting all pairs of a request."""

    name: str

    def connect(
        self,
        g: Digraph,
        request: ConnectRequest,
        ledger: ReservationLedger,
        rng: np.random.Generator,
        *,
        tag: str,
    ) -> list[Walk]:
        """Walks in request order, interiors reserved under `tag`; a typed error otherwise."""


@dataclass(slots=True)
class ReservationLedger:
    """Vertices already used as walk interiors, each under a stage tag."""

    n: int
    _reserved: np.ndarray = field(init=False)
    _tags: dict[int, str] = field(init=False, default_factory=dict)

    def __post_init__(self) -> None:
        self._reserved = np.zeros(self.n, dtype=bool)

    def reserve(self, vertices: Iterable[int], tag: str) -> None:
        batch = list(vertices)
        if len(set(batch)) != len(batch):
            raise InternalError(f"reservation under {tag!r} repeats a vertex")
        clash = [v for v in batch if self._reserved[v]]
        if clash:
            raise InternalError(f"vertex {clash[0]} already reserved under {self._tags[clash[0]]!r}")
        for v in batch:
            self._reserved[v] = True
            self._tags[v] = tag

    def release(self, vertices: Iterable[int]) -> None:
        for v in vertices:
            if not self._reserved[v]:
                raise InternalError(f"vertex {v} released but not reserved")
            self._reserved[v] = False
            del self._tags[v]

    def is_reserved(self, v: int) -> bool:
        return bool(self._reserved[v])

    def free_mask(self, base: np.ndarray) -> np.ndarray:
        return base & ~self._reserved

    def tagged(self, tag: str) -> VertexSet:
        return frozenset(v for v, owner in self._tags.items() if owner == tag)

    def reserved(self) -> VertexSet:
        return frozenset(self._tags)

    def __len__(self) -> int:
        return len(self._tags)


def validate_request(g: Digraph, request: ConnectRequest, *, reservoir_factor: float | None = None) -> None:
    """Structural hypotheses: distinct endpoints, reservoir apart from them and large enough."""
    starts = [a for a, _ in request.pairs]
    ends = [b for _, b in request.pairs]
    for v in starts + ends:
        g.check_vertex(v)
    if len(set(starts)) != len(starts) or len(set(ends)) != len(ends):
        raise InvalidParam("pair starts and pair ends must each be pairwise distinct")
    overlap = request.reservoir & request.endpoints()
    if overlap:
        raise HypothesisViolated("reservoir meets pair endpoints", witness=sorted(overlap)[:8])
    if request.t and request.length >= 2 and not request.reservoir:
        raise HypothesisViolated("walks of length >= 2 need a non-empty reservoir")
    needed = request.t * (request.length - 1)
    if len(request.reservoir) < needed:
        raise HypothesisViolated(
            f"reservoir of {len(request.reservoir)} cannot hold {needed} interior vertices",
            witness=[len(request.reservoir), needed],
        )
    if reservoir_factor is not None:
        check_reservoir_floor(request, reservoir_factor)


def check_reservoir_floor(request: ConnectRequest, reservoir_factor: float) -> None:
    """The reservoir holds at least c_K t l vertices."""
    floor = reservoir_factor * request.t * request.length
    if len(request.reservoir) < floor:
        raise HypothesisViolated(
            f"reservoir of {len(request.reservoir)} below c_K t l = {floor:.1f}",
            witness=[len(request.reservoir), floor],
        )


def audit_walks(g: Digraph, request: ConnectRequest, walks: Sequence[Walk]) -> None:
    """Raise InternalError unless the walks answer the request exactly."""
    if len(walks) != request.t:
        raise InternalError(f"expected {request.t} walks, got {len(walks)}")
    endpoints = request.endpoints()
    seen: set[int] = set()
    for (a, b), walk in zip(request.pairs, walks):
        if walk.start != a or walk.end != b:
            raise InternalError(f"walk {walk.start}->{walk.end} answers pair ({a}, {b})")
        if walk.pattern != request.sigma or not conforms_to(g, walk):
            raise InternalError(f"walk for pair ({a}, {b}) does not conform to the pattern")
        for v in walk.interior:
            if v not in request.reservoir or v in endpoints or v in seen:
                raise InternalError(f"interior vertex {v} of pair ({a}, {b}) leaves the reservoir or is shared")
            seen.add(v)
