"""Absorbers: a (4k+3)-cycle through a special vertex x plus 2k chord paths.

Each absorber offers two x_s -> x_t paths over the same vertices, one
through x and one avoiding it. The backbone strings the non-absorbing
paths together; absorbing a set W swaps in the absorbing path of every
absorber whose special vertex lies in W.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property

from pydantic import BaseModel

from resilient_ham.config import ScaleConfig
from resilient_ham.connector import ConnectRequest, ReservationLedger, connect_all
from resilient_ham.digraph import Digraph, Sign, SignPattern, VertexSet, Walk, conforms_to
from resilient_ham.errors import InternalError, InvalidParam, NotAbsorbable
from resilient_ham.pseudorandom import PseudoParams
from resilient_ham.rng import derive_seed
from resilient_ham.scale import ResolvedScale

logger = logging.getLogger(__name__)


def _s(i: int) -> str:
    return f"s{i}"


def _t(i: int) -> str:
    return f"t{i}"


@dataclass(frozen=True)
class AbsorberTemplate:
    """Labelled cycle x_s, x, s1..s2k, t1..t2k, x_t with 4k+3 oriented arcs; chords run s_i -> t_i."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidParam(f"absorber k must be >= 1, got {self.k}")
        degree: dict[str, int] = {label: 0 for label in self.labels}
        for u, v in self.arcs:
            degree[u] += 1
            degree[v] += 1
        if len(self.arcs) != 4 * self.k + 3 or any(d != 2 for d in degree.values()):
            raise InternalError(f"absorber template for k={self.k} is not a cycle")

    @cached_property
    def labels(self) -> tuple[str, ...]:
        two_k = 2 * self.k
        return ("x_s", "x", *(_s(i) for i in range(1, two_k + 1)), *(_t(i) for i in range(1, two_k + 1)), "x_t")

    @cached_property
    def arcs(self) -> tuple[tuple[str, str], ...]:
        k = self.k
        two_k = 2 * k
        arcs = [("x_s", "x"), ("x", _s(1))]
        arcs += [(_t(i), _s(i + 1)) for i in range(1, two_k)]
        arcs += [(_t(two_k), "x_t"), ("x_s", _s(2))]
        arcs += [(_t(2 * i), _s(2 * i + 2)) for i in range(1, k)]
        arcs += [(_t(2 * i - 1), _s(2 * i + 1)) for i in range(1, k)]
        arcs += [(_t(two_k - 1), "x_t"), (_t(two_k), _s(1))]
        return tuple(arcs)

    @property
    def chord_ends(self) -> tuple[tuple[str, str], ...]:
        return tuple((_s(i), _t(i)) for i in range(1, 2 * self.k + 1))

    def cycle_order(self) -> tuple[str, ...]:
        """Labels met walking the cycle from x along x -> s1, x excluded at the end."""
        adjacent: dict[str, list[str]] = {label: [] for label in self.labels}
        for u, v in self.arcs:
            adjacent[u].append(v)
            adjacent[v].append(u)
        order = ["x", _s(1)]
        while len(order) < len(self.labels):
            previous, current = order[-2], order[-1]
            order.append(next(w for w in adjacent[current] if w != previous))
        return tuple(order)

    def sigma(self) -> SignPattern:
        arc_set = set(self.arcs)
        order = self.cycle_order() + ("x",)
        return SignPattern(
            tuple(Sign.PLUS if (u, v) in arc_set else Sign.MINUS for u, v in zip(order, order[1:]))
        )


def absorber_template(k: int) -> AbsorberTemplate:
    return AbsorberTemplate(k)


def absorber_sigma(k: int) -> SignPattern:
    """Pattern of the template cycle read from x towards s1; a closed walk at x under it is a copy of the cycle."""
    return AbsorberTemplate(k).sigma()


@dataclass(frozen=True)
class Absorber:
    template: AbsorberTemplate
    assignment: dict[str, int]
    chords: tuple[Walk, ...]

    @property
    def x(self) -> int:
        return self.assignment["x"]

    @property
    def start(self) -> int:
        return self.assignment["x_s"]

    @property
    def end(self) -> int:
        return self.assignment["x_t"]

    @property
    def chord_length(self) -> int:
        return len(self.chords[0])

    def vertices(self) -> VertexSet:
        members = set(self.assignment.values())
        for chord in self.chords:
            members.update(chord.interior)
        return frozenset(members)

    def chord(self, i: int) -> tuple[int, ...]:
        """Chord P_i (1-based) with both ends."""
        return self.chords[i - 1].vertices

    def cycle_arcs(self) -> list[tuple[int, int]]:
        return [(self.assignment[u], self.assignment[v]) for u, v in self.template.arcs]


def absorbing_path(a: Absorber) -> Walk:
    """x_s, x, s1, P1, t1, s2, P2, ..., t2k, x_t."""
    vertices = [a.start, a.x]
    for i in range(1, 2 * a.template.k + 1):
        vertices.extend(a.chord(i))
    vertices.append(a.end)
    return Walk(tuple(vertices), SignPattern.all_plus(len(vertices) - 1))


def non_absorbing_path(a: Absorber) -> Walk:
    """x_s, s2, P2, t2, s4, ..., t2k, s1, P1, t1, s3, ..., t(2k-1), x_t."""
    k = a.template.k
    vertices = [a.start]
    for i in [*range(2, 2 * k + 1, 2), *range(1, 2 * k, 2)]:
        vertices.extend(a.chord(i))
    vertices.append(a.end)
    return Walk(tuple(vertices), SignPattern.all_plus(len(vertices) - 1))


def validate_absorber(g: Digraph, a: Absorber) -> bool:
    """Recheck the embedding, the chords, and both extracted paths."""
    try:
        template = a.template
        if set(a.assignment) != set(template.labels):
            return False
        placed = list(a.assignment.values())
        if len(set(placed)) != len(placed):
            return False
        if not all(g.has_arc(u, v) for u, v in a.cycle_arcs()):
            return False
        if len(a.chords) != 2 * template.k:
            return False
        used = set(placed)
        for (s_label, t_label), chord in zip(template.chord_ends, a.chords):
            if chord.start != a.assignment[s_label] or chord.end != a.assignment[t_label]:
                return False
            if not all(sign is Sign.PLUS for sign in chord.pattern) or not conforms_to(g, chord):
                return False
            if used & set(chord.interior):
                return False
            used.update(chord.interior)
        ell = a.chord_length
        if any(len(chord) != ell for chord in a.chords):
            return False
        if len(a.vertices()) != 3 + 2 * template.k * (ell + 1):
            return False
        with_x = absorbing_path(a)
        without_x = non_absorbing_path(a)
        if not (conforms_to(g, with_x) and conforms_to(g, without_x)):
            return False
        if (with_x.start, with_x.end) != (without_x.start, without_x.end):
            return False
        return set(with_x.vertices) ^ set(without_x.vertices) == {a.x}
    except (KeyError, IndexError, InvalidParam):
        return False


class AbsorberDump(BaseModel):
    """JSON form of one absorber."""

    k: int
    ell: int
    assignment: dict[str, int]
    cycle_arcs: list[tuple[int, int]]
    chords: list[list[int]]

    @classmethod
    def from_absorber(cls, a: Absorber) -> AbsorberDump:
        return cls(
            k=a.template.k,
            ell=a.chord_length,
            assignment=dict(a.assignment),
            cycle_arcs=a.cycle_arcs(),
            chords=[list(chord.vertices) for chord in a.chords],
        )


def build_absorbers(
    g: Digraph,
    v1: VertexSet,
    v2: VertexSet,
    v3: VertexSet,
    resolved: ResolvedScale,
    scale: ScaleConfig,
    seed: int,
    *,
    ledger: ReservationLedger | None = None,
    params: PseudoParams | None = None,
    notes: list[str] | None = None,
) -> list[Absorber]:
    """One absorber per x in V1: cycles through V2, chords through V3."""
    if v1 & v2 or v1 & v3 or v2 & v3:
        raise InvalidParam("V1, V2 and V3 must be pairwise disjoint")
    if not v1:
        return []
    ledger = ledger if ledger is not None else ReservationLedger(g.n)
    template = AbsorberTemplate(resolved.k)
    specials = sorted(v1)

    cycles = connect_all(
        g,
        ConnectRequest(tuple((x, x) for x in specials), frozenset(v2), template.sigma()),
        scale,
        derive_seed(seed, "cycles"),
        ledger=ledger,
        tag="cycles",
        params=params,
        notes=notes,
    )
    order = template.cycle_order()
    assignments = [dict(zip(order, walk.vertices[:-1])) for walk in cycles]

    chord_pairs = tuple(
        (assignment[s_label], assignment[t_label])
        for assignment in assignments
        for s_label, t_label in template.chord_ends
    )
    chords = connect_all(
        g,
        ConnectRequest(chord_pairs, frozenset(v3), SignPattern.all_plus(resolved.chord_length)),
        scale,
        derive_seed(seed, "chords"),
        ledger=ledger,
        tag="chords",
        params=params,
        notes=notes,
    )
    per = 2 * template.k
    absorbers = [
        Absorber(template, assignment, tuple(chords[i * per : (i + 1) * per]))
        for i, assignment in enumerate(assignments)
    ]
    if scale.debug_invariants:
        for absorber in absorbers:
            if not validate_absorber(g, absorber):
                raise InternalError(f"absorber for {absorber.x} failed validation")
    logger.info("built %d absorbers k=%d chord_length=%d", len(absorbers), template.k, resolved.chord_length)
    return absorbers


@dataclass(frozen=True)
class AbsorbingStructure:
    """Backbone P*: non-absorbing paths joined by connector walks through V4."""

    absorbers: tuple[Absorber, ...]
    connectors: tuple[Walk, ...]
    path: Walk

    @property
    def specials(self) -> VertexSet:
        return frozenset(a.x for a in self.absorbers)


def _splice(absorbers: Sequence[Absorber], connectors: Sequence[Walk], absorbing: Iterable[int]) -> Walk:
    chosen = set(absorbing)
    vertices: list[int] = []
    for index, absorber in enumerate(absorbers):
        piece = absorbing_path(absorber) if absorber.x in chosen else non_absorbing_path(absorber)
        vertices.extend(piece.vertices)
        if index < len(connectors):
            vertices.extend(connectors[index].interior)
    return Walk(tuple(vertices), SignPattern.all_plus(len(vertices) - 1))


def build_backbone(
    g: Digraph,
    absorbers: Sequence[Absorber],
    v4: VertexSet,
    resolved: ResolvedScale,
    scale: ScaleConfig,
    seed: int,
    *,
    ledger: ReservationLedger | None = None,
    params: PseudoParams | None = None,
    notes: list[str] | None = None,
) -> AbsorbingStructure:
    """Join absorber i's x_t to absorber i+1's x_s through V4."""
    if not absorbers:
        raise InvalidParam("the backbone needs at least one absorber")
    ledger = ledger if ledger is not None else ReservationLedger(g.n)
    pairs = tuple((absorbers[i].end, absorbers[i + 1].start) for i in range(len(absorbers) - 1))
    connectors: list[Walk] = []
    if pairs:
        connectors = connect_all(
            g,
            ConnectRequest(pairs, frozenset(v4), SignPattern.all_plus(resolved.backbone_length)),
            scale,
            derive_seed(seed, "backbone"),
            ledger=ledger,
            tag="backbone",
            params=params,
            notes=notes,
        )
    path = _splice(absorbers, connectors, ())
    if not conforms_to(g, path) or path.is_closed:
        raise InternalError("backbone is not a simple directed path")
    return AbsorbingStructure(tuple(absorbers), tuple(connectors), path)


def absorb(structure: AbsorbingStructure, w: Iterable[int]) -> Walk:
    """P* with every absorber whose special vertex lies in W switched to its absorbing path."""
    targets = frozenset(w)
    stray = targets - structure.specials
    if stray:
        raise NotAbsorbable(f"{len(stray)} vertices are not absorber specials", vertices=sorted(stray)[:16])
    return _splice(structure.absorbers, structure.connectors, targets)
