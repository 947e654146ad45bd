from __future__ import annotations

import dataclasses

import pytest

from resilient_ham.absorber import (
    Absorber,
    AbsorberDump,
    AbsorberTemplate,
    absorb,
    absorber_sigma,
    absorbing_path,
    build_absorbers,
    build_backbone,
    non_absorbing_path,
    validate_absorber,
)
from resilient_ham.config import ScaleConfig
from resilient_ham.connector import ReservationLedger
from resilient_ham.digraph import Digraph, SignPattern, Walk, conforms_to
from resilient_ham.errors import InvalidParam, NotAbsorbable
from resilient_ham.scale import ResolvedScale

SCALE = ScaleConfig(strategy="greedy", reservoir_factor=1.0)
V1 = frozenset({0, 1})
V2 = frozenset(range(2, 16))
V3 = frozenset(range(16, 24))
V4 = frozenset(range(24, 28))


def resolved(k: int = 1, chord_length: int = 2) -> ResolvedScale:
    return ResolvedScale(
        n=30,
        alpha=0.1,
        k=k,
        chord_length=chord_length,
        backbone_length=2,
        final_length=2,
        part_sizes=(2, 14, 8, 4, 2),
        segment_size=3,
        overrides={},
    )


@pytest.mark.parametrize("k", range(1, 9))
def test_template_is_a_single_cycle(k):
    template = AbsorberTemplate(k)
    assert len(template.labels) == 4 * k + 3
    assert len(template.arcs) == 4 * k + 3
    assert len(template.cycle_order()) == 4 * k + 3
    assert set(template.cycle_order()) == set(template.labels)


@pytest.mark.parametrize("k", range(1, 9))
def test_template_pattern_alternates(k):
    assert absorber_sigma(k) == SignPattern.alternating(4 * k + 3)


def test_template_rejects_zero_k():
    with pytest.raises(InvalidParam):
        AbsorberTemplate(0)


def hand_built_absorber() -> tuple[Digraph, Absorber]:
    """k = 1, chords of length 2, every vertex placed by hand."""
    template = AbsorberTemplate(1)
    assignment = {"x_s": 0, "x": 1, "s1": 2, "s2": 3, "t1": 4, "t2": 5, "x_t": 6}
    chords = (Walk((2, 7, 4), SignPattern.all_plus(2)), Walk((3, 8, 5), SignPattern.all_plus(2)))
    arcs = [(assignment[u], assignment[v]) for u, v in template.arcs]
    arcs += [(2, 7), (7, 4), (3, 8), (8, 5)]
    return Digraph(9, arcs), Absorber(template, assignment, chords)


def test_hand_built_absorber_paths():
    g, absorber = hand_built_absorber()
    assert validate_absorber(g, absorber)
    with_x = absorbing_path(absorber)
    without_x = non_absorbing_path(absorber)
    assert with_x.vertices == (0, 1, 2, 7, 4, 3, 8, 5, 6)
    assert without_x.vertices == (0, 3, 8, 5, 2, 7, 4, 6)
    assert conforms_to(g, with_x) and conforms_to(g, without_x)
    assert len(absorber.vertices()) == 3 + 2 * 1 * (2 + 1)


def test_validate_absorber_catches_missing_arc():
    g, absorber = hand_built_absorber()
    assert not validate_absorber(g.without([(4, 3)]), absorber)


def test_validate_absorber_catches_shared_chord_vertex():
    g, absorber = hand_built_absorber()
    bad = dataclasses.replace(
        absorber,
        chords=(absorber.chords[0], Walk((3, 7, 5), SignPattern.all_plus(2))),
    )
    assert not validate_absorber(g, bad)


def test_dump_lists_cycle_and_chords():
    _, absorber = hand_built_absorber()
    dump = AbsorberDump.from_absorber(absorber)
    assert dump.k == 1 and dump.ell == 2
    assert dump.chords == [[2, 7, 4], [3, 8, 5]]
    assert len(dump.cycle_arcs) == 7


def test_build_absorbers_on_complete_digraph():
    g = Digraph.complete(30)
    ledger = ReservationLedger(30)
    absorbers = build_absorbers(g, V1, V2, V3, resolved(), SCALE, seed=3, ledger=ledger)
    assert sorted(a.x for a in absorbers) == [0, 1]
    for absorber in absorbers:
        assert validate_absorber(g, absorber)
    assert ledger.tagged("cycles") <= V2
    assert ledger.tagged("chords") <= V3
    first, second = absorbers
    assert not first.vertices() & second.vertices()


def test_build_absorbers_requires_disjoint_parts():
    with pytest.raises(InvalidParam):
        build_absorbers(Digraph.complete(30), V1, V2 | {0}, V3, resolved(), SCALE, seed=0)


def test_backbone_and_absorption():
    g = Digraph.complete(30)
    ledger = ReservationLedger(30)
    absorbers = build_absorbers(g, V1, V2, V3, resolved(), SCALE, seed=3, ledger=ledger)
    structure = build_backbone(g, absorbers, V4, resolved(), SCALE, seed=4, ledger=ledger)
    path = structure.path
    assert conforms_to(g, path)
    assert not set(path.vertices) & V1
    assert structure.specials == V1
    assert len(path.vertices) == 2 * 8 + 1

    absorbed = absorb(structure, {0})
    assert conforms_to(g, absorbed)
    assert (absorbed.start, absorbed.end) == (path.start, path.end)
    assert set(absorbed.vertices) == set(path.vertices) | {0}

    everything = absorb(structure, V1)
    assert set(everything.vertices) == set(path.vertices) | V1
    assert absorb(structure, ()).vertices == path.vertices


def test_absorb_rejects_non_specials():
    g = Digraph.complete(30)
    absorbers = build_absorbers(g, V1, V2, V3, resolved(), SCALE, seed=3)
    structure = build_backbone(g, absorbers, V4, resolved(), SCALE, seed=4)
    with pytest.raises(NotAbsorbable):
        absorb(structure, {25})


def test_backbone_needs_absorbers():
    with pytest.raises(InvalidParam):
        build_backbone(Digraph.complete(30), [], V4, resolved(), SCALE, seed=0)
