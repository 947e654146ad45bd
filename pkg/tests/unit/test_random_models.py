from __future__ import annotations

import pytest
from pydantic import ValidationError

from resilient_ham.digraph import Digraph, edge_count_between
from resilient_ham.errors import ArcNotPresent, InvalidParam
from resilient_ham.oracle import held_karp_hamiltonian
from resilient_ham.pseudorandom import PseudoParams, check_p1
from resilient_ham.random_models import (
    AdversarySpec,
    apply_adversary,
    budget_for_beta,
    default_cut_set,
    gen_dnp,
    verify_budget,
)
from resilient_ham.rng import derive_seed


def test_gen_dnp_is_seeded():
    assert gen_dnp(40, 0.3, 7) == gen_dnp(40, 0.3, 7)
    assert gen_dnp(40, 0.3, 7) != gen_dnp(40, 0.3, 8)


def test_gen_dnp_extremes():
    assert gen_dnp(10, 0.0, 1).m == 0
    assert gen_dnp(10, 1.0, 1) == Digraph.complete(10)


def test_gen_dnp_density_is_plausible():
    g = gen_dnp(200, 0.25, 3)
    expected = 0.25 * 200 * 199
    assert abs(g.m - expected) < 0.05 * expected


def test_gen_dnp_rejects_bad_params():
    with pytest.raises(InvalidParam):
        gen_dnp(0, 0.5, 1)
    with pytest.raises(InvalidParam):
        gen_dnp(5, 1.5, 1)


def test_random_budgeted_respects_budget():
    g = gen_dnp(60, 0.5, 11)
    spec = AdversarySpec(kind="random-budgeted", r=0.3, seed=5)
    attacked, report = apply_adversary(g, spec)
    assert report.deleted
    assert verify_budget(g, report.deleted, 0.3)
    assert attacked.m == g.m - len(report.deleted)
    assert report.per_vertex_out_frac <= 0.3 + 1e-12
    assert report.per_vertex_in_frac <= 0.3 + 1e-12


def test_random_budgeted_is_reproducible():
    g = gen_dnp(30, 0.5, 2)
    spec = AdversarySpec(kind="random-budgeted", r=0.25, seed=9)
    assert apply_adversary(g, spec)[1].deleted == apply_adversary(g, spec)[1].deleted


def test_zero_budget_deletes_nothing():
    g = gen_dnp(20, 0.5, 2)
    attacked, report = apply_adversary(g, AdversarySpec(kind="random-budgeted", r=0.0))
    assert attacked == g
    assert report.deleted == []


def test_budget_floor_is_exact():
    # d = 100 and r = 0.29 must allow exactly 29 deletions.
    g = Digraph.complete(101)
    star = [(0, v) for v in range(1, 30)]
    assert verify_budget(g, star, 0.29)
    assert not verify_budget(g, [*star, (0, 30)], 0.29)


def test_oneway_cut_removes_all_arcs_into_the_set():
    g = Digraph.complete(6)
    cut = default_cut_set(6)
    attacked, report = apply_adversary(g, AdversarySpec(kind="oneway-cut", cut_set=cut))
    assert cut == [0, 1, 2]
    assert len(report.deleted) == 9
    assert all(not attacked.has_arc(u, v) for u in (3, 4, 5) for v in cut)
    assert attacked.has_arc(0, 4)


def test_custom_deletion_and_missing_arc():
    g = Digraph(3, [(0, 1), (1, 2)])
    attacked, _ = apply_adversary(g, AdversarySpec(kind="custom-arc-list", arcs=[(0, 1)]))
    assert attacked.arcs() == [(1, 2)]
    with pytest.raises(ArcNotPresent):
        apply_adversary(g, AdversarySpec(kind="custom-arc-list", arcs=[(2, 0)]))


def test_spec_requires_cut_set_for_cut_kind():
    with pytest.raises(ValidationError):
        AdversarySpec(kind="oneway-cut")
    with pytest.raises(ValidationError):
        AdversarySpec(kind="custom-arc-list")


def test_verify_budget_rejects_absent_arcs():
    with pytest.raises(ArcNotPresent):
        verify_budget(Digraph(3), [(0, 1)], 0.5)


def test_budget_for_beta():
    assert budget_for_beta(0.1) == pytest.approx(0.4)
    with pytest.raises(InvalidParam):
        budget_for_beta(0.5)


def test_derive_seed_depends_on_every_key():
    base = derive_seed(1, "graph", 3)
    assert base == derive_seed(1, "graph", 3)
    assert base != derive_seed(1, "graph", 4)
    assert base != derive_seed(2, "graph", 3)
    assert base != derive_seed(1, "run", 3)
    assert 0 <= base < 2**64


@pytest.mark.parametrize("n", range(6, 13))
@pytest.mark.parametrize("source", ["complete", "random"])
def test_oneway_cut_destroys_hamiltonicity(n, source):
    g = Digraph.complete(n) if source == "complete" else gen_dnp(n, 0.5, derive_seed(7, n))
    cut = default_cut_set(n)
    rest = [v for v in range(n) if v not in cut]
    attacked, _ = apply_adversary(g, AdversarySpec(kind="oneway-cut", cut_set=cut))
    assert edge_count_between(attacked, rest, cut) == 0
    if source == "complete":
        assert not check_p1(attacked, PseudoParams(n, 0.1, 1.0)).passed()
    assert held_karp_hamiltonian(attacked) == (False, None)
