from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilient_ham.config import OracleLimit
from resilient_ham.digraph import Digraph, SignPattern, conforms_to, sigma_neighborhood, verify_hamilton_cycle
from resilient_ham.errors import GraphTooLarge
from resilient_ham.oracle import enumerate_sigma_walks, held_karp_hamiltonian, permutation_hamiltonian


def directed_cycle(n: int) -> Digraph:
    return Digraph(n, [(i, (i + 1) % n) for i in range(n)])


def test_held_karp_finds_the_only_cycle():
    g = directed_cycle(7)
    found, cycle = held_karp_hamiltonian(g)
    assert found
    assert cycle == [0, 1, 2, 3, 4, 5, 6]


def test_held_karp_on_path_is_negative():
    g = Digraph(5, [(i, i + 1) for i in range(4)])
    assert held_karp_hamiltonian(g) == (False, None)


def test_held_karp_trivial_sizes():
    assert held_karp_hamiltonian(Digraph(1)) == (False, None)
    assert held_karp_hamiltonian(Digraph(2, [(0, 1), (1, 0)]))[0]


def test_held_karp_respects_limit():
    with pytest.raises(GraphTooLarge):
        held_karp_hamiltonian(Digraph.complete(8), OracleLimit(max_n_heldkarp=7, max_n_permutation=5))


@st.composite
def small_digraphs(draw):
    n = draw(st.integers(min_value=2, max_value=6))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    arcs = draw(st.lists(st.sampled_from(pairs), unique=True))
    return Digraph(n, arcs)


@settings(max_examples=200, deadline=None)
@given(small_digraphs())
def test_held_karp_agrees_with_permutations(g):
    found, cycle = held_karp_hamiltonian(g)
    assert found == permutation_hamiltonian(g)
    if found:
        assert verify_hamilton_cycle(g, cycle)


def test_sigma_walks_on_complete_digraph():
    g = Digraph.complete(4)
    walks = enumerate_sigma_walks(g, 0, 1, SignPattern.all_plus(2))
    assert [walk.vertices for walk in walks] == [(0, 2, 1), (0, 3, 1)]
    assert all(conforms_to(g, walk) for walk in walks)


def test_sigma_walks_may_close_at_the_start():
    g = Digraph.complete(3)
    walks = enumerate_sigma_walks(g, 0, 0, SignPattern.parse("+-"))
    assert [walk.vertices for walk in walks] == [(0, 1, 0), (0, 2, 0)]


def test_sigma_walks_follow_signs():
    g = Digraph(3, [(0, 1), (2, 1)])
    assert [walk.vertices for walk in enumerate_sigma_walks(g, 0, 2, SignPattern.parse("+-"))] == [(0, 1, 2)]
    assert enumerate_sigma_walks(g, 0, 2, SignPattern.parse("++")) == []


def with_two_cycles(draw_arcs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    return sorted(set(draw_arcs) | {(v, u) for u, v in draw_arcs[::2]})


@settings(max_examples=300, deadline=None)
@given(small_digraphs(), st.text(alphabet="+-", min_size=1, max_size=4), st.data())
def test_sigma_neighborhood_agrees_with_walk_enumeration(g, pattern, data):
    g = Digraph(g.n, with_two_cycles(list(g.arcs())))
    sigma = SignPattern.parse(pattern)
    a = data.draw(st.integers(min_value=0, max_value=g.n - 1))
    interior = data.draw(st.sets(st.integers(min_value=0, max_value=g.n - 1)))
    reached = sigma_neighborhood(g, {a}, interior, sigma)
    for b in range(g.n):
        walks = enumerate_sigma_walks(g, a, b, sigma) if b != a else []
        expected = b in interior and any(set(walk.vertices[1:]) <= interior for walk in walks)
        assert (b in reached) == expected
