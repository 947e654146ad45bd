from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from resilient_ham.cover import merge_path_cover, merge_round
from resilient_ham.digraph import Digraph
from resilient_ham.engine import audit_path_cover
from resilient_ham.matcher import link_matching
from resilient_ham.random_models import gen_dnp


def directed_cycle(n: int) -> Digraph:
    return Digraph(n, [(i, (i + 1) % n) for i in range(n)])


def test_link_matching_skips_self_links():
    g = Digraph(2, [(0, 1), (1, 0)])
    assert link_matching(g, [1], [0]) == {}
    assert link_matching(g, [0, 1], [0, 1]) == {0: 1, 1: 0}


def test_singletons_of_complete_digraph_merge_into_one_path():
    g = Digraph.complete(12)
    paths = merge_path_cover(g, [(v,) for v in range(12)], rounds=4)
    assert len(paths) == 1
    assert audit_path_cover(g, frozenset(range(12)), paths)


def test_ring_of_paths_is_opened():
    g = directed_cycle(6)
    paths = merge_round(g, [(0, 1), (2, 3), (4, 5)])
    assert len(paths) == 1
    assert audit_path_cover(g, frozenset(range(6)), paths)


def test_ring_is_attached_to_a_chain():
    # 0 -> 1 is a chain; 2 <-> 3 close into a ring entered from 1
    g = Digraph(4, [(0, 1), (2, 3), (3, 2), (1, 3)])
    paths = merge_round(g, [(0, 1), (2,), (3,)])
    assert paths == [(0, 1, 3, 2)]


def test_chain_is_spliced_between_consecutive_vertices():
    g = Digraph(5, [(0, 1), (1, 2), (2, 3), (1, 4), (4, 2)])
    assert merge_round(g, [(0, 1, 2, 3), (4,)]) == [(0, 1, 4, 2, 3)]


def test_unlinkable_paths_are_kept():
    g = Digraph(4, [(0, 1), (2, 3)])
    assert merge_path_cover(g, [(0, 1), (2, 3)], rounds=3) == [(0, 1), (2, 3)]


def test_zero_rounds_is_identity():
    g = Digraph.complete(4)
    paths = [(0,), (1,), (2,), (3,)]
    assert merge_path_cover(g, paths, rounds=0) == paths


def test_dense_random_singletons_merge_into_one_path():
    g = gen_dnp(150, 0.3, 5)
    paths = merge_path_cover(g, [(v,) for v in range(150)], rounds=4)
    assert len(paths) == 1
    assert audit_path_cover(g, frozenset(range(150)), paths)


@st.composite
def covered_digraphs(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    arcs = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    g = Digraph(n, arcs)
    order = draw(st.permutations(range(n)))
    paths: list[tuple[int, ...]] = []
    for v in order:
        if paths and g.has_arc(paths[-1][-1], v) and draw(st.booleans()):
            paths[-1] = paths[-1] + (v,)
        else:
            paths.append((v,))
    return g, paths


@settings(max_examples=300, deadline=None)
@given(covered_digraphs(), st.integers(min_value=0, max_value=4))
def test_merging_keeps_a_path_cover(case, rounds):
    g, paths = case
    assert audit_path_cover(g, frozenset(range(g.n)), paths)
    merged = merge_path_cover(g, paths, rounds=rounds)
    assert audit_path_cover(g, frozenset(range(g.n)), merged)
    assert len(merged) <= len(paths)


@settings(max_examples=300, deadline=None)
@given(covered_digraphs())
def test_link_matching_links_are_arcs(case):
    g, paths = case
    tails = [path[-1] for path in paths]
    heads = [path[0] for path in paths]
    links = link_matching(g, tails, heads)
    assert len(set(links.values())) == len(links)
    for i, j in links.items():
        assert i != j
        assert g.has_arc(tails[i], heads[j])
