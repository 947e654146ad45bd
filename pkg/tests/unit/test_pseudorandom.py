from __future__ import annotations

import pytest

from resilient_ham.digraph import Digraph, edge_count_between, edge_count_within
from resilient_ham.errors import InvalidParam, NotAPartition, TooLargeForExact
from resilient_ham.pseudorandom import (
    PseudoParams,
    check_p1,
    check_p2,
    check_p3,
    check_partition_quality,
    good_degree_vertices,
    q2_windows,
)
from resilient_ham.random_models import gen_dnp


def directed_cycle(n: int) -> Digraph:
    return Digraph(n, [(i, (i + 1) % n) for i in range(n)])


def test_params_validate_ranges():
    with pytest.raises(InvalidParam):
        PseudoParams(10, 0.3, 0.5)
    with pytest.raises(InvalidParam):
        PseudoParams(10, 0.1, 0.0)


def test_thresholds_on_twelve_vertices():
    params = PseudoParams(12, 0.1, 1.0)
    assert params.t2 == 7
    assert params.t3 == 3
    assert PseudoParams(12, 0.1, 0.5).t3 == 6


def test_p1_pass_and_fail():
    params = PseudoParams(12, 0.1, 1.0)
    assert check_p1(Digraph.complete(12), params).status == "certified-pass"
    verdict = check_p1(directed_cycle(12), params)
    assert verdict.status == "certified-fail"
    assert verdict.witness == [[0]]


def test_p1_rejects_mismatched_params():
    with pytest.raises(InvalidParam):
        check_p1(Digraph.complete(5), PseudoParams(6, 0.1, 1.0))


def test_p2_exact_passes_on_complete_digraph():
    # ln^2.1 12 is about 6.76, so every set of at most 7 vertices is sparse enough.
    verdict = check_p2(Digraph.complete(12), PseudoParams(12, 0.1, 1.0), "exact")
    assert verdict.status == "certified-pass"
    assert verdict.passed()
    # every set of 1..7 vertices
    assert verdict.trials == 3301


def test_p2_exact_finds_a_dense_set_when_p_is_understated():
    verdict = check_p2(Digraph.complete(12), PseudoParams(12, 0.1, 0.5), "exact")
    assert verdict.status == "certified-fail"
    assert verdict.witness == [list(range(8))]
    assert verdict.trials == 3301 + 1


def test_p2_exact_refuses_large_inputs():
    with pytest.raises(TooLargeForExact):
        check_p2(Digraph.complete(20), PseudoParams(20, 0.1, 1.0), "exact", exact_limit=14)


def test_p2_sampled_passes_when_no_violation_exists():
    verdict = check_p2(Digraph.complete(12), PseudoParams(12, 0.1, 1.0), "sampled", trials=40, seed=3, workers=2)
    assert verdict.status == "sampled-pass"
    assert verdict.trials == 40


def test_p3_exact_pass_on_complete_digraph():
    verdict = check_p3(Digraph.complete(12), PseudoParams(12, 0.1, 1.0), "exact")
    assert verdict.status == "certified-pass"
    # X ranges over sizes 3..9
    assert verdict.trials == 3938


def test_p3_exact_fail_when_density_exceeds_p():
    verdict = check_p3(Digraph.complete(12), PseudoParams(12, 0.1, 0.5), "exact")
    assert verdict.status == "certified-fail"
    x, y = verdict.witness
    assert len(x) == 6 and len(y) == 6
    assert not set(x) & set(y)
    assert verdict.trials == 1


def test_p3_vacuous_when_sets_cannot_fit():
    verdict = check_p3(Digraph.complete(8), PseudoParams(8, 0.1, 0.2), "exact")
    assert verdict.status == "certified-pass"
    assert verdict.trials == 0


def test_p3_sampled_passes_on_complete_digraph():
    verdict = check_p3(Digraph.complete(12), PseudoParams(12, 0.1, 1.0), "sampled", trials=30, seed=1, workers=1)
    assert verdict.status == "sampled-pass"


def test_partition_quality_with_targets():
    g = Digraph.complete(20)
    parts = [frozenset(range(i, i + 4)) for i in range(0, 20, 4)]
    params = PseudoParams(20, 0.1, 1.0)
    assert check_partition_quality(g, parts, params, targets=[4, 4, 4, 4]).passed()
    assert not check_partition_quality(g, parts, params, targets=[8, 4, 4, 4], tolerance=0.1).passed()


def test_partition_quality_flags_tiny_parts():
    g = Digraph.complete(10)
    parts = [frozenset({0, 1}), frozenset({2, 3}), frozenset({4, 5}), frozenset({6, 7}), frozenset({8, 9})]
    verdict = check_partition_quality(g, parts, PseudoParams(10, 0.1, 1.0), targets=[2, 2, 2, 2])
    assert verdict.status == "certified-fail"


def test_partition_quality_requires_a_partition():
    g = Digraph.complete(6)
    params = PseudoParams(6, 0.1, 1.0)
    with pytest.raises(NotAPartition):
        check_partition_quality(g, [frozenset({0, 1}), frozenset({1, 2})], params)
    with pytest.raises(NotAPartition):
        check_partition_quality(g, [frozenset({0, 1})], params)


def test_q2_windows_are_ordered():
    v1, (low, high) = q2_windows(10_000, 0.1)
    assert 0 < v1 < 10_000
    assert 0 < low < high


def test_good_degree_vertices():
    g = Digraph.complete(5)
    universe = frozenset({0, 1, 2})
    assert good_degree_vertices(g, universe, 0.6, 1.0) == frozenset(range(5))
    assert good_degree_vertices(g, universe, 0.8, 1.0) == frozenset({3, 4})


def recounts_as_violation(g: Digraph, params: PseudoParams, verdict) -> bool:
    if verdict.property == "P2":
        (members,) = verdict.witness
        return len(members) <= params.t2 and edge_count_within(g, members) > params.p2_bound(len(members))
    xs, ys = verdict.witness
    if set(xs) & set(ys) or min(len(xs), len(ys)) < params.t3:
        return False
    density = max(edge_count_between(g, xs, ys), edge_count_between(g, ys, xs))
    return density > params.p3_bound(len(xs), len(ys))


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("p", [0.3, 0.8])
def test_sampled_never_contradicts_exact(seed, p):
    g = gen_dnp(10, p, seed)
    params = PseudoParams(10, 0.1, p)
    for check in (check_p2, check_p3):
        exact = check(g, params, "exact")
        sampled = check(g, params, "sampled", trials=300, seed=seed, workers=1)
        if not sampled.passed():
            assert not exact.passed()
            assert recounts_as_violation(g, params, sampled)
        if not exact.passed():
            assert recounts_as_violation(g, params, exact)


def test_deleting_arcs_keeps_a_pass():
    g = Digraph.complete(12)
    params = PseudoParams(12, 0.1, 1.0)
    thinned = g.without([(0, v) for v in range(1, 12)])
    assert check_p2(thinned, params, "exact").passed()
    assert check_p3(thinned, params, "exact").passed()
