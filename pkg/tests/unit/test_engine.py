from __future__ import annotations

import pytest

from resilient_ham.config import ScaleConfig
from resilient_ham.digraph import Digraph, verify_hamilton_cycle
from resilient_ham.engine import (
    STAGES,
    _StageTracker,
    audit_path_cover,
    canonical_rotation,
    cycle_hash,
    find_hamilton_cycle,
    path_cover,
)
from resilient_ham.pseudorandom import PseudoParams
from resilient_ham.random_models import gen_dnp
from resilient_ham.telemetry import TelemetryRuntime

DESK_SCALE = ScaleConfig(
    strategy="greedy",
    absorber_k=1,
    chord_length=2,
    backbone_length=2,
    final_length=2,
    v1_size=6,
    segment_size=3,
    reservoir_factor=1.0,
)
PARAMS = PseudoParams(90, 0.1, 1.0)


def directed_cycle(n: int) -> Digraph:
    return Digraph(n, [(i, (i + 1) % n) for i in range(n)])


def test_cycle_helpers():
    assert canonical_rotation([3, 4, 0, 1, 2]) == [0, 1, 2, 3, 4]
    assert canonical_rotation([]) == []
    assert cycle_hash([0, 1, 2]) == cycle_hash((0, 1, 2))
    assert cycle_hash([0, 1, 2]) != cycle_hash([0, 2, 1])


def test_path_cover_on_complete_digraph():
    g = Digraph.complete(40)
    universe = frozenset(range(31))
    paths = path_cover(g, universe, PseudoParams(40, 0.1, 1.0), DESK_SCALE, seed=2, segment_size=3)
    assert audit_path_cover(g, universe, paths)
    assert sum(len(path) for path in paths) == 31
    assert sum(1 for path in paths if len(path) == 10) == 3


def test_path_cover_empty_universe():
    assert path_cover(Digraph.complete(5), frozenset(), PseudoParams(5, 0.1, 1.0), DESK_SCALE, seed=0) == []


def test_audit_path_cover_rejects_overlap():
    g = Digraph.complete(4)
    assert not audit_path_cover(g, frozenset(range(4)), [(0, 1), (1, 2, 3)])
    assert not audit_path_cover(g, frozenset(range(4)), [(0, 1)])


def test_desk_scale_run_returns_a_verified_cycle():
    g = Digraph.complete(90)
    report = find_hamilton_cycle(g, PARAMS, DESK_SCALE, seed=1)
    assert report.outcome == "cycle"
    assert verify_hamilton_cycle(g, report.cycle)
    assert report.cycle[0] == 0
    assert report.cycle_hash == cycle_hash(report.cycle)
    assert report.scale is not None and report.scale.part_sizes == (6, 45, 16, 9, 14)
    assert report.overrides["v1_size"] == 6
    assert report.notes
    assert set(report.timings) <= set(STAGES)


def test_runs_are_reproducible():
    g = Digraph.complete(90)
    first = find_hamilton_cycle(g, PARAMS, DESK_SCALE, seed=5)
    second = find_hamilton_cycle(g, PARAMS, DESK_SCALE, seed=5)
    assert first.deterministic_dump() == second.deterministic_dump()


def test_dense_random_digraph():
    g = gen_dnp(90, 0.95, 17)
    report = find_hamilton_cycle(g, PseudoParams(90, 0.1, 0.95), DESK_SCALE, seed=2)
    assert report.outcome == "cycle"
    assert verify_hamilton_cycle(g, report.cycle)


def test_random_digraph_with_default_scale():
    g = gen_dnp(240, 0.5, 3)
    params = PseudoParams.measured(g, 0.05)
    report = find_hamilton_cycle(g, params, ScaleConfig(), seed=7)
    assert report.outcome == "cycle", report.failure
    assert verify_hamilton_cycle(g, report.cycle)
    assert report.scale is not None and report.scale.k == 1
    assert any(note.startswith("scale:") for note in report.notes)


def test_strict_mode_fails_where_heuristic_mode_proceeds():
    g = gen_dnp(240, 0.5, 3)
    params = PseudoParams.measured(g, 0.05)
    report = find_hamilton_cycle(g, params, ScaleConfig(heuristic=False, pipeline_restarts=1), seed=7)
    assert report.outcome == "failure"
    assert report.failure.stage == "partition"


def test_failure_at_p1_names_the_stage():
    report = find_hamilton_cycle(directed_cycle(90), PARAMS, DESK_SCALE, seed=0)
    assert report.outcome == "failure"
    assert report.cycle is None
    assert report.failure.stage == "P1"
    assert report.failure.code == "hypothesis_violated"


def test_default_scale_does_not_fit_sparse_small_inputs():
    report = find_hamilton_cycle(Digraph.complete(90), PseudoParams(90, 0.1, 0.05), ScaleConfig(), seed=0)
    assert report.outcome == "failure"
    assert report.failure.stage == "scale"


class RecordingMetrics:
    def __init__(self) -> None:
        self.calls: list[tuple[str, str]] = []

    def record(self, *, stage: str, status: str, duration_ms: float) -> None:
        assert duration_ms >= 0
        self.calls.append((stage, status))


def test_stage_tracker_records_status():
    metrics = RecordingMetrics()
    tracker = _StageTracker(TelemetryRuntime(run_metrics=metrics))
    with tracker.stage("partition"):
        pass
    with pytest.raises(ValueError):
        with tracker.stage("absorbers"):
            raise ValueError("boom")
    assert metrics.calls == [("partition", "ok"), ("absorbers", "error")]
    assert set(tracker.timings) == {"partition", "absorbers"}


def test_stage_metrics_failures_are_swallowed():
    class Broken:
        def record(self, *, stage: str, status: str, duration_ms: float) -> None:
            raise RuntimeError("exporter down")

    tracker = _StageTracker(TelemetryRuntime(run_metrics=Broken()))
    with tracker.stage("verify"):
        pass
    assert "verify" in tracker.timings


TINY_SCALE = ScaleConfig(
    strategy="greedy",
    absorber_k=1,
    chord_length=2,
    backbone_length=2,
    final_length=2,
    v1_size=2,
    v2_size=12,
    v3_size=4,
    v4_size=1,
    segment_size=2,
)


def is_hamilton_cycle(g: Digraph, cycle: list[int]) -> bool:
    return sorted(cycle) == list(range(g.n)) and all(
        g.has_arc(u, v) for u, v in zip(cycle, cycle[1:] + cycle[:1])
    )


def test_tiny_complete_digraph_returns_a_cycle():
    g = Digraph.complete(20)
    report = find_hamilton_cycle(g, PseudoParams(20, 0.1, 1.0), TINY_SCALE, seed=0)
    assert report.outcome == "cycle"
    assert is_hamilton_cycle(g, report.cycle)
    assert report.retries == {"pipeline": 0}


def test_small_runs_never_claim_a_false_cycle():
    cycles = 0
    for seed in range(6):
        g = gen_dnp(20, 0.9, seed)
        report = find_hamilton_cycle(g, PseudoParams.measured(g, 0.1), TINY_SCALE, seed=seed)
        if report.outcome == "cycle":
            cycles += 1
            assert is_hamilton_cycle(g, report.cycle)
        else:
            assert report.cycle is None
            assert report.failure.stage in STAGES
    assert cycles >= 1
