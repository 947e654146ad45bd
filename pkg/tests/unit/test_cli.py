from __future__ import annotations

import json

import pytest

from resilient_ham.config import ScaleConfig, reset_settings
from resilient_ham.digraph import Digraph
from resilient_ham.edgelist import read_edge_list, write_edge_list
from resilient_ham.errors import InvalidParam
from resilient_ham.main import main, merge_scale, split_scale_flags

DESK_FLAGS = [
    "--scale.strategy=greedy",
    "--scale.absorber_k=1",
    "--scale.chord_length=2",
    "--scale.backbone_length=2",
    "--scale.final_length=2",
    "--scale.v1_size=6",
    "--scale.segment_size=3",
    "--scale.reservoir_factor=1.0",
]


@pytest.fixture(autouse=True)
def clear_env(monkeypatch):
    for key in ("RESILIENT_HAM_TELEMETRY__ENABLED", "RESILIENT_HAM_THREADS", "RESILIENT_HAM_LOG_LEVEL"):
        monkeypatch.delenv(key, raising=False)
    reset_settings()
    yield
    reset_settings()


def error_of(capsys) -> dict:
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"]


def test_split_scale_flags_both_forms():
    overrides, rest = split_scale_flags(["--scale.absorber-k=2", "--scale.gamma", "0.2", "--other"])
    assert overrides == {"absorber_k": "2", "gamma": "0.2"}
    assert rest == ["--other"]


def test_merge_scale_validates():
    merged = merge_scale(ScaleConfig(), {"absorber_k": "2"})
    assert merged.absorber_k == 2
    with pytest.raises(InvalidParam):
        merge_scale(ScaleConfig(), {"absorber_k": "0"})
    with pytest.raises(InvalidParam):
        merge_scale(ScaleConfig(), {"no_such_knob": "1"})


def test_gen_writes_edge_list(tmp_path):
    out = tmp_path / "g.txt"
    assert main(["gen", "--n", "12", "--p", "0.5", "--seed", "1", "--out", str(out)]) == 0
    assert read_edge_list(out).n == 12


def test_ham_and_verify_round_trip(tmp_path, capsys):
    graph = tmp_path / "k90.txt"
    cycle = tmp_path / "cycle.txt"
    write_edge_list(Digraph.complete(90), graph)
    code = main(["ham", "--in", str(graph), "--alpha", "0.1", "--seed", "1", "--cycle-out", str(cycle), *DESK_FLAGS])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["outcome"] == "cycle"
    assert report["overrides"]["strategy"] == "greedy"
    assert main(["verify", "--in", str(graph), "--cycle", str(cycle)]) == 0


def test_ham_with_default_scale(tmp_path, capsys):
    graph = tmp_path / "k90.txt"
    write_edge_list(Digraph.complete(90), graph)
    assert main(["ham", "--in", str(graph), "--alpha", "0.1", "--seed", "2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["outcome"] == "cycle"
    assert report["scale"]["k"] == 1
    assert any(note.startswith("scale:") for note in report["notes"])


def test_ham_reports_failure_with_exit_two(tmp_path, capsys):
    graph = tmp_path / "k90.txt"
    write_edge_list(Digraph.complete(90), graph)
    assert main(["ham", "--in", str(graph), "--alpha", "0.1", "--p", "0.05"]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["failure"]["stage"] == "scale"


def test_verify_rejects_wrong_cycle(tmp_path):
    graph = tmp_path / "c4.txt"
    cycle = tmp_path / "cycle.txt"
    write_edge_list(Digraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]), graph)
    cycle.write_text("0 2 1 3\n", encoding="utf-8")
    assert main(["verify", "--in", str(graph), "--cycle", str(cycle)]) == 2


def test_ham_on_arcless_digraph_fails_at_p1(tmp_path, capsys):
    graph = tmp_path / "empty.txt"
    write_edge_list(Digraph(8, []), graph)
    assert main(["ham", "--in", str(graph), "--alpha", "0.1"]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["outcome"] == "failure"
    assert report["failure"]["stage"] == "P1"


def test_oracle_command(tmp_path, capsys):
    graph = tmp_path / "c5.txt"
    write_edge_list(Digraph(5, [(i, (i + 1) % 5) for i in range(5)]), graph)
    assert main(["oracle", "--in", str(graph)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body == {"n": 5, "hamiltonian": True, "cycle": [0, 1, 2, 3, 4]}


def test_check_command_exact(tmp_path, capsys):
    graph = tmp_path / "k12.txt"
    write_edge_list(Digraph.complete(12), graph)
    assert main(["check", "--in", str(graph), "--alpha", "0.1", "--mode", "exact"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["p"] == 1.0
    assert [v["status"] for v in body["verdicts"]] == ["certified-pass"] * 3


def test_attack_with_beta(tmp_path, capsys):
    graph = tmp_path / "g.txt"
    out = tmp_path / "h.txt"
    write_edge_list(Digraph.complete(20), graph)
    assert main(["attack", "--in", str(graph), "--beta", "0.2", "--seed", "3", "--out", str(out)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["r"] == pytest.approx(0.3)
    assert read_edge_list(out).m == 380 - len(report["deleted"])


def test_malformed_edge_list_is_reported(tmp_path, capsys):
    graph = tmp_path / "bad.txt"
    graph.write_text("3 1\n0 0\n", encoding="utf-8")
    assert main(["oracle", "--in", str(graph)]) == 1
    error = error_of(capsys)
    assert error["code"] == "edge_list"
    assert error["context"]["line"] == 2


def test_missing_file_is_reported(tmp_path, capsys):
    assert main(["oracle", "--in", str(tmp_path / "absent.txt")]) == 1
    assert error_of(capsys)["code"] == "invalid_param"


def test_bad_scale_override_is_reported(tmp_path, capsys):
    graph = tmp_path / "k5.txt"
    write_edge_list(Digraph.complete(5), graph)
    assert main(["ham", "--in", str(graph), "--scale.absorber_k=0"]) == 1
    assert error_of(capsys)["code"] == "invalid_param"


def test_sweep_command_writes_results(tmp_path, capsys):
    out = tmp_path / "sweep"
    code = main(
        ["sweep", "--n", "90", "--p", "1.0", "--alpha", "0.1", "--trials", "1", "--workers", "1", "--out", str(out), *DESK_FLAGS]
    )
    assert code == 0
    assert (out / "success.csv").exists()
    summary = json.loads(capsys.readouterr().out)
    assert summary["cells"][0]["successes"] == 1


def test_sweep_accepts_custom_adversary(tmp_path, capsys):
    arcs = tmp_path / "arcs.txt"
    arcs.write_text("0 1\n2 3\n", encoding="utf-8")
    code = main(
        [
            "sweep",
            "--n",
            "90",
            "--p",
            "1.0",
            "--alpha",
            "0.1",
            "--adversary",
            "custom",
            "--arcs",
            str(arcs),
            "--workers",
            "1",
            *DESK_FLAGS,
        ]
    )
    assert code == 0
    cell = json.loads(capsys.readouterr().out)["cells"][0]
    assert cell["kind"] == "custom-arc-list"
