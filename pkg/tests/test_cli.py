"""CLI harness: subcommands, exit codes, JSON round-trips, determinism."""

import json

from affcluster.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_mutate_roundtrip(tmp_path, capsys):
    code, out = run(capsys, "mutate", "--matrix", "a1t22", "--word", "1", "--format", "json")
    assert code == 0
    blob = json.loads(out)
    assert blob["matrix"]["rows"][0] == [0, -2]
    # feed the emitted matrix back in
    path = tmp_path / "m.json"
    path.write_text(json.dumps(blob["matrix"]))
    code, out2 = run(capsys, "mutate", "--matrix", str(path), "--word", "1", "--format", "json")
    assert code == 0
    assert json.loads(out2)["matrix"]["rows"][0] == [0, 2]


def test_mutate_involution_word(capsys):
    code, out = run(capsys, "mutate", "--matrix", "a2t", "--word", "1,2,2,1", "--format", "json")
    assert code == 0
    rows = json.loads(out)["matrix"]["rows"]
    assert rows[:3] == [[0, 1, 1], [-1, 0, 1], [-1, -1, 0]]


def test_gvec(capsys):
    code, out = run(capsys, "gvec", "--matrix", "a1t22", "--word", "1", "--format", "json")
    assert code == 0
    assert json.loads(out)["gvectors"] == [[-1, 2], [0, 1]]


def test_malformed_matrix_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _ = run(capsys, "mutate", "--matrix", str(bad), "--word", "1")
    assert code == 2
    code, _ = run(capsys, "mutate", "--matrix", "nosuchfixture", "--word", "1")
    assert code == 2


def test_report_a1t_deterministic(capsys):
    code, out1 = run(capsys, "report", "--matrix", "a1t22", "--format", "json")
    assert code == 0
    blob = json.loads(out1)
    assert blob["delta"] == [1, 1]
    assert blob["tubes"] == []  # Simples empty in rank 2
    code, out2 = run(capsys, "report", "--matrix", "a1t22", "--format", "json")
    assert out1 == out2


def test_report_a2t_lists_tubes(capsys):
    code, out = run(capsys, "report", "--matrix", "a2t", "--format", "json")
    assert code == 0
    blob = json.loads(out)
    assert len(blob["tubes"]) == 1
    assert blob["tubes"][0]["size"] == 2
    assert blob["tubes"][0]["max_compatible_sets"] == 2


def test_verify_cheby(capsys):
    code, out = run(capsys, "verify", "--identity", "cheby", "--matrix", "a1t22")
    assert code == 0
    assert "cheby: ok" in out


def test_verify_imexch(capsys):
    code, out = run(capsys, "verify", "--identity", "imexch", "--matrix", "a2t")
    assert code == 0


def test_verify_all_on_c2t(capsys):
    code, out = run(capsys, "verify", "--matrix", "c2t")
    assert code == 0
    assert "FAIL" not in out


def test_theta_subcommand(capsys):
    code, out = run(capsys, "theta", "--matrix", "a1t22", "--target", "delta", "--format", "json")
    assert code == 0
    blob = json.loads(out)
    assert blob["label"] == [-1, 1]
    assert len(blob["json"]["terms"]) == 3


def test_scatter2_and_theta2(tmp_path, capsys):
    dump = tmp_path / "walls.json"
    code, out = run(
        capsys, "scatter2", "--matrix", "a1t22", "--order", "4",
        "--dump", str(dump), "--format", "json",
    )
    assert code == 0
    walls = json.loads(dump.read_text())["walls"]
    assert any(w["normal"] == [1, 1] for w in walls)
    code, out = run(capsys, "theta2", "--matrix", "a1t22", "--lambda=-1,1", "--order", "4", "--format", "json")
    assert code == 0
    assert json.loads(out)["theta"].count("+") == 2


def test_expand_subcommand(capsys):
    code, out = run(capsys, "expand", "--matrix", "a3t", "--root", "1,1,2,1", "--format", "json")
    assert code == 0
    blob = json.loads(out)
    assert blob["m_delta"] == 1
    assert blob["arcs"] == [{"tube": 0, "start": 0, "length": 1, "mult": 1}]


def test_gca_graph_and_verify(tmp_path, capsys):
    out_path = tmp_path / "graph.json"
    code, out = run(
        capsys, "gca-graph", "--matrix", "a3t", "--tube", "0",
        "--json", str(out_path), "--format", "json",
    )
    assert code == 0
    blob = json.loads(out_path.read_text())
    assert blob["vertices"] == 6
    code, out = run(capsys, "gca-verify", "--matrix", "a2t", "--format", "json")
    assert code == 0


def test_tube_info(capsys):
    code, out = run(capsys, "tube-info", "--matrix", "a4t", "--format", "json")
    assert code == 0
    blob = json.loads(out)
    assert blob["tubes"][0]["size"] == 4
    assert len(blob["tubes"][0]["arcs"]) == 12


def test_non_affine_matrix_exits_2(tmp_path, capsys):
    path = tmp_path / "finite.json"
    path.write_text('{"n": 2, "m": 2, "rows": [[0,1],[-1,0],[1,0],[0,1]]}')
    code, _ = run(capsys, "report", "--matrix", str(path))
    assert code == 2


def test_expand_outside_wall_exits_2(capsys):
    code, _ = run(capsys, "expand", "--matrix", "a3t", "--root", "1,0,0,0")
    assert code == 2


def test_verify_kmax_option(capsys):
    code, out = run(capsys, "verify", "--identity", "cheby", "--matrix", "a2t", "--kmax", "2")
    assert code == 0 and "cheby: ok" in out
