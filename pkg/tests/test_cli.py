import json

import pytest

from tractable_dyn.cli import main

RELATION_B = {
    "elements": ["I1", "I2", "I3"],
    "edges": [["I1", "I1"], ["I2", "I2"], ["I2", "I3"], ["I3", "I3"]],
}

SYSTEM_A = {
    "K": {"vertices": ["0", "1", "2"]},
    "Kstar": {"vertices": ["0", "1/2", "1", "3/2", "2"]},
    "vmap": {"0": "1", "1/2": "0", "1": "1", "3/2": "2", "2": "1"},
}

SYSTEM_B = {
    "K": {"vertices": ["0", "1", "2", "3"]},
    "Kstar": {"vertices": ["0", "1/2", "1", "3/2", "2", "5/2", "3"]},
    "vmap": {"0": "1", "1/2": "0", "1": "1", "3/2": "2",
             "2": "3", "5/2": "2", "3": "3"},
}

SHIFT_CODE = {"N": 2, "m": 2, "phi": [0, 0, 1, 1]}


def write(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- relation-analyze ---


def test_relation_analyze_reports_terminal_classes(tmp_path, capsys):
    path = write(tmp_path / "b.json", RELATION_B)
    code, out, _ = run(capsys, "relation-analyze", "--input", path)
    assert code == 0
    data = json.loads(out)
    assert data["terminal"] == [["I1"], ["I3"]]
    assert data["basic_sets"] == [["I1"], ["I2"], ["I3"]]
    assert data["transient"] == ["I2"]
    assert data["kept"] == ["I1", "I2", "I3"]
    assert data["removed"] == []


def test_relation_analyze_acyclic_input_fails_cleanly(tmp_path, capsys):
    path = write(tmp_path / "acyclic.json",
                 {"elements": ["a", "b"], "edges": [["a", "b"]]})
    code, out, err = run(capsys, "relation-analyze", "--input", path)
    assert code == 2
    assert out == ""
    assert "empty domain" in err


def test_relation_analyze_is_deterministic(tmp_path, capsys):
    path = write(tmp_path / "b.json", RELATION_B)
    _, first, _ = run(capsys, "relation-analyze", "--input", path)
    _, second, _ = run(capsys, "relation-analyze", "--input", path)
    assert first == second


def test_relation_analyze_csv(tmp_path, capsys):
    path = write(tmp_path / "b.json", RELATION_B)
    code, out, _ = run(capsys, "relation-analyze", "--input", path,
                       "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "element,class,terminal,transient"
    assert len(lines) == 4


def test_relation_analyze_writes_out_file(tmp_path, capsys):
    path = write(tmp_path / "b.json", RELATION_B)
    out_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "relation-analyze", "--input", path,
                       "--out", str(out_path))
    assert code == 0
    assert out == ""
    assert json.loads(out_path.read_text())["terminal"] == [["I1"], ["I3"]]


def test_relation_analyze_malformed_file(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "relation-analyze", "--input", str(bad))
    assert code == 2
    assert err


def test_relation_analyze_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "relation-analyze", "--input",
                       str(tmp_path / "nope.json"))
    assert code == 2
    assert err


# --- subshift-report ---


def cover_files(tmp_path):
    write(tmp_path / "relation.json", RELATION_B)
    return write(tmp_path / "cover.json", {
        "relation": "relation.json",
        "matrix": [[1.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.5, 1.0]],
    })


def test_subshift_report_decay(tmp_path, capsys):
    path = cover_files(tmp_path)
    code, out, _ = run(capsys, "subshift-report", "--input", path)
    assert code == 0
    data = json.loads(out)
    assert data["decay"] == {"n": 1, "rho": 0.5}
    assert data["terminal"] == [["I1"], ["I3"]]
    assert data["genericity"] is None


def test_subshift_report_simulation(tmp_path, capsys):
    path = cover_files(tmp_path)
    code, out, _ = run(capsys, "subshift-report", "--input", path,
                       "--simulate", "200", "--seed", "4", "--words", "1")
    assert code == 0
    genericity = json.loads(out)["genericity"]
    assert genericity["T"] == 200
    assert genericity["L"] == 1
    assert genericity["pass"] is True


def test_subshift_report_bad_columns(tmp_path, capsys):
    write(tmp_path / "relation.json", RELATION_B)
    path = write(tmp_path / "cover.json", {
        "relation": "relation.json",
        "matrix": [[1.0, 0.0, 0.0], [0.0, 0.6, 0.0], [0.0, 0.5, 1.0]],
    })
    code, _, err = run(capsys, "subshift-report", "--input", path)
    assert code == 2
    assert "column" in err


def test_subshift_report_csv(tmp_path, capsys):
    path = cover_files(tmp_path)
    code, out, _ = run(capsys, "subshift-report", "--input", path,
                       "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "class,element,weight"


# --- blockmap-approx ---


def test_blockmap_derives_the_shift_table(tmp_path, capsys):
    path = write(tmp_path / "code.json", SHIFT_CODE)
    system_path = tmp_path / "system.json"
    code, out, _ = run(capsys, "blockmap-approx", "--input", path,
                       "--n", "1", "--out-system", str(system_path))
    assert code == 0
    system = json.loads(system_path.read_text())
    assert system == {"N": 2, "n": 1, "k": 1, "gamma": [0, 0, 1, 1]}
    report = json.loads(out)
    assert report["basic_sets"] == [["0", "1"]]
    assert report["stationary"] == [{
        "class": ["0", "1"],
        "fine_class": ["00", "10", "01", "11"],
        "weights": {"0": "1/2", "1": "1/2"},
    }]


def test_blockmap_identity_code_forces_k(tmp_path, capsys):
    path = write(tmp_path / "id.json", {"N": 2, "m": 1, "phi": [0, 1]})
    code, out, _ = run(capsys, "blockmap-approx", "--input", path, "--n", "1")
    assert code == 0
    assert json.loads(out)["k"] == 1


def test_blockmap_cap_exit_code(tmp_path, capsys):
    path = write(tmp_path / "code.json", SHIFT_CODE)
    code, _, err = run(capsys, "blockmap-approx", "--input", path, "--n", "40")
    assert code == 3
    assert err


def test_blockmap_env_cap(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("TRACTABLE_DYN_CELL_CAP", "64")
    path = write(tmp_path / "code.json", SHIFT_CODE)
    code, _, _ = run(capsys, "blockmap-approx", "--input", path, "--n", "6")
    assert code == 3
    monkeypatch.setenv("TRACTABLE_DYN_CELL_CAP", "1024")
    code, _, _ = run(capsys, "blockmap-approx", "--input", path, "--n", "6")
    assert code == 0


def test_blockmap_trace_needs_both_flags(tmp_path, capsys):
    path = write(tmp_path / "code.json", SHIFT_CODE)
    code, _, err = run(capsys, "blockmap-approx", "--input", path, "--n", "1",
                       "--prefix", "011010011")
    assert code == 2
    assert "trace" in err


def test_blockmap_trace_rows_all_match(tmp_path, capsys):
    path = write(tmp_path / "code.json", SHIFT_CODE)
    trace_path = tmp_path / "trace.csv"
    code, _, _ = run(capsys, "blockmap-approx", "--input", path, "--n", "1",
                     "--prefix", "011010011", "--trace", str(trace_path))
    assert code == 0
    lines = trace_path.read_text().strip().splitlines()
    assert lines[0] == "step,f_word,g_word,match"
    assert len(lines) == 8
    assert all(line.endswith(",1") for line in lines[1:])


# --- plmap-approx ---


def test_plmap_report_example_a(tmp_path, capsys):
    path = write(tmp_path / "a.json", SYSTEM_A)
    code, out, _ = run(capsys, "plmap-approx", "--input", path)
    assert code == 0
    data = json.loads(out)
    assert data["theta"] == "1/2"
    assert data["terminal"] == [["I1"], ["I2"]]
    assert data["stationary"] == [{"I1": "1"}, {"I2": "1"}]


def test_plmap_report_example_b_flags_the_leaky_class(tmp_path, capsys):
    path = write(tmp_path / "b.json", SYSTEM_B)
    code, out, _ = run(capsys, "plmap-approx", "--input", path)
    assert code == 0
    data = json.loads(out)
    flagged, = data["caveats"]["visible_but_not_terminal"]
    assert flagged["class"] == ["I2"]


def test_plmap_degenerate_needs_repair_flag(tmp_path, capsys):
    degenerate = dict(SYSTEM_A, vmap=dict(SYSTEM_A["vmap"], **{"1/2": "1"}))
    path = write(tmp_path / "bad.json", degenerate)
    code, _, err = run(capsys, "plmap-approx", "--input", path)
    assert code == 2
    assert err

    code, out, _ = run(capsys, "plmap-approx", "--input", path, "--repair")
    assert code == 0
    data = json.loads(out)
    assert data["repair"]["changed"] is True
    assert "4" in data["repair"]["note"]


SAMPLED = {
    "K": {"vertices": ["0", "1", "2"]},
    "samples": {"0": "1", "1/2": "0", "1": "1", "3/2": "2", "2": "1"},
    "lip": 2.0,
}


def test_plmap_sampled_function_roundoff(tmp_path, capsys):
    path = write(tmp_path / "sampled.json", SAMPLED)
    code, out, _ = run(capsys, "plmap-approx", "--input", path)
    assert code == 0
    data = json.loads(out)
    assert data["roundoff"]["error_bound"] in ("2", "6")
    assert data["roundoff"]["mesh"] == "1"
    assert data["roundoff"]["repaired"] in (True, False)


def test_plmap_rejects_undersized_lipschitz(tmp_path, capsys):
    path = write(tmp_path / "sampled.json", dict(SAMPLED, lip=0.5))
    code, _, err = run(capsys, "plmap-approx", "--input", path)
    assert code == 2
    assert "Lip" in err or "lip" in err


def test_plmap_svg_outputs(tmp_path, capsys):
    path = write(tmp_path / "a.json", SYSTEM_A)
    plot_path = tmp_path / "plot.svg"
    code, out, _ = run(capsys, "plmap-approx", "--input", path,
                       "--out-plot", str(plot_path))
    assert code == 0
    assert plot_path.read_text().startswith("<svg")

    code, out, _ = run(capsys, "plmap-approx", "--input", path,
                       "--format", "svg")
    assert code == 0
    assert out.startswith("<svg")


def test_plmap_simulation_attaches_birkhoff(tmp_path, capsys):
    path = write(tmp_path / "a.json", SYSTEM_A)
    code, out, _ = run(capsys, "plmap-approx", "--input", path,
                       "--simulate", "500", "--depth", "20", "--seed", "3")
    assert code == 0
    birkhoff = json.loads(out)["birkhoff"]
    assert len(birkhoff) == 2
    for entry in birkhoff:
        assert entry["pass"] is True


def test_plmap_out_system_round_trip(tmp_path, capsys):
    degenerate = dict(SYSTEM_A, vmap=dict(SYSTEM_A["vmap"], **{"1/2": "1"}))
    path = write(tmp_path / "bad.json", degenerate)
    out_system = tmp_path / "fixed.json"
    code, _, _ = run(capsys, "plmap-approx", "--input", path, "--repair",
                     "--out-system", str(out_system))
    assert code == 0
    code, out, _ = run(capsys, "plmap-approx", "--input", str(out_system))
    assert code == 0
    assert "repair" not in json.loads(out)
