import json

import yaml

from quasigraph.cli import main, read_constraints
from quasigraph.graphs import build_graph, generate, GeneratorSpec, write_graph
from quasigraph.homomorphisms import hom_count, preset


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def make_graph(tmp_path, n=20, seed=3):
    path = tmp_path / "g.graph"
    g = generate(GeneratorSpec(kind="erdos_renyi", n=n, p=0.5, seed=seed))
    write_graph(g, str(path))
    return path, g


def test_gen_roundtrip(tmp_path, capsys):
    out = tmp_path / "gen.graph"
    code, text, _ = run_cli(capsys, "gen", "-n", 12, "--p", 0.5, "--seed", 7,
                            "-o", out)
    assert code == 0
    assert "n=12" in text
    assert out.is_file()


def test_count_matches_library(tmp_path, capsys):
    gpath, g = make_graph(tmp_path)
    code, text, _ = run_cli(capsys, "count", "K3", gpath, "--json")
    assert code == 0
    assert json.loads(text)["count"] == hom_count(preset("K3"), g)


def test_count_with_constraints(tmp_path, capsys):
    gpath, g = make_graph(tmp_path)
    cpath = tmp_path / "c.txt"
    cpath.write_text("# halves\n0 1 2 3 4\n*\n-\n")
    code, text, _ = run_cli(capsys, "count", "K3", gpath, "--constraints", cpath)
    assert code == 0
    assert text.strip() == "0"  # empty third slot kills every homomorphism


def test_read_constraints_validates_line_count(tmp_path, capsys):
    cpath = tmp_path / "c.txt"
    cpath.write_text("*\n*\n")
    gpath, _ = make_graph(tmp_path)
    code, _, err = run_cli(capsys, "count", "K3", gpath, "--constraints", cpath)
    assert code == 2
    assert "3-vertex pattern" in err


def test_read_constraints_parses_forms(tmp_path):
    cpath = tmp_path / "c.txt"
    cpath.write_text("0 2 4 # comment\n*\n-\n")
    c = read_constraints(str(cpath), 3)
    assert sorted(c[0].members) == [0, 2, 4]
    assert c[1] is None
    assert c[2].size == 0


def test_report_writes_json_and_figure(tmp_path, capsys):
    gpath, _ = make_graph(tmp_path)
    out_dir = tmp_path / "rep"
    code, text, _ = run_cli(capsys, "report", "K3", gpath, "--p", 0.5,
                            "--trials", 20, "--output-dir", out_dir)
    assert code == 0
    assert (out_dir / "report.png").is_file()
    payload = json.loads((out_dir / "report.json").read_text())
    assert len(payload["reports"]) == 7
    assert "edge_discrepancy" in text


def test_reduce_powersum(tmp_path, capsys):
    gpath, _ = make_graph(tmp_path)
    code, text, _ = run_cli(capsys, "reduce", "powersum", gpath, "-r", 2, "--json")
    assert code == 0
    assert json.loads(text)["total"] >= 0


def test_reduce_trace_self_calibrates(tmp_path, capsys):
    gpath, _ = make_graph(tmp_path)
    code, text, _ = run_cli(capsys, "reduce", "trace", "K3", gpath, "--p", 0.5,
                            "--json")
    assert code == 0
    payload = json.loads(text)
    assert all(payload["sigma_ok"])
    assert payload["bound_ratio"] < 10


def test_reduce_counting(tmp_path, capsys):
    gpath, _ = make_graph(tmp_path, n=14)
    code, text, _ = run_cli(capsys, "reduce", "counting", "C4", gpath, "--p", 0.5)
    assert code == 0
    assert "all_ok=True" in text


def test_reduce_bipartition_and_disjointify(tmp_path, capsys):
    gpath, _ = make_graph(tmp_path, n=14)
    cpath = tmp_path / "c.txt"
    cpath.write_text("0 1 2 3 4 5\n0 1 2 3 4 5\n*\n")
    code, text, _ = run_cli(capsys, "reduce", "bipartition", "K3", gpath, cpath,
                            "-i", 0, "-j", 1, "--trials", 40, "--json")
    assert code == 0
    payload = json.loads(text)
    assert payload["exact"] is not None  # |U| = 6 is within the exact cap

    code, text, _ = run_cli(capsys, "reduce", "disjointify", "K3", gpath, cpath,
                            "--trials", 40, "--json")
    assert code == 0
    assert json.loads(text)["steps"] >= 1


def test_reduce_amplify(tmp_path, capsys):
    m = 8
    gpath = tmp_path / "b.graph"
    write_graph(build_graph(2 * m, [(i, m + j) for i in range(m) for j in range(m)]),
                str(gpath))
    code, text, _ = run_cli(capsys, "reduce", "amplify", gpath, "--q", 0.5,
                            "--seed", 4, "--json")
    assert code == 0
    payload = json.loads(text)
    assert payload["x"] and payload["y"]


def test_experiment_renders_figures_and_honours_workers(tmp_path, capsys):
    doc = {
        "experiment": "cgw_suite",
        "generator": {"kind": "erdos_renyi", "n": 12, "p": 0.5, "seed": 2},
        "pattern": "K3",
        "p_ref": 0.5,
        "sampler": {"trials": 10, "seed": 1},
        "sweep": [{"n": 10}, {"n": 12}],
        "output_dir": str(tmp_path / "exp"),
    }
    cfg = tmp_path / "e.yaml"
    cfg.write_text(yaml.safe_dump(doc))
    code, text, _ = run_cli(capsys, "experiment", cfg, "--workers", 2, "--json")
    assert code == 0
    payload = json.loads(text)
    assert payload["row_count"] == 14
    assert payload["figures"]
    assert all(f.endswith(".png") for f in payload["figures"])
    assert (tmp_path / "exp" / "deviation_vs_n_spectral.png").is_file()


def test_experiment_output_dir_override(tmp_path, capsys):
    doc = {
        "experiment": "counting_lemma",
        "generator": {"kind": "erdos_renyi", "n": 12, "p": 0.5, "seed": 2},
        "pattern": "K2",
        "p_ref": 0.5,
        "sampler": {"trials": 5, "seed": 1},
        "output_dir": str(tmp_path / "ignored"),
    }
    cfg = tmp_path / "e.yaml"
    cfg.write_text(yaml.safe_dump(doc))
    code, _, _ = run_cli(capsys, "experiment", cfg, "--output-dir",
                         tmp_path / "chosen")
    assert code == 0
    assert (tmp_path / "chosen" / "rows.csv").is_file()
    assert not (tmp_path / "ignored").exists()


def test_experiment_row_failures_exit_three(tmp_path, capsys):
    n = 10
    gpath = tmp_path / "kn.graph"
    write_graph(
        build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)]),
        str(gpath),
    )
    doc = {
        "experiment": "amplification",
        "generator": str(gpath),
        "pattern": "K2",
        "p_ref": 1.0,
        "sampler": {"trials": 5, "seed": 0},
        "output_dir": str(tmp_path / "exp"),
    }
    cfg = tmp_path / "e.yaml"
    cfg.write_text(yaml.safe_dump(doc))
    code, text, _ = run_cli(capsys, "experiment", cfg)
    assert code == 3
    assert "failed runs" in text
    assert (tmp_path / "exp" / "rows.csv").is_file()  # artifacts still written


def test_config_error_exit_two(tmp_path, capsys):
    code, _, err = run_cli(capsys, "experiment", tmp_path / "nope.yaml")
    assert code == 2
    assert "not found" in err


def test_bad_pattern_exit_two(tmp_path, capsys):
    gpath, _ = make_graph(tmp_path)
    code, _, err = run_cli(capsys, "count", "K99", gpath)
    assert code == 2
    assert "preset" in err
