import json

import pytest
import yaml

from quasigraph.experiments import (
    ARTIFACT_VERSION,
    ConfigError,
    ExperimentConfig,
    emit_plot_data,
    load_config,
    run_experiment,
)
from quasigraph.graphs import build_graph, write_graph


def complete_bipartite(m):
    return build_graph(2 * m, [(i, m + j) for i in range(m) for j in range(m)])


def write_config(tmp_path, name="cfg.yaml", **overrides):
    doc = {
        "experiment": "cgw_suite",
        "generator": {"kind": "erdos_renyi", "n": 20, "p": 0.5, "seed": 3},
        "pattern": "K3",
        "p_ref": 0.5,
        "sampler": {"trials": 30, "seed": 1},
        "output_dir": str(tmp_path / "out"),
    }
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


# ------------------------------------------------------------- config loading


def test_load_config_defaults(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "experiment": "cgw_suite",
                "generator": {"kind": "erdos_renyi", "n": 16},
                "pattern": "K2",
                "p_ref": 0.5,
            }
        )
    )
    cfg = load_config(path)
    assert cfg.sampler.trials == 1000
    assert cfg.sampler.subset_law == "size_stratified"
    assert cfg.output_dir.name == "out"
    assert cfg.sweep == []
    echo = cfg.describe()
    assert echo["planned_runs"] == 1
    assert echo["sampler"]["trials"] == 1000
    assert echo["pattern_name"] == "K2"


def test_planned_runs_counts_sweep(tmp_path):
    path = write_config(tmp_path, sweep=[{"n": k} for k in (8, 12, 16, 20, 24)])
    cfg = load_config(path)
    assert cfg.describe()["planned_runs"] == 5
    assert [r.generator.n for r in cfg.runs()] == [8, 12, 16, 20, 24]


def test_config_hash_ignores_key_order_and_output_dir(tmp_path):
    base = {
        "experiment": "counting_lemma",
        "generator": {"kind": "erdos_renyi", "n": 14, "p": 0.4, "seed": 2},
        "pattern": "C4",
        "p_ref": 0.4,
        "sampler": {"trials": 25, "seed": 6},
        "output_dir": str(tmp_path / "a"),
    }
    p1 = tmp_path / "one.yaml"
    p1.write_text(yaml.safe_dump(base))
    reordered = dict(reversed(list(base.items())))
    reordered["output_dir"] = str(tmp_path / "elsewhere")
    p2 = tmp_path / "two.yaml"
    p2.write_text(yaml.safe_dump(reordered, sort_keys=False))
    assert load_config(p1).config_hash() == load_config(p2).config_hash()


def test_config_hash_sensitive_to_fields(tmp_path):
    h1 = load_config(write_config(tmp_path, name="a.yaml")).config_hash()
    h2 = load_config(write_config(tmp_path, name="b.yaml", p_ref=0.6)).config_hash()
    assert h1 != h2


def test_missing_field_named(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump({"experiment": "cgw_suite"}))
    with pytest.raises(ConfigError, match="generator"):
        load_config(path)


def test_unknown_experiment_lists_tags(tmp_path):
    path = write_config(tmp_path, experiment="spectral_zoo")
    with pytest.raises(ConfigError, match="cgw_suite.*main_lemma"):
        load_config(path)


@pytest.mark.parametrize(
    "field,value,fragment",
    [
        ("generator", {"m": 4}, "generator field"),
        ("sampler", {"pulls": 3}, "sampler field"),
        ("pattern", {"r": 3, "sides": []}, "pattern field"),
        ("p_ref", 1.5, "outside"),
        ("p_ref", True, "number"),
        ("sweep", [{"warp": 1}], "unknown sweep key"),
        ("sweep", [{"p_ref": 2.0}], "outside"),
    ],
)
def test_bad_fields_rejected(tmp_path, field, value, fragment):
    path = write_config(tmp_path, **{field: value})
    with pytest.raises(ConfigError, match=fragment):
        load_config(path)


def test_unknown_top_level_field(tmp_path):
    path = write_config(tmp_path, verbosity=3)
    with pytest.raises(ConfigError, match="verbosity"):
        load_config(path)


def test_pattern_forms(tmp_path):
    inline = write_config(
        tmp_path,
        name="inline.yaml",
        pattern={"r": 3, "edges": [[0, 1], [1, 2]], "designated": 1},
    )
    cfg = load_config(inline)
    assert cfg.pattern.r == 3 and cfg.pattern.designated == 1
    assert cfg.pattern_name == "custom"

    missing = write_config(tmp_path, name="missing.yaml", pattern="K17")
    with pytest.raises(ConfigError, match="preset"):
        load_config(missing)


def test_generator_as_file_path(tmp_path):
    gpath = tmp_path / "host.graph"
    write_graph(complete_bipartite(4), str(gpath))
    cfg = load_config(write_config(tmp_path, generator=str(gpath)))
    assert cfg.generator.kind == "file"
    with pytest.raises(ConfigError, match="not found"):
        load_config(write_config(tmp_path, name="g2.yaml", generator="/no/such.graph"))


def test_sampler_seed_alias_in_sweep(tmp_path):
    path = write_config(tmp_path, sweep=[{"sampler_seed": 9, "trials": 5}])
    runs = load_config(path).runs()
    assert runs[0].sampler.seed == 9
    assert runs[0].sampler.trials == 5


def test_config_not_yaml(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("experiment: [unclosed")
    with pytest.raises(ConfigError, match="YAML"):
        load_config(path)


def test_config_file_missing(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.yaml")


# ----------------------------------------------------------------- plot data


def test_emit_plot_data_header_and_body(tmp_path):
    rows = [
        {"delta": 0.1, "epsilon": 0.2, "fit": 0.21},
        {"delta": 0.3, "epsilon": 0.5, "fit": 0.48},
    ]
    out = emit_plot_data(rows, "delta_epsilon", tmp_path)
    lines = out.read_text().splitlines()
    assert lines[0] == "# delta epsilon fit"
    assert lines[1].split() == ["0.1", "0.2", "0.21"]
    assert len(lines) == 3


def test_emit_plot_data_optional_column_dropped(tmp_path):
    rows = [{"d_value": 4, "gap": 1.5}, {"d_value": 8, "gap": 2.0, "threshold": 0.1}]
    out = emit_plot_data(rows, "gap_vs_d", tmp_path)
    assert out.read_text().splitlines()[0] == "# d_value gap"


def test_emit_plot_data_errors(tmp_path):
    with pytest.raises(ValueError, match="no rows"):
        emit_plot_data([], "gap_vs_d", tmp_path)
    with pytest.raises(ValueError, match="unknown plot kind"):
        emit_plot_data([{"x": 1}], "scatterplot", tmp_path)
    with pytest.raises(ValueError, match="row 1"):
        emit_plot_data(
            [{"n": 4, "deviation": 0.1}, {"n": 8, "deviation": float("inf")}],
            "deviation_vs_n",
            tmp_path,
        )
    with pytest.raises(ValueError, match="missing column"):
        emit_plot_data([{"n": 4}], "deviation_vs_n", tmp_path)
    with pytest.raises(ValueError, match="non-numeric"):
        emit_plot_data([{"n": 4, "deviation": "big"}], "deviation_vs_n", tmp_path)


# -------------------------------------------------------------------- drivers


def test_cgw_suite_rows_and_plots(tmp_path):
    path = write_config(tmp_path, sweep=[{"n": k} for k in (12, 16, 20)])
    cfg = load_config(path)
    out = run_experiment(cfg, workers=2)
    assert out.ok
    assert len(out.rows) == 3 * 7  # seven properties per instance
    assert {r["property"] for r in out.rows} == {
        "edge_discrepancy",
        "c4",
        "spectral",
        "hereditary",
        "labeled_disjoint",
        "labeled_free",
        "crude_density_bound",
    }
    dat = cfg.output_dir / "deviation_vs_n_edge_discrepancy.dat"
    lines = dat.read_text().splitlines()
    assert lines[0] == "# n deviation"
    assert len(lines) == 4
    assert out.extra["max_deviation"] >= 0


def test_rows_csv_byte_identical_across_replay_and_workers(tmp_path):
    path = write_config(tmp_path, sweep=[{"n": k} for k in (12, 16, 20, 24)])
    cfg = load_config(path)
    first = run_experiment(cfg, workers=1).csv_path.read_bytes()
    again = run_experiment(cfg, workers=3).csv_path.read_bytes()
    assert first == again


def test_manifest_contents(tmp_path):
    path = write_config(tmp_path, sweep=[{"n": 12}, {"n": 16, "seed": 8}])
    cfg = load_config(path)
    out = run_experiment(cfg)
    man = json.loads(out.manifest_path.read_text())
    assert man["artifact_version"] == ARTIFACT_VERSION
    assert man["config_hash"] == cfg.config_hash()
    assert man["row_count"] == len(out.rows)
    assert man["rows_file"] == "rows.csv"
    assert man["seeds"] == sorted(set(man["seeds"]))
    assert {1, 3, 8} <= set(man["seeds"])
    assert [r["run"] for r in man["runs"]] == [0, 1]
    assert man["runs"][1]["overrides"] == {"n": 16, "seed": 8}
    assert man["failures"] == []
    assert man["started"] <= man["finished"]


def test_counting_lemma_rows(tmp_path):
    path = write_config(
        tmp_path,
        experiment="counting_lemma",
        pattern="C4",
        generator={"kind": "erdos_renyi", "n": 18, "p": 0.5, "seed": 2},
    )
    out = run_experiment(load_config(path))
    assert out.ok
    assert [r["step"] for r in out.rows] == [1, 2, 3, 4]
    assert all(set(r["added_edge"].split("-")) <= set("0123") for r in out.rows)
    assert out.rows[0]["delta_method"] == "exact"
    assert out.extra["all_steps_ok"] is True
    assert all(r["step_ok"] for r in out.rows)


def test_amplification_certifies_on_bipartite_host(tmp_path):
    gpath = tmp_path / "k16.graph"
    write_graph(complete_bipartite(16), str(gpath))
    path = write_config(
        tmp_path,
        experiment="amplification",
        generator=str(gpath),
        pattern="K2",
        sampler={"trials": 20, "seed": 4},
    )
    out = run_experiment(load_config(path))
    assert out.ok
    row = out.rows[0]
    assert row["certified"] is True
    assert row["x_size"] == row["y_size"] == 8
    assert row["gap"] > row["threshold"]
    dat = (tmp_path / "out" / "gap_vs_d.dat").read_text().splitlines()
    assert dat[0] == "# d_value gap threshold"


def test_amplification_zero_discrepancy_recorded_as_failure(tmp_path):
    n = 10
    gpath = tmp_path / "kn.graph"
    write_graph(
        build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)]),
        str(gpath),
    )
    path = write_config(
        tmp_path,
        experiment="amplification",
        generator=str(gpath),
        pattern="K2",
        p_ref=1.0,
        sampler={"trials": 5, "seed": 0},
    )
    out = run_experiment(load_config(path))
    assert not out.ok
    assert out.rows == []
    assert "zero discrepancy" in out.failures[0]["error"]
    man = json.loads(out.manifest_path.read_text())
    assert man["failures"] == out.failures


def test_main_lemma_rows(tmp_path):
    path = write_config(
        tmp_path,
        experiment="main_lemma",
        generator={"kind": "erdos_renyi", "n": 28, "p": 0.5, "seed": 7},
        sampler={"trials": 40, "seed": 2},
    )
    out = run_experiment(load_config(path))
    assert out.ok
    row = out.rows[0]
    assert row["sigma_ok_all"] is True
    assert row["delta"] >= row["max_sigma_dev"]
    assert row["bound_ratio"] >= 0
    assert row["r"] == 2  # designated vertex of K3 has two pattern neighbours


LINEAR_SWEEP = [{"plant_boost": b} for b in (0.06, 0.12, 0.18, 0.24, 0.30)]


def linear_config(tmp_path, **overrides):
    doc = {
        "experiment": "linear_dependence",
        "generator": {
            "kind": "planted_dense",
            "n": 120,
            "p": 0.4,
            "plant_fraction": 0.85,
            "plant_boost": 0.1,
            "seed": 11,
        },
        "pattern": "K3",
        "p_ref": 0.4,
        "sampler": {"trials": 120, "seed": 1},
        "sweep": LINEAR_SWEEP,
        "output_dir": str(tmp_path / "out"),
    }
    doc.update(overrides)
    path = tmp_path / "lin.yaml"
    path.write_text(yaml.safe_dump(doc))
    return path


def test_linear_dependence_fit(tmp_path):
    out = run_experiment(load_config(linear_config(tmp_path)), workers=2)
    assert out.ok
    assert len(out.rows) == 5
    assert all(r["above_floor"] for r in out.rows)
    deltas = [r["delta"] for r in out.rows]
    assert deltas == sorted(deltas)  # stronger boost, stronger signal
    fit = out.extra["fit"]
    assert fit["status"] == "ok"
    assert 0 < fit["slope"] < 2
    assert fit["correlation"] > 0.9
    lines = (tmp_path / "out" / "delta_epsilon.dat").read_text().splitlines()
    assert lines[0] == "# delta epsilon fit"
    assert len(lines) == 6
    man = json.loads(out.manifest_path.read_text())
    assert man["extra"]["fit"]["slope"] == fit["slope"]


def test_linear_dependence_inconclusive_below_floor(tmp_path):
    sweep = [{"plant_boost": b} for b in (0.0, 1e-4, 2e-4, 3e-4, 4e-4)]
    out = run_experiment(load_config(linear_config(tmp_path, sweep=sweep)))
    assert out.extra["fit"]["status"] == "inconclusive"


def test_linear_dependence_requires_five_points(tmp_path):
    path = linear_config(tmp_path, sweep=LINEAR_SWEEP[:3])
    with pytest.raises(ConfigError, match="at least 5"):
        run_experiment(load_config(path))


def test_linear_dependence_requires_planted_generator(tmp_path):
    path = linear_config(
        tmp_path,
        generator={"kind": "erdos_renyi", "n": 60, "p": 0.4, "seed": 1},
    )
    with pytest.raises(ConfigError, match="planted_dense"):
        run_experiment(load_config(path))


def test_csv_formatting(tmp_path):
    path = write_config(tmp_path, sweep=[{"n": 12}])
    out = run_experiment(load_config(path))
    text = out.csv_path.read_text()
    lines = text.splitlines()
    assert lines[0].startswith("run,n,p_ref,property")
    assert "True" not in text and "False" not in text  # booleans are lowercase
    assert text.endswith("\n") and "\r" not in text
