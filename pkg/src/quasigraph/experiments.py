"""Config-driven experiment runner with reproducible artifacts.

A run is described by one YAML document (experiment tag, generator, pattern,
reference density, sampler, optional sweep).  Each driver writes rows.csv, a
manifest with the canonical config hash and every seed used, and plot-ready
whitespace data files.  Identical configs produce byte-identical CSV and .dat
bodies; wall-clock timestamps live only in the manifest.  Sweep points may run
on a thread pool, but rows always appear in sweep order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import yaml

from .graphs import GeneratorSpec, Graph, VertexSet, generate, planted_set
from .homomorphisms import PRESETS, ConstraintTuple, Pattern, preset, read_pattern
from .metrics import (
    SamplerSpec,
    edge_discrepancy,
    edge_discrepancy_search,
    full_report,
    labeled_deviation_over,
    sampled_tuple_family,
)
from .reductions import (
    amplify_discrepancy,
    bipartite_edge_deviation,
    counting_lemma_bound,
    half_set_discrepancy,
    main_lemma_trace,
)

ARTIFACT_VERSION = 1
VALID_EXPERIMENTS = (
    "cgw_suite",
    "linear_dependence",
    "counting_lemma",
    "amplification",
    "main_lemma",
)
ROWS_FILENAME = "rows.csv"
MANIFEST_FILENAME = "manifest.json"

# fixed budgets for the heuristic searches the drivers run per sweep point;
# the sampler's trial count stays reserved for tuple families
SEARCH_RESTARTS = 12
SEARCH_SEED_OFFSET = 4
PLANT_STREAM = 7
MIXED_TUPLES = 40
PURE_TUPLES = 10
CONTROL_TUPLES = 10
NOISE_FLOOR_SIGMAS = 3.0
MIN_FIT_POINTS = 3


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


_GENERATOR_KEYS = ("kind", "n", "p", "plant_fraction", "plant_boost", "seed", "path")
_SAMPLER_KEYS = ("trials", "subset_law", "seed")


@dataclass(frozen=True)
class RunSpec:
    """One materialized sweep point."""

    index: int
    generator: GeneratorSpec
    p_ref: float
    sampler: SamplerSpec
    overrides: dict


@dataclass
class ExperimentConfig:
    experiment: str
    generator: GeneratorSpec
    pattern: Pattern
    pattern_name: str
    p_ref: float
    sampler: SamplerSpec
    sweep: list[dict]
    output_dir: Path

    def canonical_dict(self) -> dict:
        """Semantic fields only; output location and worker count are plumbing."""
        return {
            "experiment": self.experiment,
            "generator": self.generator.to_dict(),
            "pattern": {
                "r": self.pattern.r,
                "edges": [list(e) for e in self.pattern.sorted_edges()],
                "designated": self.pattern.designated,
            },
            "p_ref": self.p_ref,
            "sampler": self.sampler.to_dict(),
            "sweep": self.sweep,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def describe(self) -> dict:
        """Echo of the resolved config, defaults included."""
        d = self.canonical_dict()
        d["pattern_name"] = self.pattern_name
        d["output_dir"] = str(self.output_dir)
        d["planned_runs"] = max(1, len(self.sweep))
        d["config_hash"] = self.config_hash()
        return d

    def runs(self) -> list[RunSpec]:
        if not self.sweep:
            return [RunSpec(0, self.generator, self.p_ref, self.sampler, {})]
        return [
            _apply_overrides(self, i, overrides)
            for i, overrides in enumerate(self.sweep)
        ]


def _apply_overrides(cfg: ExperimentConfig, index: int, overrides: dict) -> RunSpec:
    gen_fields: dict = {}
    p_ref = cfg.p_ref
    sampler_fields: dict = {}
    for key, value in overrides.items():
        if key in _GENERATOR_KEYS:
            gen_fields[key] = value
        elif key == "p_ref":
            p_ref = float(value)
        elif key == "trials":
            sampler_fields["trials"] = value
        elif key == "subset_law":
            sampler_fields["subset_law"] = value
        elif key == "sampler_seed":
            sampler_fields["seed"] = value
        else:
            allowed = ", ".join(
                (*_GENERATOR_KEYS, "p_ref", "trials", "subset_law", "sampler_seed")
            )
            raise ConfigError(f"unknown sweep key {key!r}; allowed: {allowed}")
    try:
        generator = replace(cfg.generator, **gen_fields)
        sampler = (
            replace(cfg.sampler, **sampler_fields) if sampler_fields else cfg.sampler
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"sweep[{index}]: {exc}") from exc
    if not 0.0 <= p_ref <= 1.0:
        raise ConfigError(f"sweep[{index}]: p_ref={p_ref} outside [0, 1]")
    return RunSpec(index, generator, p_ref, sampler, dict(overrides))


def _parse_generator(raw) -> GeneratorSpec:
    if isinstance(raw, str):
        if not Path(raw).is_file():
            raise ConfigError(f"generator file not found: {raw}")
        return GeneratorSpec(kind="file", path=raw)
    if not isinstance(raw, dict):
        raise ConfigError("generator must be a mapping or a graph file path")
    unknown = set(raw) - set(_GENERATOR_KEYS)
    if unknown:
        raise ConfigError(
            f"unknown generator field(s): {', '.join(sorted(unknown))}"
        )
    try:
        spec = GeneratorSpec(**raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"generator: {exc}") from exc
    if spec.kind == "file" and (spec.path is None or not Path(spec.path).is_file()):
        raise ConfigError(f"generator file not found: {spec.path}")
    return spec


def _parse_pattern(raw) -> tuple[Pattern, str]:
    if isinstance(raw, str):
        if raw in PRESETS:
            return preset(raw), raw
        if Path(raw).is_file():
            return read_pattern(raw), Path(raw).stem
        raise ConfigError(
            f"pattern {raw!r} is neither a preset ({', '.join(sorted(PRESETS))}) "
            "nor a readable file"
        )
    if isinstance(raw, dict):
        unknown = set(raw) - {"r", "edges", "designated"}
        if unknown:
            raise ConfigError(f"unknown pattern field(s): {', '.join(sorted(unknown))}")
        try:
            pat = Pattern(
                raw["r"],
                [tuple(e) for e in raw.get("edges", [])],
                designated=raw.get("designated", 0),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"pattern: {exc}") from exc
        return pat, "custom"
    raise ConfigError("pattern must be a preset name, file path, or mapping")


def _parse_sampler(raw) -> SamplerSpec:
    if raw is None:
        return SamplerSpec()
    if not isinstance(raw, dict):
        raise ConfigError("sampler must be a mapping")
    unknown = set(raw) - set(_SAMPLER_KEYS)
    if unknown:
        raise ConfigError(f"unknown sampler field(s): {', '.join(sorted(unknown))}")
    try:
        return SamplerSpec(**raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"sampler: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    """Parse and validate a YAML experiment config; defaults are filled in."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of fields")
    for name in ("experiment", "generator", "pattern", "p_ref"):
        if name not in raw:
            raise ConfigError(f"missing required field: {name}")
    experiment = raw["experiment"]
    if experiment not in VALID_EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; valid tags: "
            + ", ".join(VALID_EXPERIMENTS)
        )
    known = {
        "experiment",
        "generator",
        "pattern",
        "p_ref",
        "sampler",
        "sweep",
        "output_dir",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    p_ref = raw["p_ref"]
    if not isinstance(p_ref, (int, float)) or isinstance(p_ref, bool):
        raise ConfigError("p_ref must be a number")
    p_ref = float(p_ref)
    if not 0.0 <= p_ref <= 1.0:
        raise ConfigError(f"p_ref={p_ref} outside [0, 1]")
    sweep = raw.get("sweep") or []
    if not isinstance(sweep, list) or not all(isinstance(s, dict) for s in sweep):
        raise ConfigError("sweep must be a list of override mappings")
    pattern, pattern_name = _parse_pattern(raw["pattern"])
    cfg = ExperimentConfig(
        experiment=experiment,
        generator=_parse_generator(raw["generator"]),
        pattern=pattern,
        pattern_name=pattern_name,
        p_ref=p_ref,
        sampler=_parse_sampler(raw.get("sampler")),
        sweep=sweep,
        output_dir=Path(raw.get("output_dir", "out")),
    )
    cfg.runs()  # validates every sweep point eagerly
    return cfg


# ------------------------------------------------------------- artifact output


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_rows(path: Path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


PLOT_KINDS = {
    "delta_epsilon": (("delta", "epsilon"), ("fit",)),
    "deviation_vs_n": (("n", "deviation"), ()),
    "gap_vs_d": (("d_value", "gap"), ("threshold",)),
}


def emit_plot_data(
    rows: Sequence[dict], kind: str, output_dir, stem: Optional[str] = None
) -> Path:
    """Write one whitespace-separated data file with a header naming the axes."""
    if kind not in PLOT_KINDS:
        raise ValueError(
            f"unknown plot kind {kind!r}; valid kinds: {', '.join(sorted(PLOT_KINDS))}"
        )
    if not rows:
        raise ValueError("no rows to plot")
    required, optional = PLOT_KINDS[kind]
    columns = list(required) + [c for c in optional if all(c in r for r in rows)]
    lines = ["# " + " ".join(columns)]
    for i, row in enumerate(rows):
        values = []
        for col in columns:
            if col not in row:
                raise ValueError(f"row {i} is missing column {col!r}")
            v = row[col]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"non-numeric value for {col!r} in row {i}: {v!r}")
            if not math.isfinite(v):
                raise ValueError(f"non-finite value for {col!r} in row {i}")
            values.append(_fmt(float(v)) if isinstance(v, float) else str(v))
        lines.append(" ".join(values))
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    out = output_dir / f"{stem or kind}.dat"
    out.write_text("\n".join(lines) + "\n")
    return out


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class ExperimentOutcome:
    experiment: str
    columns: tuple[str, ...]
    rows: list[dict]
    failures: list[dict]
    extra: dict
    csv_path: Path
    manifest_path: Path
    plot_paths: list[Path] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _drive(
    cfg: ExperimentConfig,
    columns: Sequence[str],
    worker: Callable[[RunSpec], list[dict]],
    workers: int = 1,
    post: Optional[Callable[[list[dict]], tuple[dict, list[Path]]]] = None,
) -> ExperimentOutcome:
    if workers < 1:
        raise ValueError("workers must be positive")
    runs = cfg.runs()
    started = _now()

    def guarded(run: RunSpec) -> tuple[list[dict], Optional[dict]]:
        try:
            return worker(run), None
        except Exception as exc:  # per-row failures are recorded, not fatal
            return [], {"run": run.index, "error": f"{type(exc).__name__}: {exc}"}

    if workers == 1 or len(runs) == 1:
        results = [guarded(r) for r in runs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(guarded, runs))  # map keeps sweep order

    rows: list[dict] = []
    failures: list[dict] = []
    for out_rows, failure in results:
        rows.extend(out_rows)
        if failure is not None:
            failures.append(failure)

    extra: dict = {}
    plot_paths: list[Path] = []
    if post is not None:
        extra, plot_paths = post(rows)

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    csv_path = cfg.output_dir / ROWS_FILENAME
    write_rows(csv_path, columns, rows)
    manifest = {
        "artifact_version": ARTIFACT_VERSION,
        "experiment": cfg.experiment,
        "config_hash": cfg.config_hash(),
        "started": started,
        "finished": _now(),
        "row_count": len(rows),
        "rows_file": ROWS_FILENAME,
        "seeds": sorted(
            {r.generator.seed for r in runs} | {r.sampler.seed for r in runs}
        ),
        "runs": [
            {
                "run": r.index,
                "generator_seed": r.generator.seed,
                "sampler_seed": r.sampler.seed,
                "overrides": r.overrides,
            }
            for r in runs
        ],
        "failures": failures,
        "extra": extra,
    }
    manifest_path = cfg.output_dir / MANIFEST_FILENAME
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return ExperimentOutcome(
        experiment=cfg.experiment,
        columns=tuple(columns),
        rows=rows,
        failures=failures,
        extra=extra,
        csv_path=csv_path,
        manifest_path=manifest_path,
        plot_paths=plot_paths,
    )


def _search_spec(sampler: SamplerSpec) -> SamplerSpec:
    return SamplerSpec(
        trials=SEARCH_RESTARTS,
        subset_law=sampler.subset_law,
        seed=sampler.seed + SEARCH_SEED_OFFSET,
    )


# ------------------------------------------------------------------ cgw suite

CGW_COLUMNS = (
    "run",
    "n",
    "p_ref",
    "property",
    "deviation",
    "method",
    "trials",
    "witness_size",
    "generator_seed",
    "sampler_seed",
)


def run_cgw_suite(cfg: ExperimentConfig, workers: int = 1) -> ExperimentOutcome:
    """One row per (instance, property): the whole equivalence-suite readout."""

    def worker(run: RunSpec) -> list[dict]:
        g = generate(run.generator)
        reports = full_report(cfg.pattern, g, run.p_ref, run.sampler)
        rows = []
        for rep in reports:
            witness_size = sum(s.size for s in rep.witness)
            rows.append(
                {
                    "run": run.index,
                    "n": g.n,
                    "p_ref": run.p_ref,
                    "property": rep.property,
                    "deviation": rep.deviation,
                    "method": rep.method,
                    "trials": rep.trials,
                    "witness_size": witness_size,
                    "generator_seed": run.generator.seed,
                    "sampler_seed": run.sampler.seed,
                }
            )
        return rows

    def post(rows: list[dict]) -> tuple[dict, list[Path]]:
        paths = []
        if rows:
            by_property: dict[str, list[dict]] = {}
            for row in rows:
                by_property.setdefault(row["property"], []).append(row)
            for prop in sorted(by_property):
                paths.append(
                    emit_plot_data(
                        by_property[prop],
                        "deviation_vs_n",
                        cfg.output_dir,
                        stem=f"deviation_vs_n_{prop}",
                    )
                )
        worst = max((r["deviation"] for r in rows), default=0.0)
        return {"max_deviation": worst}, paths

    return _drive(cfg, CGW_COLUMNS, worker, workers, post)


# ---------------------------------------------------------- linear dependence

LINEAR_COLUMNS = (
    "run",
    "boost",
    "n",
    "p_ref",
    "delta",
    "delta_random",
    "delta_plant",
    "noise_floor",
    "above_floor",
    "epsilon",
    "epsilon_witness_size",
    "plant_size",
    "generator_seed",
    "sampler_seed",
)


def _plant_tuple_family(
    r: int, n: int, plant: VertexSet, seed: int
) -> list[ConstraintTuple]:
    """Seeded tuples aimed at the plant: halves of it against the complement
    (one boosted edge slot), colourings inside it, and complement-only
    controls."""
    rng = np.random.default_rng([seed, PLANT_STREAM])
    members = np.array(sorted(plant.members), dtype=np.int64)
    comp = np.array(
        [v for v in range(n) if not (plant.mask >> v) & 1], dtype=np.int64
    )
    out: list[ConstraintTuple] = []

    def split(pool: np.ndarray, parts: int) -> list[VertexSet]:
        perm = rng.permutation(pool)
        chunk = len(pool) // parts
        return [
            VertexSet(int(x) for x in perm[k * chunk : (k + 1) * chunk])
            for k in range(parts)
        ]

    for _ in range(MIXED_TUPLES):
        halves = split(members, 2)
        rest = split(comp, r - 2) if r > 2 else []
        out.append(ConstraintTuple(halves + rest))
    for _ in range(PURE_TUPLES):
        out.append(ConstraintTuple(split(members, r)))
    for _ in range(CONTROL_TUPLES):
        out.append(ConstraintTuple(split(comp, r)))
    return out


def run_linear_dependence(cfg: ExperimentConfig, workers: int = 1) -> ExperimentOutcome:
    """Planted-boost sweep: measured tuple deviation against measured edge
    discrepancy, with a log-log fit over points above the noise floor.

    The floor for each point is read off an unboosted twin (same generator
    seed, boost zero): the twin's family maximum plus three standard
    deviations of its per-tuple values.  Deltas under that are sampling noise.
    """
    runs = cfg.runs()
    if len(runs) < 5:
        raise ConfigError(
            f"linear_dependence needs a sweep with at least 5 points, got {len(runs)}"
        )
    for run in runs:
        if run.generator.kind != "planted_dense":
            raise ConfigError(
                f"sweep[{run.index}]: linear_dependence requires planted_dense "
                f"generators, got {run.generator.kind!r}"
            )
    if cfg.pattern.r < 2:
        raise ConfigError("linear_dependence needs a pattern with at least 2 vertices")

    def worker(run: RunSpec) -> list[dict]:
        g = generate(run.generator)
        plant = planted_set(run.generator)
        h = cfg.pattern
        family = sampled_tuple_family(h, g, run.sampler, disjoint=True)
        delta_random, _, _ = labeled_deviation_over(h, g, run.p_ref, family)
        plant_fam = _plant_tuple_family(h.r, g.n, plant, run.sampler.seed)
        delta_plant, _, _ = labeled_deviation_over(h, g, run.p_ref, plant_fam)
        delta = max(delta_random, delta_plant)

        null_gen = replace(run.generator, plant_boost=0.0)
        null_g = generate(null_gen)
        null_family = sampled_tuple_family(h, null_g, run.sampler, disjoint=True)
        _, _, null_devs = labeled_deviation_over(h, null_g, run.p_ref, null_family)
        floor = max(null_devs) + NOISE_FLOOR_SIGMAS * float(np.std(null_devs))

        eps = edge_discrepancy_search(g, run.p_ref, _search_spec(run.sampler))
        return [
            {
                "run": run.index,
                "boost": run.generator.plant_boost,
                "n": g.n,
                "p_ref": run.p_ref,
                "delta": delta,
                "delta_random": delta_random,
                "delta_plant": delta_plant,
                "noise_floor": floor,
                "above_floor": delta > floor,
                "epsilon": eps.deviation,
                "epsilon_witness_size": eps.witness[0].size,
                "plant_size": plant.size,
                "generator_seed": run.generator.seed,
                "sampler_seed": run.sampler.seed,
            }
        ]

    def post(rows: list[dict]) -> tuple[dict, list[Path]]:
        fitted = [r for r in rows if r["above_floor"] and r["epsilon"] > 0]
        if len(fitted) < MIN_FIT_POINTS:
            fit = {"status": "inconclusive", "points": len(fitted)}
        else:
            lx = np.log([r["delta"] for r in fitted])
            ly = np.log([r["epsilon"] for r in fitted])
            slope, intercept = np.polyfit(lx, ly, 1)
            corr = float(np.corrcoef(lx, ly)[0, 1])
            fit = {
                "status": "ok",
                "points": len(fitted),
                "slope": float(slope),
                "intercept": float(intercept),
                "correlation": corr,
            }
        plot_rows = []
        for r in rows:
            pr = {"delta": r["delta"], "epsilon": r["epsilon"]}
            if fit["status"] == "ok":
                pr["fit"] = float(
                    math.exp(fit["intercept"] + fit["slope"] * math.log(r["delta"]))
                )
            plot_rows.append(pr)
        paths = []
        if plot_rows:
            paths.append(emit_plot_data(plot_rows, "delta_epsilon", cfg.output_dir))
        return {"fit": fit}, paths

    return _drive(cfg, LINEAR_COLUMNS, worker, workers, post)


# ------------------------------------------------------------- counting lemma

COUNTING_COLUMNS = (
    "run",
    "n",
    "p_ref",
    "pattern",
    "step",
    "added_edge",
    "diff",
    "bound",
    "step_ok",
    "delta_used",
    "delta_method",
    "generator_seed",
)


def run_counting_lemma(cfg: ExperimentConfig, workers: int = 1) -> ExperimentOutcome:
    """Per filtration step: the difference, the 4*delta*n^v budget, the verdict."""

    def worker(run: RunSpec) -> list[dict]:
        g = generate(run.generator)
        delta, method = bipartite_edge_deviation(
            g, run.p_ref, _search_spec(run.sampler)
        )
        res = counting_lemma_bound(
            cfg.pattern, g, run.p_ref, delta=delta, delta_method=method
        )
        return [
            {
                "run": run.index,
                "n": g.n,
                "p_ref": run.p_ref,
                "pattern": cfg.pattern_name,
                "step": k + 1,
                "added_edge": "{}-{}".format(*res.added_edges[k]),
                "diff": res.diffs[k],
                "bound": res.bound,
                "step_ok": res.step_ok[k],
                "delta_used": res.delta_used,
                "delta_method": res.delta_method,
                "generator_seed": run.generator.seed,
            }
            for k in range(len(res.diffs))
        ]

    def post(rows: list[dict]) -> tuple[dict, list[Path]]:
        return {"all_steps_ok": all(r["step_ok"] for r in rows)}, []

    return _drive(cfg, COUNTING_COLUMNS, worker, workers, post)


# -------------------------------------------------------------- amplification

AMPLIFY_COLUMNS = (
    "run",
    "n",
    "q",
    "d_value",
    "threshold",
    "gap",
    "certified",
    "retries",
    "x_size",
    "y_size",
    "witness_size",
    "generator_seed",
    "amplify_seed",
)


def run_amplification(cfg: ExperimentConfig, workers: int = 1) -> ExperimentOutcome:
    """Search a discrepancy witness, then amplify it to a certified pair gap.

    The configured pattern is not consulted; the construction lives entirely
    at the edge scale.
    """

    def worker(run: RunSpec) -> list[dict]:
        g = generate(run.generator)
        rep = edge_discrepancy(g, run.p_ref, _search_spec(run.sampler))
        witness = rep.witness[0]
        if half_set_discrepancy(g, run.p_ref, witness) <= 0:
            raise ValueError("witness has zero discrepancy; nothing to amplify")
        amp_seed = run.sampler.seed + run.index
        res = amplify_discrepancy(
            g, run.p_ref, witness, slack=0.02, max_retries=10, seed=amp_seed
        )
        return [
            {
                "run": run.index,
                "n": g.n,
                "q": run.p_ref,
                "d_value": res.d_value,
                "threshold": res.threshold,
                "gap": res.gap,
                "certified": res.certified,
                "retries": res.retries,
                "x_size": res.x.size,
                "y_size": res.y.size,
                "witness_size": witness.size,
                "generator_seed": run.generator.seed,
                "amplify_seed": amp_seed,
            }
        ]

    def post(rows: list[dict]) -> tuple[dict, list[Path]]:
        paths = []
        if rows:
            paths.append(emit_plot_data(rows, "gap_vs_d", cfg.output_dir))
        certified = sum(1 for r in rows if r["certified"])
        return {"certified_runs": certified, "total_runs": len(rows)}, paths

    return _drive(cfg, AMPLIFY_COLUMNS, worker, workers, post)


# ----------------------------------------------------------------- main lemma

MAIN_LEMMA_COLUMNS = (
    "run",
    "n",
    "p_ref",
    "pattern",
    "r",
    "total",
    "rhs_from_sigmas",
    "bound_ratio",
    "bound_ratio_stated",
    "max_sigma_dev",
    "sigma_ok_all",
    "delta",
    "generator_seed",
    "sampler_seed",
)


def run_main_lemma(cfg: ExperimentConfig, workers: int = 1) -> ExperimentOutcome:
    """Degree-power trace per instance, with delta measured over a family that
    contains the trace's own sign-split tuples (their deviations equal
    |sigma|/n^v, so no second counting pass is needed)."""

    def worker(run: RunSpec) -> list[dict]:
        g = generate(run.generator)
        h = cfg.pattern
        trace = main_lemma_trace(h, g, run.p_ref, 0.0)
        family = sampled_tuple_family(h, g, run.sampler, disjoint=False)
        delta_family, _, _ = labeled_deviation_over(h, g, run.p_ref, family)
        delta = max(delta_family, trace.max_sigma_deviation())
        trace = trace.with_delta(delta)
        return [
            {
                "run": run.index,
                "n": g.n,
                "p_ref": run.p_ref,
                "pattern": cfg.pattern_name,
                "r": trace.r,
                "total": trace.total,
                "rhs_from_sigmas": trace.rhs_from_sigmas,
                "bound_ratio": trace.bound_ratio,
                "bound_ratio_stated": trace.bound_ratio_stated,
                "max_sigma_dev": trace.max_sigma_deviation(),
                "sigma_ok_all": all(trace.sigma_ok),
                "delta": delta,
                "generator_seed": run.generator.seed,
                "sampler_seed": run.sampler.seed,
            }
        ]

    def post(rows: list[dict]) -> tuple[dict, list[Path]]:
        worst = max((r["bound_ratio"] for r in rows), default=0.0)
        return {"max_bound_ratio": worst}, []

    return _drive(cfg, MAIN_LEMMA_COLUMNS, worker, workers, post)


_DISPATCH = {
    "cgw_suite": run_cgw_suite,
    "linear_dependence": run_linear_dependence,
    "counting_lemma": run_counting_lemma,
    "amplification": run_amplification,
    "main_lemma": run_main_lemma,
}


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentOutcome:
    return _DISPATCH[cfg.experiment](cfg, workers)
