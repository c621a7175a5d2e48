"""Command-line front end.

Subcommands mirror the library layers: ``gen`` writes graph files, ``count``
evaluates one constrained count, ``report`` runs the full deviation suite,
``reduce`` exposes the constructive procedures one at a time, ``experiment``
drives a config file.  Exit codes: 0 success, 2 bad configuration or usage,
3 experiment finished but some rows failed (artifacts are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .experiments import ConfigError, load_config, run_experiment
from .graphs import GENERATOR_KINDS, GeneratorSpec, VertexSet, generate, write_graph, read_graph
from .homomorphisms import (
    PRESETS,
    ConstraintTuple,
    Pattern,
    hom_count,
    preset,
    read_pattern,
)
from .metrics import SamplerSpec, edge_discrepancy, full_report, report_list_json
from .reductions import (
    amplify_discrepancy,
    bipartite_edge_deviation,
    counting_lemma_bound,
    degree_power_discrepancy,
    disjointify_estimate,
    equitable_bipartition_expectation,
    main_lemma_trace,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ROW_FAILURES = 3


def _load_pattern(arg: str) -> Pattern:
    if arg in PRESETS:
        return preset(arg)
    if Path(arg).is_file():
        return read_pattern(arg)
    raise ConfigError(
        f"pattern {arg!r} is neither a preset ({', '.join(sorted(PRESETS))}) "
        "nor a readable file"
    )


def read_constraints(path: str, r: int) -> ConstraintTuple:
    """Constraint file: one line per pattern vertex; '*' leaves the slot
    unconstrained, '-' is the empty set, otherwise whitespace-separated ids."""
    sets: list[Optional[VertexSet]] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "*":
            sets.append(None)
        elif line == "-":
            sets.append(VertexSet(()))
        else:
            try:
                sets.append(VertexSet(int(tok) for tok in line.split()))
            except ValueError:
                raise ConfigError(f"{path}: bad constraint line {raw!r}") from None
    if len(sets) != r:
        raise ConfigError(
            f"{path}: {len(sets)} constraint lines for a {r}-vertex pattern"
        )
    return ConstraintTuple(sets)


def _emit(payload: dict, args, human: str) -> None:
    print(json.dumps(payload, indent=2) if args.json else human)


# ----------------------------------------------------------------- subcommands


def cmd_gen(args) -> int:
    spec = GeneratorSpec(
        kind=args.kind,
        n=args.n,
        p=args.p,
        plant_fraction=args.plant_fraction,
        plant_boost=args.plant_boost,
        seed=args.seed,
    )
    g = generate(spec)
    write_graph(g, args.output)
    print(f"wrote {args.output}: n={g.n} edges={g.edge_count}")
    return EXIT_OK


def cmd_count(args) -> int:
    h = _load_pattern(args.pattern)
    g = read_graph(args.graph)
    c = read_constraints(args.constraints, h.r) if args.constraints else None
    value = hom_count(h, g, c)
    _emit({"count": value}, args, str(value))
    return EXIT_OK


def cmd_report(args) -> int:
    h = _load_pattern(args.pattern)
    g = read_graph(args.graph)
    spec = SamplerSpec(trials=args.trials, seed=args.seed)
    reports = full_report(h, g, args.p, spec)
    listing = report_list_json(reports)
    payload = {"n": g.n, "p_ref": args.p, "reports": listing}

    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    json_path.write_text(json.dumps(payload, indent=2) + "\n")
    from .figures import render_report  # defer: matplotlib import is slow

    png_path = render_report(listing, out_dir / "report.png")

    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for rep in reports:
            print(
                f"{rep.property:22s} deviation={rep.deviation:<12.6g} "
                f"method={rep.method} trials={rep.trials}"
            )
        print(f"wrote {json_path} and {png_path}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.output_dir is not None:
        cfg.output_dir = Path(args.output_dir)
    outcome = run_experiment(cfg, workers=args.workers)
    figures = []
    if outcome.plot_paths:
        from .figures import render_many  # defer: matplotlib import is slow

        figures = render_many(outcome.plot_paths)
    payload = {
        "experiment": outcome.experiment,
        "rows": str(outcome.csv_path),
        "manifest": str(outcome.manifest_path),
        "row_count": len(outcome.rows),
        "failures": outcome.failures,
        "figures": [str(p) for p in figures],
        "extra": outcome.extra,
    }
    human = (
        f"{outcome.experiment}: {len(outcome.rows)} rows -> {outcome.csv_path}\n"
        f"manifest: {outcome.manifest_path}"
    )
    for p in figures:
        human += f"\nfigure: {p}"
    if outcome.failures:
        human += f"\nfailed runs: {len(outcome.failures)} (see manifest)"
    _emit(payload, args, human)
    return EXIT_OK if outcome.ok else EXIT_ROW_FAILURES


def cmd_reduce_bipartition(args) -> int:
    h = _load_pattern(args.pattern)
    g = read_graph(args.graph)
    c = read_constraints(args.constraints, h.r)
    mc, exact = equitable_bipartition_expectation(
        h, g, c, args.i, args.j, trials=args.trials, seed=args.seed
    )
    payload = {"mc_mean": mc, "exact": exact}
    human = f"mc_mean={mc}" + ("" if exact is None else f" exact={exact}")
    _emit(payload, args, human)
    return EXIT_OK


def cmd_reduce_disjointify(args) -> int:
    h = _load_pattern(args.pattern)
    g = read_graph(args.graph)
    c = read_constraints(args.constraints, h.r)
    estimate, steps = disjointify_estimate(
        h, g, c, hom_count, trials=args.trials, seed=args.seed
    )
    _emit(
        {"estimate": estimate, "steps": steps},
        args,
        f"estimate={estimate} steps={steps}",
    )
    return EXIT_OK


def cmd_reduce_counting(args) -> int:
    h = _load_pattern(args.pattern)
    g = read_graph(args.graph)
    delta, method = bipartite_edge_deviation(
        g, args.p, SamplerSpec(trials=args.trials, seed=args.seed)
    )
    res = counting_lemma_bound(h, g, args.p, delta=delta, delta_method=method)
    if args.json:
        print(json.dumps(res.to_json_dict(), indent=2))
    else:
        for k, diff in enumerate(res.diffs):
            mark = "ok" if res.step_ok[k] else "VIOLATED"
            print(f"step {k + 1} edge {res.added_edges[k]}: |diff|={abs(diff)} "
                  f"bound={res.bound:.6g} {mark}")
        print(f"delta={res.delta_used:.6g} ({res.delta_method}) "
              f"all_ok={res.bound_holds}")
    return EXIT_OK


def cmd_reduce_amplify(args) -> int:
    g = read_graph(args.graph)
    rep = edge_discrepancy(g, args.q, SamplerSpec(trials=args.trials, seed=args.seed))
    res = amplify_discrepancy(
        g,
        args.q,
        rep.witness[0],
        slack=args.slack,
        max_retries=args.max_retries,
        seed=args.seed,
    )
    human = (
        f"certified={res.certified} gap={res.gap} threshold={res.threshold:.6g} "
        f"retries={res.retries} |X|={res.x.size} |Y|={res.y.size}"
    )
    _emit(res.to_json_dict(), args, human)
    return EXIT_OK


def cmd_reduce_powersum(args) -> int:
    g = read_graph(args.graph)
    total = degree_power_discrepancy(g, args.r)
    _emit({"total": total, "r": args.r}, args, f"total={total}")
    return EXIT_OK


def cmd_reduce_trace(args) -> int:
    h = _load_pattern(args.pattern)
    g = read_graph(args.graph)
    trace = main_lemma_trace(h, g, args.p, args.delta or 0.0)
    if args.delta is None:
        trace = trace.with_delta(trace.max_sigma_deviation())
    if args.json:
        print(json.dumps(trace.to_json_dict(), indent=2))
    else:
        print(
            f"total={trace.total} bound_ratio={trace.bound_ratio:.6g} "
            f"sigma_ok={all(trace.sigma_ok)} max_sigma_dev="
            f"{trace.max_sigma_deviation():.6g}"
        )
    return EXIT_OK


# ---------------------------------------------------------------------- parser


def _add_json(p) -> None:
    p.add_argument("--json", action="store_true", help="print JSON instead of text")


def _add_sampler(p, trials: int) -> None:
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasigraph",
        description="quasirandomness measurements and constructions on graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a graph file from a generator recipe")
    p.add_argument("--kind", choices=[k for k in GENERATOR_KINDS if k != "file"],
                   default="erdos_renyi")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--plant-fraction", type=float, default=0.25)
    p.add_argument("--plant-boost", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("count", help="constrained homomorphism count")
    p.add_argument("pattern", help="preset name or pattern file")
    p.add_argument("graph")
    p.add_argument("--constraints", help="constraint file, one line per slot")
    _add_json(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("report", help="full deviation report with figure")
    p.add_argument("pattern")
    p.add_argument("graph")
    p.add_argument("--p", type=float, required=True, help="reference density")
    _add_sampler(p, trials=1000)
    p.add_argument("--output-dir", default="out")
    _add_json(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("experiment", help="run a YAML experiment config")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output-dir", help="override the config's output_dir")
    _add_json(p)
    p.set_defaults(func=cmd_experiment)

    reduce_p = sub.add_parser("reduce", help="run one constructive procedure")
    rsub = reduce_p.add_subparsers(dest="reduce_op", required=True)

    p = rsub.add_parser("bipartition", help="random equitable bipartition expectation")
    p.add_argument("pattern")
    p.add_argument("graph")
    p.add_argument("constraints")
    p.add_argument("-i", type=int, required=True)
    p.add_argument("-j", type=int, required=True)
    _add_sampler(p, trials=200)
    _add_json(p)
    p.set_defaults(func=cmd_reduce_bipartition)

    p = rsub.add_parser("disjointify", help="estimate a count from disjoint tuples")
    p.add_argument("pattern")
    p.add_argument("graph")
    p.add_argument("constraints")
    _add_sampler(p, trials=200)
    _add_json(p)
    p.set_defaults(func=cmd_reduce_disjointify)

    p = rsub.add_parser("counting", help="filtration differences against the bound")
    p.add_argument("pattern")
    p.add_argument("graph")
    p.add_argument("--p", type=float, required=True)
    _add_sampler(p, trials=16)
    _add_json(p)
    p.set_defaults(func=cmd_reduce_counting)

    p = rsub.add_parser("amplify", help="amplify an edge-discrepancy witness")
    p.add_argument("graph")
    p.add_argument("--q", type=float, required=True, help="reference density")
    p.add_argument("--slack", type=float, default=0.02)
    p.add_argument("--max-retries", type=int, default=10)
    _add_sampler(p, trials=16)
    _add_json(p)
    p.set_defaults(func=cmd_reduce_amplify)

    p = rsub.add_parser("powersum", help="degree power-sum discrepancy")
    p.add_argument("graph")
    p.add_argument("-r", type=int, required=True)
    _add_json(p)
    p.set_defaults(func=cmd_reduce_powersum)

    p = rsub.add_parser("trace", help="degree-power trace of one instance")
    p.add_argument("pattern")
    p.add_argument("graph")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--delta", type=float,
                   help="deviation scale; defaults to the trace's own maximum")
    _add_json(p)
    p.set_defaults(func=cmd_reduce_trace)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
