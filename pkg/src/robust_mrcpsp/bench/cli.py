"""Command-line entry point: solve, sweep, report, oracle, export-lp."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def _load_instance(path: str, deviation_factor: str | None):
    from ..psplib import PsplibFormatError, apply_deviation_rule, from_json, read_mm

    p = Path(path)
    try:
        if p.suffix == ".json":
            inst = from_json(p.read_text())
            if deviation_factor is not None:
                inst = apply_deviation_rule(inst, Fraction(deviation_factor))
            return inst
        inst = read_mm(p)
    except (OSError, PsplibFormatError, ValueError, KeyError) as exc:
        raise SystemExit(_fail(f"cannot load {path}: {exc}"))
    return apply_deviation_rule(inst, Fraction(deviation_factor if deviation_factor is not None else "0.7"))


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_CONFIG


def cmd_solve(args) -> int:
    from ..benders import run_benders, trace_to_csv
    from ..compact import solve_compact, solution_to_json
    from ..milp import BackendUnavailable, make_backend

    inst = _load_instance(args.instance, args.deviation_factor)
    try:
        backend = make_backend(args.backend)
    except BackendUnavailable as exc:
        return _fail(str(exc))
    if args.method == "compact":
        first, worst, out = solve_compact(inst, args.gamma, backend, time_limit=args.time_limit)
        status, extra = out.status, {"bound": out.best_bound}
    else:
        first, worst, state = run_benders(inst, args.gamma, backend, time_limit=args.time_limit)
        status, extra = state.status, {"lower_bound": state.lb, "iterations": state.completed_iterations}
        if args.trace:
            Path(args.trace).write_text(trace_to_csv(state))
    if worst is None:
        print(json.dumps({"instance": inst.name, "gamma": args.gamma, "method": args.method, "status": status}, indent=2))
        return EXIT_PARTIAL
    sys.stdout.write(solution_to_json(inst, first, worst, gamma=args.gamma, method=args.method, status=status, **extra))
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .experiment import ConfigError, load_config, run_experiment

    try:
        cfg = load_config(args.config)
        if args.output:
            cfg.output = Path(args.output)
        if args.workers:
            cfg.workers = args.workers

        def progress(rec):
            print(f"{rec.instance},{rec.method},{rec.gamma},{rec.status},{rec.objective},{rec.seconds:.2f}", flush=True)

        records = run_experiment(cfg, progress=None if args.quiet else progress)
    except ConfigError as exc:
        return _fail(str(exc))
    failed = [r for r in records if r.status == "error"]
    print(f"{len(records)} new records written to {cfg.output}; {len(failed)} errored", file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_report(args) -> int:
    from .analysis import gap_curve, monotonicity, objective_means, performance_profile, rows_to_csv, summarize
    from .records import read_records

    try:
        records = read_records(args.results)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    if not records:
        return _fail(f"{args.results} holds no records")
    out = Path(args.out_dir or Path(args.results).parent)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str, text: str):
        (out / name).write_text(text)
        written.append(out / name)

    emit("summary.csv", rows_to_csv(summarize(records)))
    means = objective_means(records)
    emit("objective_means.csv", rows_to_csv(means))
    emit("monotonicity.csv", rows_to_csv(monotonicity(records)))
    gaps = gap_curve(records)
    emit("gap_curve.csv", rows_to_csv(gaps))
    profile = None
    if len({r.method for r in records}) >= 2:
        profile = performance_profile(records, args.ratio_cap)
        emit("profile.csv", rows_to_csv(profile))
    if not args.no_plots:
        from . import plots

        written.append(plots.plot_gap_curve(gaps, out / "gap_curve.png"))
        written.append(plots.plot_objective_means(means, out / "objective_means.png"))
        if profile is not None:
            written.append(plots.plot_profile(profile, out / "profile.png"))
    for p in written:
        print(p)
    return EXIT_OK


def cmd_oracle(args) -> int:
    from ..oracle import OracleLimitError, brute_force_solve, example_instance

    inst = example_instance() if args.instance == "example" else _load_instance(args.instance, args.deviation_factor)
    try:
        res = brute_force_solve(inst, args.gamma)
    except OracleLimitError as exc:
        return _fail(str(exc))
    print(
        json.dumps(
            {
                "instance": inst.name,
                "gamma": args.gamma,
                "worst_case_makespan": res.makespan,
                "modes": [m + 1 for m in res.modes],
                "selection": sorted(list(p) for p in res.selection),
            },
            indent=2,
        )
    )
    return EXIT_OK


def cmd_export_lp(args) -> int:
    from ..benders import build_master
    from ..compact import build_compact
    from ..milp import write_lp

    inst = _load_instance(args.instance, args.deviation_factor)
    if args.model == "compact":
        form = build_compact(inst, args.gamma, reduce=not args.full)
    else:
        form = build_master(inst, reduce=not args.full)
    text = write_lp(form.model)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-mrcpsp", description="Robust multi-mode project scheduling under budgeted duration uncertainty.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def instance_args(p):
        p.add_argument("instance", help="PSPLIB .mm file or instance .json")
        p.add_argument("--deviation-factor", default=None, help="deviation = floor(factor * nominal); default 0.7 for .mm files, none for .json")

    p = sub.add_parser("solve", help="solve one instance and print the solution as JSON")
    instance_args(p)
    p.add_argument("-g", "--gamma", type=int, default=0)
    p.add_argument("-m", "--method", choices=("compact", "benders"), default="compact")
    p.add_argument("-b", "--backend", default="highs", help="highs or bnb")
    p.add_argument("-t", "--time-limit", type=float, default=7200.0)
    p.add_argument("--trace", help="write the Benders iteration trace CSV here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run an experiment described by a key=value config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="results CSV (overrides the config)")
    p.add_argument("-j", "--workers", type=int, default=0)
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summaries, profiles and gap curves from a results CSV")
    p.add_argument("results")
    p.add_argument("-d", "--out-dir")
    p.add_argument("--ratio-cap", type=float, default=None)
    p.add_argument("--no-plots", action="store_true", help="CSV only")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("oracle", help="exact brute-force optimum for tiny instances ('example' for the built-in one)")
    instance_args(p)
    p.add_argument("-g", "--gamma", type=int, default=0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("export-lp", help="write the compact or master model in LP format")
    instance_args(p)
    p.add_argument("-g", "--gamma", type=int, default=0)
    p.add_argument("--model", choices=("compact", "master"), default="compact")
    p.add_argument("--full", action="store_true", help="keep rows and variables fixed by the project network")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_lp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
