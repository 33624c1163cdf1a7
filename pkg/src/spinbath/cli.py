"""Command-line front end.

Verbs:
    run        one config, one propagator, CSV series out
    compare    reference / candidate / baseline triple over one scenario
    preset     emit the YAML config for a named benchmark scenario
    plot-data  pull named columns out of a series CSV for external plotting

Exit codes: 0 success, 2 configuration problems, 3 numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace

from .config import csv_text, load_config, emit_config, write_csv
from .errors import ConfigError, NumericError
from .experiments import (SCENARIOS, benchmark_compare, comparison_table,
                          run_experiment, scenario_config)


def _apply_overrides(config, args):
    if getattr(args, "seed_override", None) is not None:
        config = replace(config, seed=args.seed_override)
    if getattr(args, "threads", None) is not None:
        config = replace(config, threads=args.threads)
    return config


def _report_lines(report) -> list:
    echo = report.config_echo
    eps = echo["propagator"]["epsilon"]
    lines = [
        f"method: {report.method}"
        + ("" if report.method == "trotter" else f" (epsilon {eps:g})"),
        f"records: {len(report.records)}   t_max: {echo['t_max']:g}",
    ]
    ops = report.op_counts
    if "g_applications" in ops:
        lines.append(f"ops: {ops['g_applications']} G-applications x "
                     f"{ops['hamiltonian_terms']} terms")
    else:
        lines.append(f"ops: {ops['term_exponentials']} term exponentials "
                     f"({ops['trotter_steps']} steps)")
    lines.append(f"max norm drift: {report.max_norm_drift:.3e}")
    lines.append(f"setup {report.setup_seconds:.3f} s, "
                 f"propagation {report.propagation_seconds:.3f} s, "
                 f"observables {report.observable_seconds:.3f} s")
    if report.fitted_frequency is not None:
        lines.append(f"fitted frequency: {report.fitted_frequency:.6g}")
    if report.burst_amplitudes:
        amps = ", ".join(f"{a:.4f}" for a in report.burst_amplitudes)
        lines.append(f"burst amplitudes: {amps}")
    return lines


def _cmd_run(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    report = run_experiment(config)
    out = args.out or config.output
    if out:
        write_csv(report.records, out)
        for line in _report_lines(report):
            print(line)
        print(f"series -> {out}")
    else:
        # keep stdout clean CSV so the series can be piped
        for line in _report_lines(report):
            print(line, file=sys.stderr)
        sys.stdout.write(csv_text(report.records))
    return 0


def _cmd_compare(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    result = benchmark_compare(config)
    sys.stdout.write(comparison_table(result))
    if args.out_dir:
        import os
        os.makedirs(args.out_dir, exist_ok=True)
        for label, report in (("reference", result.reference),
                              ("candidate", result.candidate),
                              ("baseline", result.baseline)):
            write_csv(report.records, os.path.join(args.out_dir, f"{label}.csv"))
        with open(os.path.join(args.out_dir, "comparison.txt"), "w",
                  encoding="utf-8") as f:
            f.write(comparison_table(result))
        print(f"series + table -> {args.out_dir}")
    return 0


def _cmd_preset(args) -> int:
    if args.list or args.name is None:
        for name in sorted(SCENARIOS):
            preset, dt, sched = SCENARIOS[name]
            print(f"{name:<15} {preset:<12} dt={dt:<6g} {sched['kind']}")
        return 0
    config = scenario_config(args.name, bath_spins=args.bath_spins,
                             seed=args.seed, epsilon=args.epsilon)
    if args.threads is not None:
        config = replace(config, threads=args.threads)
    text = emit_config(config)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
        print(f"config -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_plot_data(args) -> int:
    with open(args.series, "r", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ConfigError(f"{args.series}: empty CSV")
    header = rows[0]
    wanted = [c.strip() for c in args.columns.split(",") if c.strip()]
    missing = [c for c in wanted if c not in header]
    if missing:
        raise ConfigError(f"{args.series}: no such columns {missing} "
                          f"(have {header})")
    pick = [header.index(c) for c in wanted]
    out = io.StringIO()
    out.write("# " + " ".join(wanted) + "\n")
    for row in rows[1:]:
        out.write(" ".join(row[i] for i in pick) + "\n")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(out.getvalue())
        print(f"plot data -> {args.out}")
    else:
        sys.stdout.write(out.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbath",
        description="Central-spin decoherence runs: Chebyshev leaps vs "
                    "Trotter stepping.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one config and emit its series")
    run.add_argument("--config", required=True, help="YAML config path")
    run.add_argument("--out", default="", help="series CSV path "
                     "(default: config output field, else stdout)")
    run.add_argument("--seed-override", type=int, default=None)
    run.add_argument("--threads", type=int, default=None)
    run.set_defaults(handler=_cmd_run)

    comp = sub.add_parser("compare",
                          help="triple run: reference, candidate, baseline")
    comp.add_argument("--config", required=True, help="YAML config path")
    comp.add_argument("--out-dir", default="",
                      help="directory for the three series and the table")
    comp.add_argument("--seed-override", type=int, default=None)
    comp.add_argument("--threads", type=int, default=None)
    comp.set_defaults(handler=_cmd_compare)

    pre = sub.add_parser("preset", help="emit a named scenario config")
    pre.add_argument("name", nargs="?", default=None,
                     help="scenario name; omit with --list to enumerate")
    pre.add_argument("--list", action="store_true", help="list scenario names")
    pre.add_argument("--bath-spins", type=int, default=16)
    pre.add_argument("--seed", type=int, default=7)
    pre.add_argument("--epsilon", type=float, default=1e-6)
    pre.add_argument("--threads", type=int, default=None)
    pre.add_argument("--out", default="", help="write YAML here instead of stdout")
    pre.set_defaults(handler=_cmd_preset)

    plot = sub.add_parser("plot-data",
                          help="extract columns from a series CSV")
    plot.add_argument("series", help="series CSV path")
    plot.add_argument("--columns", default="time,sz1",
                      help="comma-separated column names")
    plot.add_argument("--out", default="", help="write here instead of stdout")
    plot.set_defaults(handler=_cmd_plot_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
