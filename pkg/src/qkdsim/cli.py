"""Command-line front-end: run, sweep, trace, and noise-budget subcommands.

Outputs are CSV files (dot decimal separator, `\\n` line endings, header
always present) plus a human-readable summary on stdout; sweep and trace
can additionally render a figure with --plot. Exit codes: 0 success,
2 usage/configuration error, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import sys

from . import analysis, engine
from .config import CliConfig, load_config
from .engine import Receiver, RunStats, TraceRecord
from .errors import ConfigError
from .homodyne import noise_budget
from .protocol import Verdict

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _format_cell(value) -> str:
    # repr keeps full float precision and is locale-independent; the float()
    # coercion strips numpy scalar wrappers
    return repr(float(value)) if isinstance(value, float) else str(value)


def _stats_row(stats: RunStats) -> list[str]:
    return [_format_cell(v) for v in stats.as_row()]


def _print_summary(cfg: CliConfig, stats: RunStats) -> None:
    print(f"receiver:            {cfg.run.receiver.value}")
    print(f"symbols sent:        {stats.sent}")
    print(f"detected:            {stats.detected}")
    print(f"sifted:              {stats.sifted}")
    print(f"errors:              {stats.errors}")
    print(f"discarded (basis):   {stats.discarded_basis}")
    print(f"discarded (no det.): {stats.discarded_no_detection}")
    print(f"discarded (double):  {stats.discarded_ambiguous}")
    print(f"QBER:                {stats.qber:.6g}")
    print(f"raw rate:            {stats.raw_detection_rate_hz:.6g} Hz")
    print(f"sifted key rate:     {stats.sifted_key_rate_hz:.6g} Hz")


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.set)
    out_path = args.out or cfg.output_csv
    if cfg.trace:
        stats, records = engine.run(cfg.run, trace=True)
        _write_trace_csv(cfg.run.receiver, records, args.trace_out or cfg.trace_csv)
    else:
        stats = engine.run(cfg.run)
    _write_csv(out_path, list(RunStats.FIELDS), [_stats_row(stats)])
    _print_summary(cfg, stats)
    print(f"stats written to {out_path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.set)
    values = [v for v in (s.strip() for s in args.values.split(",")) if v]
    if not values:
        raise ConfigError("sweep needs at least one value")
    try:
        numeric = [float(v) for v in values]
    except ValueError as err:
        raise ConfigError(f"sweep values must be numeric: {err}") from err

    workers = engine.sweep_workers_from_env()
    table = engine.sweep(cfg.run, args.param, numeric, max_workers=workers)

    header = [args.param, "qber", "qber_ci_low", "qber_ci_high",
              "raw_hz", "sifted_hz", "z_score_vs_theory"]
    rows = []
    plot_cols = {"qber": [], "lo": [], "hi": [], "pred": []}
    for i, (value, stats) in enumerate(table):
        run_cfg = engine.set_parameter(cfg.run, args.param, value)
        predicted = analysis.predicted_qber(run_cfg)
        if stats.sifted > 0:
            lo, hi = analysis.wilson_interval(stats.errors, stats.sifted, 0.95)
            z = analysis.compare(predicted, stats.errors, stats.sifted)
        else:
            lo = hi = z = float("nan")
        rows.append([_format_cell(v) for v in
                     (float(value), stats.qber, lo, hi,
                      stats.raw_detection_rate_hz, stats.sifted_key_rate_hz, z)])
        plot_cols["qber"].append(stats.qber)
        plot_cols["lo"].append(lo)
        plot_cols["hi"].append(hi)
        plot_cols["pred"].append(predicted)

    out_path = args.out or cfg.sweep_csv
    _write_csv(out_path, header, rows)
    print(f"swept {args.param} over {len(numeric)} values; table written to {out_path}")
    if args.plot:
        from . import plotting

        plotting.save_sweep_figure(
            args.param, numeric, plot_cols["qber"], plot_cols["lo"],
            plot_cols["hi"], plot_cols["pred"], args.plot,
        )
        print(f"figure written to {args.plot}")
    return EXIT_OK


def _trace_header(receiver: Receiver) -> list[str]:
    if receiver is Receiver.HOMODYNE:
        return ["index", "alice_bit", "basis_match", "sample"]
    return ["index", "alice_bit", "basis_match", "click1", "click2"]


def _trace_row(receiver: Receiver, rec: TraceRecord) -> list[str]:
    match = int(rec.basis_match)
    if receiver is Receiver.HOMODYNE:
        return [str(rec.index), str(rec.alice_bit.value), str(match),
                _format_cell(rec.homodyne_sample)]
    verdict = rec.outcome.verdict
    click1 = int(verdict is Verdict.AMBIGUOUS or (
        verdict is Verdict.BIT and rec.outcome.bit.value == 0))
    click2 = int(verdict is Verdict.AMBIGUOUS or (
        verdict is Verdict.BIT and rec.outcome.bit.value == 1))
    return [str(rec.index), str(rec.alice_bit.value), str(match),
            str(click1), str(click2)]


def _write_trace_csv(receiver: Receiver, records: list[TraceRecord], path: str) -> None:
    _write_csv(path, _trace_header(receiver),
               [_trace_row(receiver, rec) for rec in records])


def cmd_trace(args) -> int:
    cfg = load_config(args.config, args.set)
    if args.n < 0:
        raise ConfigError(f"trace length must be >= 0, got {args.n}")
    if args.n > cfg.run.n_symbols:
        raise ConfigError(
            f"trace length {args.n} exceeds n_symbols {cfg.run.n_symbols}"
        )
    _, records = engine.run(cfg.run, trace=True, trace_limit=args.n)
    out_path = args.out or cfg.trace_csv
    _write_trace_csv(cfg.run.receiver, records, out_path)
    print(f"{len(records)} trace rows written to {out_path}")
    if args.plot:
        from . import plotting

        plotting.save_trace_figure(records, args.plot)
        print(f"figure written to {args.plot}")
    return EXIT_OK


def cmd_noise_budget(args) -> int:
    if args.current_a <= 0 or args.temperature_k <= 0 or args.load_ohm <= 0:
        raise ConfigError("current, temperature and load must all be positive")
    budget = noise_budget(args.current_a, args.temperature_k, args.load_ohm)
    print(f"thermal: {budget.thermal_psd_dbm_per_hz:.2f} dBm/Hz")
    print(f"shot:    {budget.shot_psd_dbm_per_hz:.2f} dBm/Hz")
    print(f"margin:  {budget.margin_db:.2f} dB")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdsim",
        description="Monte Carlo BB84/QPSK link simulator with photon-counting "
        "and balanced homodyne receivers.",
        epilog="QKDSIM_THREADS caps sweep parallelism (unset = sequential). "
        "All CSV output uses dot decimals, \\n line endings, and a header row.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_opts(p):
        p.add_argument("config", help="flat key=value config file")
        p.add_argument(
            "--set", action="append", default=[], metavar="KEY=VALUE",
            help="override one config entry (repeatable)",
        )

    p_run = sub.add_parser(
        "run",
        help="simulate one run and write its stats row",
        epilog="CSV columns: " + ", ".join(RunStats.FIELDS),
    )
    add_config_opts(p_run)
    p_run.add_argument("--out", help="stats CSV path (default from config)")
    p_run.add_argument("--trace-out", help="trace CSV path when trace=true")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser(
        "sweep",
        help="run once per value of one parameter",
        epilog="CSV columns: <param>, qber, qber_ci_low, qber_ci_high, raw_hz, "
        "sifted_hz, z_score_vs_theory (95% Wilson interval; z against the "
        "closed-form QBER).",
    )
    add_config_opts(p_sweep)
    p_sweep.add_argument(
        "--param", required=True,
        help="parameter to sweep; one of: " + ", ".join(engine.SWEEPABLE_PARAMETERS),
    )
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated numeric values")
    p_sweep.add_argument("--out", help="table CSV path (default from config)")
    p_sweep.add_argument("--plot", help="also render the QBER curve to this file")
    p_sweep.set_defaults(func=cmd_sweep)

    p_trace = sub.add_parser(
        "trace",
        help="write per-symbol records",
        epilog="CSV columns: index, alice_bit, basis_match, sample (homodyne) "
        "or index, alice_bit, basis_match, click1, click2 (photon counting); "
        "basis_match=0 rows are the discarded anti-coincidences.",
    )
    add_config_opts(p_trace)
    p_trace.add_argument("-n", type=int, required=True, help="number of data rows")
    p_trace.add_argument("--out", help="trace CSV path (default from config)")
    p_trace.add_argument("--plot", help="also render the pulse picture to this file")
    p_trace.set_defaults(func=cmd_trace)

    p_budget = sub.add_parser(
        "noise-budget", help="print thermal/shot noise PSDs and their margin"
    )
    p_budget.add_argument("current_a", type=float, help="mean photocurrent [A]")
    p_budget.add_argument("temperature_k", type=float, help="temperature [K]")
    p_budget.add_argument("load_ohm", type=float, help="load resistance [ohm]")
    p_budget.set_defaults(func=cmd_noise_budget)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as err:  # noqa: BLE001 - last-resort CLI boundary
        print(f"internal error: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
