"""Command-line surface.

Every subcommand emits a table (CSV: header plus rows; JSON: list of
objects with the same columns and numerically identical values). Floats
are printed with 6 significant digits, switching to exponential notation
at |x| >= 1e5 or < 1e-3; non-finite values appear as "inf"/"nan" strings
in both formats. Randomized subcommands take --seed (default 0, never
wall-clock entropy), so identical invocations produce byte-identical
output. QCC_THREADS caps worker parallelism, QCC_BACKEND picks the
sampling kernel backend.

Exit codes: 0 success, 1 validation error, 2 domain error (infeasible
constraint, degenerate statistics).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import analytic, blindbox, datasets, events, idealref, montecarlo, optimize
from .errors import QCouponError
from .model import ChannelParams, CouponInstance

__all__ = ["main", "dispatch", "build_parser"]

_MAX_SESSION_PLAYS = 100_000


class _CliError(Exception):
    """Argument / validation failure carrying the message to print."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map to exit 1
        raise _CliError(f"{self.prog}: {message}")


def fmt_num(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"
    if abs(x) >= 1e5 or abs(x) < 1e-3:
        return f"{x:.5e}"
    return f"{x:.6g}"


def _json_cell(value):
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    text = fmt_num(value)
    if text in ("inf", "-inf", "nan"):
        return text
    return float(text)


def _emit(columns: Sequence[str], rows: Sequence[Sequence], fmt: str, out: Optional[str]) -> None:
    if fmt == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(str(v) if isinstance(v, str) else fmt_num(v) for v in row))
        text = "\n".join(lines) + "\n"
    else:
        objs = [
            {col: _json_cell(v) for col, v in zip(columns, row)}
            for row in rows
        ]
        text = json.dumps(objs, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _params(args) -> ChannelParams:
    return ChannelParams(eta=args.eta, dark_rate=args.dark, visibility=args.vis)


def _add_params(parser) -> None:
    parser.add_argument("--eta", type=float, default=1.0, help="channel x detector transmittance")
    parser.add_argument("--dark", type=float, default=0.0, help="dark-count probability per gate")
    parser.add_argument("--vis", type=float, default=1.0, help="interferometer visibility")


def _add_output(parser, default_format="json") -> None:
    parser.add_argument("--format", choices=("csv", "json"), default=default_format)
    parser.add_argument("--out", default=None, help="output path (default stdout)")


def _parse_missing(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise _CliError(f"cannot parse index list {text!r}")
    if not values:
        raise _CliError("index list is empty")
    return values


def _instance(args) -> CouponInstance:
    if getattr(args, "missing", None):
        return CouponInstance.from_missing(args.n, _parse_missing(args.missing))
    m = getattr(args, "m", None)
    if m is None:
        raise _CliError("provide --missing or --m")
    # canonical default: the m highest indices are missing
    return CouponInstance.from_missing(args.n, range(args.n - m + 1, args.n + 1))


def _parse_span(text: str, what: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 3:
        raise _CliError(f"{what} must look like start:stop:step, got {text!r}")
    return parts


def _cmd_analyze(args) -> None:
    params = _params(args)
    stats = analytic.protocol_stats(params, args.intensity, args.n, args.m)
    k = args.n - args.m
    columns = [
        "n", "m", "intensity", "p_click_plus", "p_click_minus",
        "efficiency", "correct_prob", "success_prob", "quantum_samples",
        "classical_limit", "classical_expected",
    ]
    row = [
        args.n, args.m, args.intensity, stats.p_click_plus, stats.p_click_minus,
        stats.efficiency, stats.correct_prob, stats.success_prob, stats.quantum_samples,
        analytic.classical_limit(k), analytic.classical_expected(k),
    ]
    _emit(columns, [row], args.format, args.out)


def _cmd_sweep(args) -> None:
    points = optimize.sweep_intensity(
        _params(args), args.n, args.m, args.imin, args.imax, args.steps
    )
    columns = ["intensity", "efficiency", "correct_prob", "success_prob", "quantum_samples"]
    rows = [
        [p.intensity, p.efficiency, p.correct_prob, p.success_prob, p.quantum_samples]
        for p in points
    ]
    _emit(columns, rows, args.format, args.out)


def _cmd_optimize(args) -> None:
    grid = optimize.DEFAULT_GRID
    if args.grid:
        lo, hi, pts = _parse_span(args.grid, "--grid")
        grid = (float(lo), float(hi), int(pts))
    intensity, samples = optimize.optimal_intensity(
        _params(args), args.n, args.m, args.constraint, grid
    )
    stats = analytic.protocol_stats(_params(args), intensity, args.n, args.m)
    columns = ["n", "m", "constraint", "intensity", "quantum_samples",
               "correct_prob", "success_prob"]
    row = [args.n, args.m, args.constraint, intensity, samples,
           stats.correct_prob, stats.success_prob]
    _emit(columns, [row], args.format, args.out)


def _cmd_crossover(args) -> None:
    lo, hi, step = (int(v) for v in _parse_span(args.grid, "--grid"))
    if step <= 0 or hi < lo:
        raise _CliError(f"bad --grid range {args.grid!r}")
    n_grid = list(range(lo, hi + 1, step))
    report = optimize.crossover(_params(args), args.m, args.constraint, n_grid)
    columns = ["n", "intensity", "quantum_samples", "classical_samples",
               "feasible", "below_classical", "below_half"]
    rows = []
    for n, intensity, q, c in zip(
        report.n_values, report.chosen_intensity, report.quantum_cost, report.classical_cost
    ):
        rows.append([
            n,
            intensity,
            q,
            c,
            not math.isinf(q),
            q < c,
            q < c / 2.0,
        ])
    _emit(columns, rows, args.format, args.out)
    print(
        f"crossover_n={report.crossover_n} half_cost_n={report.half_cost_n}",
        file=sys.stderr,
    )


def _cmd_simulate(args) -> None:
    instance = _instance(args)
    stats = montecarlo.run_batch(
        args.seed, instance, _params(args), args.intensity, args.periods, args.threads
    )
    columns = ["n", "m", "intensity", "seed", "periods", "accepted", "correct",
               "efficiency_hat", "correct_hat", "success_hat", "quantum_samples_hat"]
    row = [instance.n, instance.m, args.intensity, args.seed, stats.periods,
           stats.accepted, stats.correct, stats.efficiency_hat, stats.correct_hat,
           stats.success_hat, stats.quantum_samples_hat]
    _emit(columns, [row], args.format, args.out)


def _cmd_classical(args) -> None:
    if args.budget is not None:
        p_hat = montecarlo.classical_success_within(
            args.seed, args.k, args.budget, args.runs, args.threads
        )
        lo, hi = montecarlo.wilson_interval(round(p_hat * args.runs), args.runs)
        columns = ["k", "runs", "budget", "success_prob", "wilson_low", "wilson_high"]
        row = [args.k, args.runs, args.budget, p_hat, lo, hi]
    else:
        draws = montecarlo.classical_collector_batch(args.seed, args.k, args.runs, args.threads)
        columns = ["k", "runs", "mean_draws", "expected_draws", "min_draws", "max_draws"]
        row = [args.k, args.runs, float(draws.mean()), analytic.classical_expected(args.k),
               int(draws.min()), int(draws.max())]
    _emit(columns, [row], args.format, args.out)


def _cmd_ideal(args) -> None:
    instance = _instance(args)
    dist = idealref.ideal_distribution(instance)
    sample = idealref.sample_ideal_measurements(args.seed, instance, args.samples)
    mean_copies = None
    if args.runs > 0:
        total = 0
        for r in range(args.runs):
            total += idealref.simulate_ideal_learning(args.seed + r, instance)
        mean_copies = total / args.runs
    columns = ["index", "conditional", "conditional_hat", "p_outcome2",
               "outcome2_freq", "mean_copies"]
    rows = []
    for index in instance.missing_sorted():
        rows.append([
            index,
            float(dist.per_index_conditional[index]),
            sample.conditional_freq(index),
            float(dist.p_outcome2),
            sample.outcome2_freq,
            math.nan if mean_copies is None else mean_copies,
        ])
    _emit(columns, rows, args.format, args.out)


def _cmd_table1(args) -> None:
    if args.counts:
        entries = events.load_counts(args.counts)
    else:
        entries = datasets.table1_counts()
    rows_out = []
    for row in events.table_report(entries):
        rows_out.append([
            row.input_size,
            row.per_pulse_intensity,
            row.total_coupons,
            "" if row.detection_events is None else row.detection_events,
            row.single_clicks,
            row.correct_clicks,
            events.printed_percent(row.correct_prob),
            events.printed_percent(row.efficiency),
            events.printed_percent(row.success_prob),
            events.printed_3sf(row.classical_samples),
            events.printed_3sf(row.quantum_samples),
        ])
    columns = ["L", "mu", "total_coupons", "detection_events", "single_clicks",
               "correct_clicks", "correct_prob_pct", "efficiency_pct",
               "success_prob_pct", "classical_samples", "quantum_samples"]
    _emit(columns, rows_out, args.format, args.out)


def _leak_profile(args) -> events.LeakageProfile:
    segments = ()
    if args.leak_segments:
        parsed = []
        for chunk in args.leak_segments.split(","):
            parts = chunk.split(":")
            if len(parts) != 3:
                raise _CliError(f"bad segment {chunk!r}, expected start:end:weight")
            parsed.append((float(parts[0]), float(parts[1]), float(parts[2])))
        segments = tuple(parsed)
    return events.LeakageProfile(leak_prob=args.leak_prob, segments=segments)


def _cmd_gen_events(args) -> None:
    instance = _instance(args)
    records = events.generate_synthetic(
        args.seed,
        instance,
        _params(args),
        args.intensity,
        args.periods,
        _leak_profile(args),
        bin_duration=args.bin_duration,
    )
    events.export(records, args.out)
    print(f"wrote {len(records)} events to {args.out}", file=sys.stderr)


def _cmd_window_search(args) -> None:
    instance = _instance(args)
    missing = instance.missing_sorted()
    records = events.ingest(args.events, n=instance.n, bin_duration=args.bin_duration)
    window, cost = events.window_search(
        records,
        instance.n,
        missing,
        args.intensity,
        constraint=args.constraint,
        grid_step=args.grid_step,
        periods=args.periods,
        bin_duration=args.bin_duration,
    )
    stats = events.apply_window(
        records, window, instance.n, missing,
        periods=args.periods, bin_duration=args.bin_duration,
    )
    columns = ["start_ps", "end_ps", "quantum_samples_est", "periods", "accepted",
               "correct", "efficiency_hat", "correct_hat", "success_hat"]
    row = [window.start_ps, window.end_ps, cost, stats.periods, stats.accepted,
           stats.correct, stats.efficiency_hat, stats.correct_hat, stats.success_hat]
    _emit(columns, [row], args.format, args.out)


def _cmd_blindbox_sim(args) -> None:
    params = _params(args)
    config = blindbox.GameConfig(n=args.n, m=args.m, params=params)
    expected = blindbox.expected_quantum_resources(params, args.n, args.m, args.intensity)
    spends = []
    plays_counts = []
    for s in range(args.sessions):
        session = blindbox.new_session(args.seed + s, config)
        for _ in range(_MAX_SESSION_PLAYS):
            outcome = blindbox.play(session, args.intensity)
            if outcome.correct:
                break
        else:
            raise QCouponError(
                f"no correct pattern within {_MAX_SESSION_PLAYS} plays; "
                "success probability too small for this intensity"
            )
        blindbox.guess(session, session.hidden_missing)
        spends.append(session.spent)
        plays_counts.append(len(session.plays))
    mean_spend = sum(spends) / len(spends)
    reward = config.reward
    columns = ["n", "m", "intensity", "sessions", "price_per_play",
               "expected_spend", "mean_spend", "mean_plays", "reward", "mean_net"]
    row = [args.n, args.m, args.intensity, args.sessions,
           blindbox.price(args.n, args.intensity), expected, mean_spend,
           sum(plays_counts) / len(plays_counts), reward, reward - mean_spend]
    _emit(columns, [row], args.format, args.out)


def _cmd_serve(args) -> None:
    from .service import make_server

    server = make_server(
        host=args.host,
        port=args.port,
        journal_path=args.journal,
        cors_origin=args.cors_origin,
    )
    host, port = server.server_address[:2]
    print(f"serving blind-box games on http://{host}:{port}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def build_parser() -> _Parser:
    parser = _Parser(prog="qcoupon", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="closed-form statistics at one operating point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--intensity", type=float, required=True)
    _add_params(p)
    _add_output(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("sweep", help="statistics over a uniform intensity grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--imin", type=float, required=True)
    p.add_argument("--imax", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    _add_params(p)
    _add_output(p, default_format="csv")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("optimize", help="constrained minimum-cost intensity")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--constraint", type=float, default=0.0,
                   help="correct-probability floor in [0,1)")
    p.add_argument("--grid", default=None, help="scan grid lo:hi:points")
    _add_params(p)
    _add_output(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("crossover", help="quantum vs classical cost over universe sizes")
    p.add_argument("--grid", required=True, help="universe sizes start:stop:step")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--constraint", type=float, default=0.9)
    _add_params(p)
    _add_output(p, default_format="csv")
    p.set_defaults(func=_cmd_crossover)

    p = sub.add_parser("simulate", help="trial-level Monte Carlo batch")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--missing", default=None, help="comma-separated missing indices")
    p.add_argument("--intensity", type=float, required=True)
    p.add_argument("--periods", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    _add_params(p)
    _add_output(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("classical", help="classical coupon collector sampling")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--budget", type=int, default=None,
                   help="report completion probability within this many draws")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    _add_output(p)
    p.set_defaults(func=_cmd_classical)

    p = sub.add_parser("ideal", help="projective-measurement reference sampling")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--missing", default=None)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--runs", type=int, default=0, help="learning runs for mean copies")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    p.set_defaults(func=_cmd_ideal)

    p = sub.add_parser("table1", help="summary table from raw run counts")
    p.add_argument("--counts", default=None, help="counts CSV (default: packaged data)")
    _add_output(p, default_format="csv")
    p.set_defaults(func=_cmd_table1)

    p = sub.add_parser("gen-events", help="synthetic time-tagged event generator")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--missing", default=None)
    p.add_argument("--intensity", type=float, required=True)
    p.add_argument("--periods", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--leak-prob", type=float, default=0.0)
    p.add_argument("--leak-segments", default=None,
                   help="piecewise density start:end:weight[,start:end:weight...]")
    p.add_argument("--bin-duration", type=float, default=events.BIN_DURATION_PS)
    p.add_argument("--out", required=True)
    _add_params(p)
    p.set_defaults(func=_cmd_gen_events)

    p = sub.add_parser("window-search", help="optimal counting window for an event file")
    p.add_argument("--events", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--missing", default=None)
    p.add_argument("--intensity", type=float, required=True)
    p.add_argument("--constraint", type=float, default=0.9)
    p.add_argument("--grid-step", type=float, default=30.0)
    p.add_argument("--periods", type=int, default=None)
    p.add_argument("--bin-duration", type=float, default=events.BIN_DURATION_PS)
    _add_output(p)
    p.set_defaults(func=_cmd_window_search)

    p = sub.add_parser("blindbox-sim", help="blind-box economics simulation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--intensity", type=float, required=True)
    p.add_argument("--sessions", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    _add_params(p)
    _add_output(p)
    p.set_defaults(func=_cmd_blindbox_sim)

    p = sub.add_parser("serve", help="run the blind-box game HTTP service")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--journal", default=None, help="append-only JSONL journal path")
    p.add_argument("--cors-origin", default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _CliError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    try:
        args.func(args)
    except _CliError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except QCouponError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    raise SystemExit(dispatch())
