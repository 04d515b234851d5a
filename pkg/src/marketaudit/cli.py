"""Command-line front door: synthesize data, manage the split ledger, audit
prediction sets, and simulate trading on them.

Exit codes: 0 clean, 1 usage or IO error, 2 audit blockers (or exhausted
evaluation data). The audit always writes report.json before exiting, so
findings are never lost to the exit path.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .audit import AuditReport, run_audit
from .config import config_dict, default_config, load_config
from .errors import (
    ExhaustedDatasets,
    InvalidParam,
    LedgerMismatch,
    LengthMismatch,
    MarketAuditError,
)
from .ledger import content_digest, ledger_lock, load_ledger, make_ledger, save_ledger
from .market_data import PriceSeries, gen_random_walk, gen_trend_sine, parse_price_csv, write_price_csv
from .models import MOVEMENT, PRICE, SCALED, SPACES, PredictionSet, read_prediction_csv, write_prediction_csv
from .simulator import signals_from_predictions, simulate, summary_metrics, write_trade_log_csv

REPORT_BASENAME = "report.json"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad usage; this CLI reserves 2 for
    audit blockers, so usage problems are rethrown and mapped to 1."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def build_report_document(report: AuditReport, simulation: dict | None, config_echo: dict | None = None) -> dict:
    """Assemble the full report JSON document."""
    if config_echo is None:
        config_echo = {"thresholds": dict(report.config_echo)}
    return {
        "version": __version__,
        "input_digests": dict(report.input_digests),
        "config_echo": config_echo,
        "findings": [f.to_dict() for f in report.findings],
        "simulation": simulation,
    }


def render_report(document: dict, fmt: str = "text") -> str:
    """Render a report document; byte-identical for identical documents."""
    if fmt == "json":
        return json.dumps(document, indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise InvalidParam(f"format must be text or json, got {fmt!r}")
    lines = [f"{'SEVERITY':<9} {'CHECK':<21} {'SECTION':<8} MESSAGE"]
    for finding in document.get("findings", []):
        lines.append(
            f"{finding['severity'].upper():<9} {finding['check_id']:<21} "
            f"{finding['paper_section']:<8} {finding['message']}"
        )
    simulation = document.get("simulation")
    if simulation is None:
        lines.append("simulation: not run")
    else:
        hit = simulation.get("hit_rate")
        lines.append(
            "simulation: total_return {tr:.6f}, hit_rate {hr}, max_drawdown {dd:.6f}, "
            "total_costs {tc:.6f}, position_changes {pc}".format(
                tr=simulation["total_return"],
                hr="absent" if hit is None else f"{hit:.4f}",
                dd=simulation["max_drawdown"],
                tc=simulation["total_costs"],
                pc=simulation["n_position_changes"],
            )
        )
    return "\n".join(lines) + "\n"


def _read_bytes(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_synth(args) -> int:
    if args.kind == "random-walk":
        series = gen_random_walk(
            seed=args.seed, n=args.n, start=args.start, sigma=args.sigma, symbol=args.symbol
        )
    else:
        series = gen_trend_sine(
            seed=args.seed,
            n=args.n,
            start=args.start,
            drift=args.drift,
            amplitude=args.amplitude,
            period=args.period,
            noise_sigma=args.noise_sigma,
            symbol=args.symbol,
        )
    _write_text(args.out, write_price_csv(series))
    print(f"seed {args.seed}")
    print(f"wrote {args.out} ({len(series)} rows)")
    return 0


def cmd_split(args) -> int:
    raw = _read_bytes(args.prices)
    series = parse_price_csv(raw.decode("utf-8"))
    ledger = make_ledger(series, args.k, source_digest=content_digest(raw))
    with ledger_lock(args.ledger):
        save_ledger(ledger, args.ledger)
    for p in ledger.partitions:
        print(f"partition {p.id}: {p.role} rows [{p.start_index}, {p.end_index})")
    return 0


def cmd_alter(args) -> int:
    with ledger_lock(args.ledger):
        ledger = load_ledger(args.ledger).record_alteration(args.note)
        save_ledger(ledger, args.ledger)
    print(f"alterations: {ledger.alterations}")
    return 0


def cmd_next_unseen(args) -> int:
    with ledger_lock(args.ledger):
        ledger = load_ledger(args.ledger)
        chosen, updated = ledger.next_unseen()
        save_ledger(updated, args.ledger)
    print(f"partition {chosen.id}: rows [{chosen.start_index}, {chosen.end_index})")
    return 0


def _prepare_simulation(ps: PredictionSet, prices: PriceSeries) -> tuple[list[int], PriceSeries]:
    """Signals plus the price path to trade them over.

    Price-space sets trade over their own targets; movement-space sets
    trade over the supplied price series, which must be exactly one point
    longer and aligned on timestamps.
    """
    if ps.space == PRICE:
        signals = signals_from_predictions(ps)
        path = PriceSeries.from_closes(
            ps.targets, timestamps=ps.aligned_timestamps, symbol=ps.symbol
        )
        return signals, path
    if ps.space == MOVEMENT:
        if len(ps) != len(prices) - 1:
            raise LengthMismatch(
                f"{len(ps)} movement predictions cannot align with "
                f"{len(prices)} prices (need one fewer than prices)"
            )
        if ps.aligned_timestamps != prices.timestamps[1:]:
            raise InvalidParam(
                "movement predictions must carry the timestamps of prices[1:]"
            )
        return signals_from_predictions(ps), prices
    raise InvalidParam(f"simulation undefined for {ps.space!r}-space predictions")


def cmd_audit(args) -> int:
    cfg = load_config(args.config) if args.config else default_config()
    zoom = args.zoom if args.zoom is not None else cfg.zoom

    prices_raw = _read_bytes(args.prices)
    prices = parse_price_csv(prices_raw.decode("utf-8"))
    predictions_raw = _read_bytes(args.predictions)
    ps = read_prediction_csv(predictions_raw.decode("utf-8"), space=args.space)

    digests = {
        "predictions": content_digest(predictions_raw),
        "prices": content_digest(prices_raw),
    }
    ledger = None
    if args.ledger:
        ledger = load_ledger(args.ledger)
        digests["ledger"] = content_digest(_read_bytes(args.ledger))
        if ledger.source_digest and ledger.source_digest != digests["prices"]:
            raise LedgerMismatch(
                f"ledger {args.ledger} was built from a different prices file "
                f"({ledger.source_digest} != {digests['prices']})"
            )

    report = run_audit(ps, ledger=ledger, cfg=cfg.audit, input_digests=digests)

    simulation = None
    equity_csv = None
    signals = None
    path = None
    if ps.space == MOVEMENT:
        # misaligned movement predictions are a usage error, not a finding
        signals, path = _prepare_simulation(ps, prices)
    elif ps.space == PRICE:
        try:
            signals, path = _prepare_simulation(ps, prices)
        except MarketAuditError:
            pass  # too short or untradeable; audit findings still stand
    if signals is not None:
        log, curve = simulate(signals, path, cost=cfg.cost, initial=cfg.initial, unit=cfg.unit)
        simulation = summary_metrics(log, curve)
        equity_csv = write_trade_log_csv(log, curve)

    document = build_report_document(report, simulation, config_echo=config_dict(cfg))

    os.makedirs(args.out_dir, exist_ok=True)
    _write_text(os.path.join(args.out_dir, REPORT_BASENAME), render_report(document, "json"))
    _write_text(os.path.join(args.out_dir, "pred_vs_actual.csv"), write_prediction_csv(ps))
    tail = min(zoom, len(ps))
    zoom_ps = PredictionSet(
        targets=ps.targets[-tail:],
        predictions=ps.predictions[-tail:],
        aligned_timestamps=ps.aligned_timestamps[-tail:],
        space=ps.space,
        symbol=ps.symbol,
    )
    _write_text(os.path.join(args.out_dir, "pred_vs_actual_zoom.csv"), write_prediction_csv(zoom_ps))
    if equity_csv is not None:
        _write_text(os.path.join(args.out_dir, "equity.csv"), equity_csv)

    sys.stdout.write(render_report(document, "text"))
    return 2 if report.blockers() else 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config) if args.config else default_config()
    prices = parse_price_csv(_read_bytes(args.prices).decode("utf-8"))
    ps = read_prediction_csv(_read_bytes(args.predictions).decode("utf-8"), space=args.space)
    signals, path = _prepare_simulation(ps, prices)
    log, curve = simulate(signals, path, cost=cfg.cost, initial=cfg.initial, unit=cfg.unit)
    metrics = summary_metrics(log, curve)
    if args.out_equity:
        _write_text(args.out_equity, write_trade_log_csv(log, curve))
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return 0


def cmd_report(args) -> int:
    with open(args.report, "r", encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as err:
            raise InvalidParam(f"{args.report} is not valid JSON: {err}")
    if not isinstance(document, dict) or "findings" not in document:
        raise InvalidParam(f"{args.report} is not an audit report")
    sys.stdout.write(render_report(document, args.format))
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="marketaudit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic price CSV")
    p.add_argument("kind", choices=("random-walk", "trend-sine"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, required=True, help="number of points")
    p.add_argument("--start", type=float, default=100.0)
    p.add_argument("--sigma", type=float, default=1.0, help="random-walk step size")
    p.add_argument("--drift", type=float, default=0.0)
    p.add_argument("--amplitude", type=float, default=0.0)
    p.add_argument("--period", type=float, default=20.0)
    p.add_argument("--noise-sigma", type=float, default=0.0, dest="noise_sigma")
    p.add_argument("--symbol", default="synthetic")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="partition a price CSV and start a ledger")
    p.add_argument("--prices", required=True)
    p.add_argument("--k", type=int, required=True, help="number of partitions (first is training)")
    p.add_argument("--ledger", required=True, help="ledger JSON path to create")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("alter", help="record one system revision in the ledger")
    p.add_argument("--ledger", required=True)
    p.add_argument("--note", required=True)
    p.set_defaults(func=cmd_alter)

    p = sub.add_parser("next-unseen", help="consume and print the next unseen evaluation partition")
    p.add_argument("--ledger", required=True)
    p.set_defaults(func=cmd_next_unseen)

    p = sub.add_parser("audit", help="run the detector battery plus the trading simulation")
    p.add_argument("--predictions", required=True, help="timestamp,target,prediction CSV")
    p.add_argument("--prices", required=True, help="timestamp,close CSV the predictions refer to")
    p.add_argument("--space", choices=SPACES, default=PRICE)
    p.add_argument("--ledger", help="optional split ledger to include in the sufficiency check")
    p.add_argument("--config", help="JSON config overriding the default thresholds")
    p.add_argument("--out-dir", default="audit_out")
    p.add_argument("--zoom", type=int, help="rows in the zoomed plot CSV (default from config)")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("simulate", help="trade a prediction set and print the metrics")
    p.add_argument("--predictions", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--space", choices=(PRICE, MOVEMENT), default=PRICE)
    p.add_argument("--config", help="JSON config for costs and sizing")
    p.add_argument("--out-equity", help="optional path for the per-step trade CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="render an existing report.json")
    p.add_argument("--report", required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SystemExit as err:  # --help and --version exit through argparse
        return int(err.code or 0)
    try:
        return args.func(args)
    except ExhaustedDatasets as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (MarketAuditError, OSError, UnicodeDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
