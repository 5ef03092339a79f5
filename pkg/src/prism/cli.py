"""Command-line entry point.

Subcommands: diagnose, score, select, simulate, osc. Machine-readable
payloads (JSON or CSV) go to the requested output file, written
atomically, or to stdout when the output is ``-``. Progress and errors
go to stderr only. Exit codes: 0 success, 1 usage error, 2 data or
format error, 3 contract violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict

from . import __version__
from .baselines import FPS_METRICS, SelectorSpec
from .diagnostics import anisotropy_report, format_mean_stats_table
from .errors import FormatError, PrismError
from .feature_store import FORMAT_VERSION, atomic_write_bytes, read_features, write_features
from .osc import OscRecord, compare_records, osc
from .redundancy import (
    per_source_counts,
    redundancy_scores,
    scores_to_csv_rows,
)
from .synthlab import (
    PRESETS,
    SynthConfig,
    compare_selectors,
    generate,
    get_preset,
    verify_theorem1,
)

_USAGE_EXIT = 1


class _Parser(argparse.ArgumentParser):
    """argparse with the usage-error exit code pinned to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(_USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _emit(payload: str, out: str, quiet: bool) -> None:
    if out == "-":
        sys.stdout.write(payload)
        return
    atomic_write_bytes(out, payload.encode("utf-8"))
    if not quiet:
        print(f"wrote {out}", file=sys.stderr)


def _json_payload(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _float_or_null(x: float):
    return None if math.isnan(x) else x


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="-", help="output path, '-' for stdout")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (default: PRISM_THREADS or all cores); results are identical for any value",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress messages")


def build_parser() -> _Parser:
    parser = _Parser(prog="prism", description=__doc__)
    parser.add_argument(
        "--version",
        action="version",
        version=f"prism {__version__} (pfm format v{FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p_diag = sub.add_parser("diagnose", help="anisotropy report for a feature file")
    p_diag.add_argument("features", help="input .pfm file")
    p_diag.add_argument("--k", type=int, default=None, help="singular values to report (default: all)")
    p_diag.add_argument("--table", default=None, help="also write a plain-text mean-stats table here")
    _common_flags(p_diag)

    p_score = sub.add_parser("score", help="per-sample redundancy scores as CSV")
    p_score.add_argument("features", help="input .pfm file")
    _common_flags(p_score)

    p_sel = sub.add_parser("select", help="prune to a percentile budget")
    p_sel.add_argument("features", help="input .pfm file")
    p_sel.add_argument("--tau", type=float, required=True, help="budget percentile in (0, 100]")
    p_sel.add_argument(
        "--selector",
        choices=("prism", "random", "fps", "cosine"),
        default="prism",
        help="selection strategy (default: prism)",
    )
    p_sel.add_argument("--seed", type=int, default=None, help="selector seed (required for random)")
    p_sel.add_argument("--metric", choices=FPS_METRICS, default="euclidean", help="fps distance metric")
    _common_flags(p_sel)

    p_sim = sub.add_parser("simulate", help="synthetic-world theory checks and selector comparisons")
    group = p_sim.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=sorted(PRESETS), help="built-in generator preset")
    group.add_argument("--config", help="JSON file with generator settings")
    p_sim.add_argument("--pairs", type=int, default=2000, help="sample pairs for the collapse measurement")
    p_sim.add_argument("--compare", default=None, help="comma list of selectors to compare")
    p_sim.add_argument("--taus", default=None, help="comma list of budgets for --compare")
    p_sim.add_argument("--seeds", default="0,1,2,3,4", help="comma list of seeds for --compare")
    p_sim.add_argument("--dump-features", default=None, help="also write the generated dataset to this .pfm")
    _common_flags(p_sim)

    p_osc = sub.add_parser("osc", help="overall selection cost of one or more pipelines")
    p_osc.add_argument("--records", default=None, help="JSON file with a list of records")
    p_osc.add_argument("--label", default="pipeline", help="label for the inline record")
    p_osc.add_argument("--perf-full", type=float, default=None)
    p_osc.add_argument("--perf-sub", type=float, default=None)
    p_osc.add_argument("--t-select", type=float, default=None)
    p_osc.add_argument("--t-tune-sub", type=float, default=None)
    p_osc.add_argument("--t-tune-full", type=float, default=None)
    _common_flags(p_osc)

    return parser


def _cmd_diagnose(args) -> int:
    handle = read_features(args.features)
    k = args.k if args.k is not None else min(handle.n_samples, handle.dim)
    if k < 1 or k > min(handle.n_samples, handle.dim):
        raise _usage(f"--k must be in [1, {min(handle.n_samples, handle.dim)}]")
    report = anisotropy_report(handle.matrix, k=k, threads=args.threads)
    _emit(_json_payload(report.as_dict()), args.out, args.quiet)
    if args.table is not None:
        if args.table == "-" and args.out == "-":
            raise _usage("--table - conflicts with --out -")
        table = format_mean_stats_table([(args.features, report.mean_stats)])
        _emit(table, args.table, args.quiet)
    return 0


def _cmd_score(args) -> int:
    handle = read_features(args.features)
    scores = redundancy_scores(handle, threads=args.threads)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sample_id", "score", "degenerate"])
    for sample_id, score, degenerate in scores_to_csv_rows(scores, handle.manifest):
        writer.writerow([sample_id, repr(score), degenerate])
    _emit(buf.getvalue(), args.out, args.quiet)
    return 0


def _cmd_select(args) -> int:
    if not 0.0 < args.tau <= 100.0:
        raise _usage("--tau must be in (0, 100]")
    if args.selector == "random" and args.seed is None:
        raise _usage("--selector random requires --seed")
    handle = read_features(args.features)
    name = "cosine_redundancy" if args.selector == "cosine" else args.selector
    spec = SelectorSpec(
        name=name,
        seed=args.seed,
        params={"metric": args.metric} if name == "fps" else {},
    )
    result = spec.run(handle, args.tau, threads=args.threads)
    doc = {
        "tau": result.tau_percent,
        "threshold": _float_or_null(result.threshold_value),
        "selected": list(result.selected_ids),
        "per_source": per_source_counts(result, handle.manifest),
        "selector": result.selector_name,
    }
    if result.seed is not None:
        doc["seed"] = result.seed
    _emit(_json_payload(doc), args.out, args.quiet)
    return 0


def _load_synth_config(path: str) -> SynthConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except ValueError as exc:
            raise FormatError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"config {path} must be a JSON object")
    if "cluster_weights" in doc and doc["cluster_weights"] is not None:
        doc["cluster_weights"] = tuple(doc["cluster_weights"])
    try:
        return SynthConfig(**doc)
    except TypeError as exc:
        raise FormatError(f"bad generator config {path}: {exc}") from exc


def _cmd_simulate(args) -> int:
    config = get_preset(args.preset) if args.preset else _load_synth_config(args.config)
    doc: dict = {"config": _config_dict(config)}
    if args.preset:
        doc["preset"] = args.preset

    if args.dump_features:
        ds = generate(config)
        write_features(ds.handle, args.dump_features)
        if not args.quiet:
            print(f"wrote {args.dump_features}", file=sys.stderr)

    if args.compare:
        selectors = [
            "cosine_redundancy" if s == "cosine" else s
            for s in args.compare.split(",")
            if s
        ]
        taus = _parse_floats(args.taus or "30")
        seeds = _parse_ints(args.seeds)
        comparisons = []
        for tau in taus:
            rows = compare_selectors(config, tau, seeds, selectors, threads=args.threads)
            comparisons.append({"tau": tau, "rows": [r.as_dict() for r in rows]})
        doc["seeds"] = seeds
        doc["comparisons"] = comparisons
    else:
        report = verify_theorem1(config, n_pairs=args.pairs)
        doc["theorem1"] = asdict(report)
        doc["realized_drift_ratio"] = generate(config).truth.realized_drift_ratio
    _emit(_json_payload(doc), args.out, args.quiet)
    return 0


def _config_dict(config: SynthConfig) -> dict:
    doc = asdict(config)
    if doc.get("cluster_weights") is not None:
        doc["cluster_weights"] = list(doc["cluster_weights"])
    return doc


def _cmd_osc(args) -> int:
    if args.records is not None:
        with open(args.records, "r", encoding="utf-8") as fh:
            try:
                rows = json.load(fh)
            except ValueError as exc:
                raise FormatError(f"cannot parse records {args.records}: {exc}") from exc
        if not isinstance(rows, list):
            raise FormatError(f"records file {args.records} must hold a JSON list")
        try:
            records = [OscRecord(**row) for row in rows]
        except TypeError as exc:
            raise FormatError(f"bad record in {args.records}: {exc}") from exc
        results = compare_records(records)
        doc = {"records": [r.as_dict() for r in results]}
    else:
        flags = (args.perf_full, args.perf_sub, args.t_select, args.t_tune_sub, args.t_tune_full)
        if any(v is None for v in flags):
            raise _usage(
                "provide --records or all of --perf-full --perf-sub --t-select "
                "--t-tune-sub --t-tune-full"
            )
        result = osc(
            OscRecord(
                label=args.label,
                perf_full=args.perf_full,
                perf_sub=args.perf_sub,
                t_select=args.t_select,
                t_tune_sub=args.t_tune_sub,
                t_tune_full=args.t_tune_full,
            )
        )
        doc = result.as_dict()
    _emit(_json_payload(doc), args.out, args.quiet)
    return 0


class _UsageError(Exception):
    pass


def _usage(message: str) -> _UsageError:
    return _UsageError(message)


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        raise _usage(f"expected a comma list of numbers, got {text!r}")


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise _usage(f"expected a comma list of integers, got {text!r}")


_COMMANDS = {
    "diagnose": _cmd_diagnose,
    "score": _cmd_score,
    "select": _cmd_select,
    "simulate": _cmd_simulate,
    "osc": _cmd_osc,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except _UsageError as exc:
        print(f"prism {args.subcommand}: error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except PrismError as exc:
        print(f"prism {args.subcommand}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"prism {args.subcommand}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
