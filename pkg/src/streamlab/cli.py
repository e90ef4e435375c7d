"""Command-line interface: ``streamlab <subcommand> ...``.

Artifacts go to ``--out`` (default: ``$STREAMLAB_OUTPUT_DIR`` or the current
directory).  Every JSON document is written with sorted keys so identical
inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from ._validation import ValidationError
from .analysis import RECORD_HEADER, analyze, read_records_csv, write_records_csv
from .analytic import (ModelInputs, expected_wasted_rate, full_download_length_threshold)
from .domain import StrategyConfig, VideoParams
from .presets import PRESETS, get_preset, preset
from .scenario import load_scenario
from .simulation import compare_strategies, simulate, simulate_with_interruptions
from .strategies import (SEGMENT_HEADER, build_trace, read_segments_csv, segments_to_records,
                         write_segments_csv)

OUTPUT_DIR_ENV = "STREAMLAB_OUTPUT_DIR"


def _out_dir(args):
    path = Path(args.out or os.environ.get(OUTPUT_DIR_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(doc, path):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _print_doc(doc):
    width = max((len(k) for k in doc), default=0)
    for key in sorted(doc):
        print(f"{key:<{width}}  {doc[key]}")


def _rel(a, b):
    return a / b - 1.0 if b else None


# -- subcommands ---------------------------------------------------------------

def cmd_presets(args):
    if args.json:
        doc = {name: {"config": p.config.to_dict(), "provenance": p.provenance,
                      "declared_defaults": list(p.declared)} for name, p in PRESETS.items()}
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for p in PRESETS.values():
            print(p.describe())
    return 0


def _strategy_from_args(args):
    if args.preset:
        cfg = preset(args.preset)
        declared = get_preset(args.preset).declared
    elif args.kind:
        cfg = StrategyConfig(kind=args.kind, on_rate=args.on_rate or 0.0,
                             block_size=args.block_size,
                             accumulation_ratio=args.k if args.k is not None else 1.0)
        declared = ()
    else:
        raise ValidationError("give --preset or --kind")
    overrides = {}
    if args.on_rate is not None:
        overrides["on_rate"] = args.on_rate
    if args.block_size is not None:
        overrides["block_size"] = args.block_size
    if args.k is not None:
        overrides["accumulation_ratio"] = args.k
    if args.buffer_bytes is not None or args.buffer_playback is not None:
        overrides.update(buffer_bytes=args.buffer_bytes, buffer_playback=args.buffer_playback)
    return replace(cfg, **overrides), declared


def cmd_generate(args):
    cfg, declared = _strategy_from_args(args)
    video = VideoParams(args.encoding_rate, args.duration)
    trace = build_trace(video, cfg)
    path = _out_dir(args) / args.output
    write_segments_csv(trace, path)
    doc = {"strategy": cfg.kind.value, "segments": len(trace),
           "download_duration_s": trace.download_duration, "total_bytes": trace.total_bytes,
           "video_size_bytes": video.size(), "trace_csv": str(path)}
    _print_doc(doc)
    for note in declared:
        print(f"note: declared default, not measured: {note}")
    return 0


def cmd_records(args):
    starts, ends, rates = read_segments_csv(args.trace)
    ts, nb = segments_to_records(starts, ends, rates, args.quantum)
    path = _out_dir(args) / args.output
    write_records_csv(ts, nb, path)
    print(f"{len(ts)} records, {int(nb.sum())} bytes -> {path}")
    return 0


def _read_any_records(path, quantum):
    with open(path) as fh:
        header = tuple(c.strip() for c in fh.readline().strip().split(","))
    if header == SEGMENT_HEADER:
        return segments_to_records(*read_segments_csv(path), quantum)
    if header == RECORD_HEADER:
        return read_records_csv(path)
    raise ValidationError(f"{path}: header must be {','.join(RECORD_HEADER)} "
                          f"or {','.join(SEGMENT_HEADER)}")


def cmd_analyze(args):
    records = _read_any_records(args.records, args.quantum)
    report = analyze(records, args.idle_gap, args.encoding_rate, args.duration)
    path = _out_dir(args) / args.output
    _write_json(report.to_dict(), path)
    print(report.summary())
    print(f"report -> {path}")
    return 0


def _load_workload(args):
    w = load_scenario(args.scenario)
    overrides = {}
    if getattr(args, "arrival_rate", None) is not None:
        overrides["arrival_rate"] = args.arrival_rate
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return replace(w, **overrides) if overrides else w


def cmd_simulate(args):
    w = _load_workload(args)
    series, summary = simulate(w, args.dt, args.replications,
                               allow_short_warmup=args.allow_short_warmup)
    model = ModelInputs.from_workload(w)
    doc = summary.to_dict()
    if w.interruption is None:
        doc.update(analytic_mean_Bps=model.mean(), analytic_variance_Bps2=model.variance(),
                   mean_rel_error=_rel(summary.empirical_mean, model.mean()),
                   variance_rel_error=_rel(summary.empirical_variance, model.variance()))
    out = _out_dir(args)
    _write_json(doc, out / "summary.json")
    if not args.no_series:
        series.write_csv(out / "series.csv")
    _print_doc(doc)
    return 0


def cmd_waste(args):
    w = _load_workload(args)
    _, summary = simulate_with_interruptions(w, args.dt, args.replications,
                                             allow_short_warmup=args.allow_short_warmup)
    expected = expected_wasted_rate(w)
    doc = {"simulated_wasted_mean_Bps": summary.wasted_mean,
           "analytic_wasted_mean_Bps": expected,
           "wasted_rel_error": _rel(summary.wasted_mean, expected),
           "session_count": summary.session_count, "seeds": list(summary.seeds),
           "replications": len(summary.seeds)}
    _write_json(doc, _out_dir(args) / "waste.json")
    _print_doc(doc)
    return 0


def cmd_dimension(args):
    model = ModelInputs(args.arrival_rate, args.encoding_rate, args.duration, args.on_rate)
    doc = {"mean_Bps": model.mean(), "variance_Bps2": model.variance(),
           "std_Bps": math.sqrt(model.variance()), "alpha": args.alpha,
           "link_rate_Bps": model.link_rate(args.alpha)}
    _write_json(doc, _out_dir(args) / "dimension.json")
    _print_doc(doc)
    return 0


def cmd_threshold(args):
    value = full_download_length_threshold(args.bprime, args.k, args.beta)
    finite = math.isfinite(value)
    doc = {"buffer_playback_s": args.bprime, "accumulation_ratio": args.k,
           "watched_fraction": args.beta, "finite": finite,
           "length_threshold_s": value if finite else None}
    _write_json(doc, _out_dir(args) / "threshold.json")
    if finite:
        print(f"videos no longer than {value:.2f} s are fully downloaded "
              f"before {args.beta:g} of them is watched")
    else:
        print("k * beta >= 1: every video is fully downloaded before the viewer stops "
              "(no finite threshold)")
    return 0


def cmd_compare(args):
    w = _load_workload(args)
    on_rate = args.on_rate if args.on_rate is not None else w.strategy.on_rate
    configs = {name: preset(name, on_rate) for name in args.strategy}
    result = compare_strategies(w, configs, args.dt, args.replications,
                                allow_short_warmup=args.allow_short_warmup)
    model = ModelInputs.from_workload(replace(w, strategy=next(iter(configs.values()))))
    doc = result.to_dict()
    doc.update(analytic_mean_Bps=model.mean(), analytic_variance_Bps2=model.variance(),
               seeds=list(next(iter(result.summaries.values())).seeds), on_rate_Bps=on_rate)
    _write_json(doc, _out_dir(args) / "compare.json")
    _print_doc(doc)
    return 0


# -- parser -------------------------------------------------------------------

def _add_sim_args(p):
    p.add_argument("--scenario", required=True, help="JSON scenario file")
    p.add_argument("--dt", type=float, default=0.01, help="grid step in seconds")
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--allow-short-warmup", action="store_true",
                   help="skip the stationarity guard on the warmup length")


def build_parser():
    parser = argparse.ArgumentParser(prog="streamlab",
                                     description="Flow-level video streaming traffic laboratory")
    parser.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("presets", help="list strategy presets")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("generate", help="write one session's download schedule as CSV")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--kind", choices=["NoOnOff", "ShortOnOff", "LongOnOff"])
    p.add_argument("--encoding-rate", type=float, required=True, help="B/s")
    p.add_argument("--duration", type=float, required=True, help="video length, s")
    p.add_argument("--on-rate", type=float, help="ON-period bandwidth, B/s")
    p.add_argument("--block-size", type=int, help="bytes")
    p.add_argument("--k", type=float, help="accumulation ratio")
    p.add_argument("--buffer-bytes", type=float)
    p.add_argument("--buffer-playback", type=float, help="seconds of playback")
    p.add_argument("--output", default="trace.csv")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("records", help="sample a segment CSV into flow records")
    p.add_argument("--trace", required=True)
    p.add_argument("--quantum", type=float, default=0.01)
    p.add_argument("--output", default="records.csv")
    p.set_defaults(func=cmd_records)

    p = sub.add_parser("analyze", help="diagnose a flow-record (or segment) CSV")
    p.add_argument("--records", required=True)
    p.add_argument("--quantum", type=float, default=0.01,
                   help="sampling quantum when the input is a segment CSV")
    p.add_argument("--idle-gap", type=float, default=0.1, help="OFF detection threshold, s")
    p.add_argument("--encoding-rate", type=float, help="known encoding rate, B/s")
    p.add_argument("--duration", type=float, help="video length, s (estimates the encoding rate)")
    p.add_argument("--output", default="report.json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="aggregate rate of a Poisson workload")
    _add_sim_args(p)
    p.add_argument("--arrival-rate", type=float, help="override the scenario arrival rate")
    p.add_argument("--no-series", action="store_true", help="skip series.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("waste", help="wasted bandwidth under viewer interruptions")
    _add_sim_args(p)
    p.set_defaults(func=cmd_waste)

    p = sub.add_parser("dimension", help="link rate mean + alpha * std")
    p.add_argument("--arrival-rate", type=float, required=True)
    p.add_argument("--encoding-rate", type=float, required=True)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--on-rate", type=float, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("threshold", help="longest video fully downloaded before interruption")
    p.add_argument("--bprime", type=float, required=True, help="buffered playback, s")
    p.add_argument("--k", type=float, required=True, help="accumulation ratio")
    p.add_argument("--beta", type=float, required=True, help="watched fraction")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("compare", help="moments under several strategies, common seeds")
    _add_sim_args(p)
    p.add_argument("--strategy", action="append", required=True, choices=sorted(PRESETS),
                   help="preset name; repeat for each strategy")
    p.add_argument("--on-rate", type=float, help="common ON rate (default: scenario's)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
