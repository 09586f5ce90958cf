"""Command-line front door: gen, simulate, certify, adaptive, opt.

Output goes to --out (format by suffix: .json or .csv) or stdout as JSON.
A bare --out filename is placed under $BDSCHED_OUT_DIR when that is set.
Exit codes: 0 success, 1 certificate failure, 2 bad input or configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, generators, simulate, traceio
from .errors import ConfigError, HarnessError, ModelError, TraceError
from .model import NUMERIC, ORDINAL, BufferState, DeadlineKey, Packet

OUT_DIR_ENV = "BDSCHED_OUT_DIR"


def _resolve_out(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if base and p.parent == Path("."):
        p = Path(base) / p
    return p


def _emit(obj: dict, rows: list[dict], out: Path | None) -> None:
    """JSON document everywhere; CSV gets the tabular rows instead."""
    if out is None:
        json.dump(obj, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix == ".csv":
        with open(out, "w", newline="", encoding="utf-8") as fp:
            if rows:
                writer = csv.DictWriter(fp, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)
    else:
        with open(out, "w", encoding="utf-8") as fp:
            json.dump(obj, fp, indent=2)
            fp.write("\n")


def _load_buffer_file(path: str) -> BufferState:
    with open(path, "r", encoding="utf-8") as fp:
        obj = json.load(fp)
    kind = obj.get("model", NUMERIC)
    if kind not in (NUMERIC, ORDINAL):
        raise ConfigError(f"buffer file model must be numeric or ordinal, got {kind!r}")
    packets = [
        Packet(
            id=int(p["id"]),
            weight=float(p["w"]),
            deadline=DeadlineKey(kind, int(p["d"])),
            arrival=int(p.get("arr", 0)),
        )
        for p in obj.get("packets", [])
    ]
    return BufferState.from_packets(packets, kind)


def _buffer_obj(buffer: BufferState) -> dict:
    return {
        "model": buffer.kind,
        "packets": [
            {"id": p.id, "w": p.weight, "d": p.deadline.value, "arr": p.arrival}
            for p in buffer.packets
        ],
    }


def _gen_config(args) -> generators.GenConfig:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fp:
            obj = json.load(fp)
        if args.seed is not None:
            obj["seed"] = args.seed
        return generators.GenConfig.from_dict(obj)
    return generators.GenConfig(
        steps=args.steps,
        arrival_rate=args.rate,
        weight_dist=generators.WeightDist(args.weights, args.w_lo, args.w_hi, args.levels),
        span_dist=generators.SpanDist(args.span_kind, args.span),
        s_bounded=args.s_bounded,
        model=args.model,
        seed=args.seed if args.seed is not None else 0,
    )


def cmd_gen(args) -> int:
    config = _gen_config(args)
    trace = generators.generate(config)
    out = _resolve_out(args.out)
    if out is None:
        traceio.dump_trace(trace, sys.stdout)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        traceio.write_trace(trace, out)
    return 0


def cmd_simulate(args) -> int:
    trace = traceio.read_trace(args.trace)
    report = simulate.build_report(trace, args.scheduler, args.seed, args.trials, args.workers)
    obj = report.to_dict()
    _emit(obj, obj["per_trial"], _resolve_out(args.out))
    return 0


def cmd_certify(args) -> int:
    tolerance = args.tolerance
    buffers: list[BufferState] = []
    if args.buffer_file:
        buffers.append(_load_buffer_file(args.buffer_file))
    elif args.tightness:
        buffers.append(generators.tightness_buffer(args.tightness))
    else:
        rng = np.random.default_rng(np.random.SeedSequence(args.seed or 0))
        buffers = [
            generators.random_buffer(rng, args.max_size, args.w_lo, args.w_hi)
            for _ in range(args.random)
        ]

    checked = 0
    failures = []
    min_ratio = math.inf
    for buffer in buffers:
        cert = analysis.step_certificate(buffer, tolerance)
        checked += 1
        min_ratio = min(min_ratio, cert.min_ratio)
        if not cert.passed:
            failures.append((buffer, cert))

    obj = {
        "checked": checked,
        "tolerance": tolerance,
        "bound": analysis.RATIO_BOUND,
        "min_ratio": min_ratio if checked else None,
        "failures": len(failures),
    }
    rows = [{"buffer": i, "min_ratio": c.min_ratio, "passed": c.passed}
            for i, (b, c) in enumerate(failures)]
    _emit(obj, rows, _resolve_out(args.out))
    if failures:
        for buffer, cert in failures:
            json.dump({"buffer": _buffer_obj(buffer), "certificate": cert.to_dict()},
                      sys.stderr, indent=2)
            sys.stderr.write("\n")
        return 1
    return 0


def cmd_adaptive(args) -> int:
    if args.trace:
        trace = traceio.read_trace(args.trace)
    else:
        trace = generators.generate(_gen_config(args))
    strategy: str | analysis.AdversaryFn = args.strategy
    if args.script:
        with open(args.script, "r", encoding="utf-8") as fp:
            moves = {int(k): int(v) for k, v in json.load(fp).items()}
        strategy = analysis.scripted_adversary(moves)
    report = analysis.run_adaptive(
        trace,
        strategy,
        args.seed or 0,
        tolerance=args.tolerance,
        dual_buffer_check=args.check_buffers,
        keep_certificates=False,
    )
    _emit(report.to_dict(), analysis.harness_summary_rows(report), _resolve_out(args.out))
    return 0 if report.passed else 1


def cmd_opt(args) -> int:
    trace = traceio.read_trace(args.trace)
    if trace.kind == ORDINAL:
        from .offline import realize_deadlines

        trace = realize_deadlines(trace)
    from .offline import opt_greedy

    schedule = opt_greedy(trace)
    rows = schedule.to_rows(trace)
    obj = {"value": schedule.value, "assignments": rows}
    _emit(obj, rows, _resolve_out(args.out))
    return 0


def _add_gen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="generator config JSON file (same schema as flags)")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--rate", type=float, default=1.0, help="expected arrivals per step")
    p.add_argument("--weights", choices=generators.WEIGHT_KINDS, default="log-uniform")
    p.add_argument("--w-lo", type=float, default=1e-3)
    p.add_argument("--w-hi", type=float, default=1.0)
    p.add_argument("--levels", type=int, default=8, help="geometric-grid levels")
    p.add_argument("--span-kind", choices=generators.SPAN_KINDS, default="uniform")
    p.add_argument("--span", type=int, default=4, help="max (or constant) deadline span")
    p.add_argument("--s-bounded", type=int, default=None)
    p.add_argument("--model", choices=(NUMERIC, ORDINAL), default=NUMERIC)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bdsched",
        description="Bounded-delay buffer management: RMix, certificates, adversary runs, OPT.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a trace file")
    _add_gen_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="trace file path (JSONL); stdout if omitted")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("simulate", help="run a scheduler over a trace, compare to OPT")
    p.add_argument("--trace", required=True)
    p.add_argument("--scheduler", choices=sorted(simulate.SCHEDULERS), default="rmix")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("certify", help="check the per-step ratio bound on buffers")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--buffer-file", help="JSON buffer description")
    src.add_argument("--random", type=int, help="number of random buffers to sweep")
    src.add_argument("--tightness", type=int, help="near-tight buffer of k packets")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-size", type=int, default=20)
    p.add_argument("--w-lo", type=float, default=1e-3)
    p.add_argument("--w-hi", type=float, default=1.0)
    p.add_argument("--tolerance", type=float, default=analysis.DEFAULT_TOLERANCE)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("adaptive", help="adaptive adversary run with per-step certificates")
    p.add_argument("--trace")
    _add_gen_flags(p)
    p.add_argument("--strategy", choices=sorted(analysis.ADVERSARIES), default="min-ratio")
    p.add_argument("--script", help="JSON map step -> packet id (scripted adversary)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=analysis.DEFAULT_TOLERANCE)
    p.add_argument("--check-buffers", action="store_true",
                   help="simulate both players' buffers and assert identity")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_adaptive)

    p = sub.add_parser("opt", help="offline optimal schedule of a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_opt)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ModelError, TraceError, HarnessError, ConfigError, OSError) as exc:
        print(f"bdsched: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
