"""Line-delimited JSON trace files.

Format: a header line ``{"model": "numeric"|"ordinal"}`` followed by one
event per line, ``{"step": t, "arrivals": [{"id": n, "w": x, "d": k}],
"expire_prefix": m}`` (the last field only in ordinal traces).  Weights are
written with repr precision, so doubles round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO

from .errors import TraceError
from .model import NUMERIC, ORDINAL, DeadlineKey, Packet, StepEvent, Trace


def _event_to_obj(event: StepEvent) -> dict:
    obj: dict = {
        "step": event.step,
        "arrivals": [
            {"id": p.id, "w": p.weight, "d": p.deadline.value} for p in event.arrivals
        ],
    }
    if event.expire_prefix is not None:
        obj["expire_prefix"] = event.expire_prefix
    return obj


def dump_trace(trace: Trace, fp: IO[str]) -> None:
    fp.write(json.dumps({"model": trace.kind}) + "\n")
    for ev in trace.events:
        fp.write(json.dumps(_event_to_obj(ev)) + "\n")


def write_trace(trace: Trace, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        dump_trace(trace, fp)


def _parse_event(obj: dict, kind: str, lineno: int) -> StepEvent:
    try:
        step = int(obj["step"])
        arrivals = tuple(
            Packet(
                id=int(a["id"]),
                weight=float(a["w"]),
                deadline=DeadlineKey(kind, int(a["d"])),
                arrival=step,
            )
            for a in obj.get("arrivals", [])
        )
        expire_prefix = obj.get("expire_prefix")
        if expire_prefix is not None:
            expire_prefix = int(expire_prefix)
        return StepEvent(step=step, arrivals=arrivals, expire_prefix=expire_prefix)
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceError(f"line {lineno}: malformed event: {exc}") from exc


def load_trace(fp: IO[str]) -> Trace:
    header_line = fp.readline()
    if not header_line.strip():
        raise TraceError("line 1: missing trace header")
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise TraceError(f"line 1: invalid JSON header: {exc}") from exc
    kind = header.get("model") if isinstance(header, dict) else None
    if kind not in (NUMERIC, ORDINAL):
        raise TraceError(f"line 1: header must set model to numeric or ordinal, got {kind!r}")

    events = []
    for lineno, line in enumerate(fp, start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"line {lineno}: invalid JSON: {exc}") from exc
        events.append(_parse_event(obj, kind, lineno))
    try:
        return Trace(kind, tuple(events))
    except TraceError as exc:
        raise TraceError(f"inconsistent trace: {exc}") from exc


def read_trace(path: str | Path) -> Trace:
    with open(path, "r", encoding="utf-8") as fp:
        return load_trace(fp)
