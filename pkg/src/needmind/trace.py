"""Trace files: one CSV row per event, plus a compact digest of the salient ones."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import IO, Iterable

from needmind.engine import Trace, TraceEvent

HEADER = ("slot", "agent", "kind", "need", "label", "value", "x", "y")
SALIENT = ("need_arise", "eat_done", "flee_start", "remind_sent", "death")


def _num(v: float | None) -> str:
    return "" if v is None else f"{v:.9g}"


def _opt(text: str) -> float | None:
    return float(text) if text else None


def ordered(events: Iterable[TraceEvent]) -> list[TraceEvent]:
    """Rows by slot, then agent; the sort is stable so phase order survives."""
    return sorted(events, key=lambda e: (e.slot, e.agent))


def write_trace(trace: Trace | Iterable[TraceEvent], sink: IO[str]) -> int:
    events = trace.events if isinstance(trace, Trace) else list(trace)
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(HEADER)
    rows = ordered(events)
    for e in rows:
        writer.writerow((e.slot, e.agent, e.kind, e.need, e.label, _num(e.value), _num(e.x), _num(e.y)))
    return len(rows)


def emit_trace(trace: Trace | Iterable[TraceEvent], path: str | Path | None = None) -> str:
    """Render the CSV; also write it to ``path`` when given. Returns the text."""
    buf = io.StringIO()
    write_trace(trace, buf)
    text = buf.getvalue()
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write trace to {path}: {exc.strerror}") from exc
    return text


def read_trace(source: IO[str] | str | Path) -> list[TraceEvent]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            return read_trace(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if tuple(header or ()) != HEADER:
        raise ValueError(f"bad trace header: {header!r}")
    return [
        TraceEvent(int(slot), agent, kind, need, label, _opt(value), _opt(x), _opt(y))
        for slot, agent, kind, need, label, value, x, y in reader
    ]


def summarize(events: Trace | Iterable[TraceEvent]) -> list[TraceEvent]:
    """The salient events in trace order."""
    return [e for e in ordered(events) if e.kind in SALIENT]


def format_digest(digest: Iterable[TraceEvent]) -> str:
    lines = []
    for e in digest:
        what = e.label or e.need
        lines.append(f"{e.slot:4d}  {e.agent:<8} {e.kind:<12} {what}".rstrip())
    return "\n".join(lines) + ("\n" if lines else "")
