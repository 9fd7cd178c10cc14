"""Trace events, JSONL persistence, metrics and timeline export.

A trace file is JSON Lines: a header record ``{"v": 1, "kind": "header",
...}`` followed by one event per line. Events are ordered by slot; inside
a slot, manager events (releases, admissions) precede dispatch events,
which follow ascending core order.
"""

from __future__ import annotations

import csv
import gzip
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .model import IDLE

TRACE_VERSION = 1
KINDS = frozenset(
    {
        "dispatch",
        "switch",
        "migration",
        "admit",
        "reject",
        "complete",
        "overrun",
        "miss",
        "sc_change",
        "cycle_wrap",
    }
)


class TraceParseError(ValueError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass(slots=True)
class TraceEvent:
    slot: int
    core: Optional[int]
    kind: str
    task: Optional[int] = None
    job: Optional[int] = None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "slot": self.slot,
            "core": self.core,
            "kind": self.kind,
            "task": self.task,
            "job": self.job,
            "detail": self.detail,
        }


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _open(path: Path, mode: str):
    if path.suffix == ".gz":
        # mtime=0 keeps compressed output byte-stable
        raw = gzip.GzipFile(filename="", mode=mode + "b", fileobj=open(path, mode + "b"), mtime=0)
        return io.TextIOWrapper(raw, encoding="utf-8", newline="\n")
    return open(path, mode, encoding="utf-8", newline="\n")


class TraceRecorder:
    """Append-only in-memory event buffer."""

    def __init__(self, header: Optional[dict] = None):
        self.header = {"v": TRACE_VERSION, "kind": "header"}
        self.header.update(header or {})
        self.events: list[TraceEvent] = []

    def record(self, slot, core, kind, task=None, job=None, **detail):
        self.events.append(TraceEvent(slot, core, kind, task, job, detail))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def lines(self) -> Iterator[str]:
        yield _dump(self.header)
        for e in self.events:
            yield _dump(e.to_dict())

    def flush(self, path) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with _open(path, "w") as fh:
                for line in self.lines():
                    fh.write(line)
                    fh.write("\n")
        except OSError as exc:
            raise OSError(f"cannot write trace {path}: {exc}") from exc
        return path


def read_trace(path) -> tuple[dict, list[TraceEvent]]:
    """Load a JSONL trace; malformed lines raise :class:`TraceParseError`."""
    path = Path(path)
    events = []
    header = None
    last_slot = -1
    try:
        fh = _open(path, "r")
    except OSError as exc:
        raise OSError(f"cannot read trace {path}: {exc}") from exc
    with fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceParseError(path, n, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(rec, dict):
                raise TraceParseError(path, n, "record is not an object")
            if header is None:
                if rec.get("kind") != "header":
                    raise TraceParseError(path, n, "first record must be the header")
                if rec.get("v") != TRACE_VERSION:
                    raise TraceParseError(path, n, f"unsupported trace version {rec.get('v')!r}")
                header = rec
                continue
            try:
                ev = TraceEvent(
                    int(rec["slot"]), rec["core"], rec["kind"], rec.get("task"), rec.get("job"),
                    rec.get("detail") or {},
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise TraceParseError(path, n, f"bad event fields: {exc}") from exc
            if ev.kind not in KINDS:
                raise TraceParseError(path, n, f"unknown event kind {ev.kind!r}")
            if ev.slot < last_slot:
                raise TraceParseError(path, n, f"slot {ev.slot} after slot {last_slot}")
            last_slot = ev.slot
            events.append(ev)
    if header is None:
        raise TraceParseError(path, 1, "empty trace (no header)")
    return header, events


@dataclass
class MetricsReport:
    slots: int = 0
    core_slots: int = 0
    admitted: int = 0
    rejected: int = 0
    acceptance_ratio: float = 1.0
    deadline_misses: int = 0
    completed: int = 0
    overruns: int = 0
    switches: int = 0
    migrations: int = 0
    idle_share: float = 0.0
    be_share: float = 0.0
    aperiodic_share: float = 0.0
    sc_utilization: float = 0.0
    released_slots: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def columns(cls) -> list[str]:
        return list(cls().to_dict())


def compute_metrics(events: Iterable[TraceEvent], header: Optional[dict] = None) -> MetricsReport:
    """Single pass over a trace. Misses count jobs that completed at or after
    their deadline plus explicit ``miss`` events."""
    header = header or {}
    m = MetricsReport()
    by_cls = {"tt": 0, "ap": 0, "be": 0, "idle": 0}
    slots = set()
    for e in events:
        k = e.kind
        if k == "dispatch":
            m.core_slots += 1
            slots.add(e.slot)
            by_cls[e.detail.get("cls", "tt")] += 1
        elif k == "switch":
            m.switches += 1
        elif k == "migration":
            m.migrations += 1
        elif k == "admit":
            m.admitted += 1
        elif k == "reject":
            m.rejected += 1
        elif k == "complete":
            m.completed += 1
            dl = e.detail.get("deadline")
            if dl is not None and e.slot >= dl:
                m.deadline_misses += 1
        elif k == "overrun":
            m.overruns += 1
        elif k == "miss":
            m.deadline_misses += 1
        elif k == "sc_change" and e.detail.get("delta", 0) > 0:
            m.released_slots += e.detail["delta"]
    m.slots = int(header.get("slots", len(slots)))
    attempts = m.admitted + m.rejected
    m.acceptance_ratio = m.admitted / attempts if attempts else 1.0
    if m.core_slots:
        m.idle_share = by_cls["idle"] / m.core_slots
        m.be_share = by_cls["be"] / m.core_slots
        m.aperiodic_share = by_cls["ap"] / m.core_slots
    spare = header.get("offline_sc_per_cycle", 0) * (m.slots / header["horizon"] if header.get("horizon") else 0)
    spare += m.released_slots
    if spare > 0:
        m.sc_utilization = min(1.0, by_cls["ap"] / spare)
    return m


def write_metrics_json(report: MetricsReport, path, provenance: Optional[dict] = None) -> Path:
    path = Path(path)
    doc = {"v": TRACE_VERSION, "metrics": report.to_dict()}
    if provenance is not None:
        doc["provenance"] = provenance
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return path


def write_metrics_csv(rows: Iterable[dict], path, columns: Optional[list[str]] = None) -> Path:
    rows = list(rows)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = columns or (list(rows[0]) if rows else MetricsReport.columns())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return path


def timeline(events: Iterable[TraceEvent]) -> list[tuple[int, int, int, str]]:
    """Merge per-slot dispatch events into ``(core, start, end, task)`` bars."""
    open_bar: dict[int, list] = {}
    bars = []
    for e in events:
        if e.kind != "dispatch":
            continue
        label = "IDLE" if e.task is None or e.task == IDLE else str(e.task)
        bar = open_bar.get(e.core)
        if bar is not None and bar[3] == label and bar[2] == e.slot:
            bar[2] = e.slot + 1
            continue
        if bar is not None:
            bars.append(tuple(bar))
        open_bar[e.core] = [e.core, e.slot, e.slot + 1, label]
    bars.extend(tuple(b) for b in open_bar.values())
    bars.sort()
    return bars


def export_timeline(events: Iterable[TraceEvent], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["core", "start_slot", "end_slot", "task"])
        w.writerows(timeline(events))
    return path
