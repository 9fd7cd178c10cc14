"""Simulate, write a trace, read it back, compare against the independent
replay and export a Gantt-style timeline."""

from __future__ import annotations

import tempfile
from pathlib import Path

from slotshift import ExecutionModel, SystemConfig, TaskKind, TaskSpec, build_table, simulate
from slotshift.oracle import replay_policy
from slotshift.trace import compute_metrics, export_timeline, read_trace

cfg = SystemConfig(total_cores=3, tt_cores=2, slot_length_ms=3.0, horizon=12)
offline = [TaskSpec(0, TaskKind.OFFLINE, 2, 6, 6), TaskSpec(1, TaskKind.OFFLINE, 3, 12, 12, 0)]
table = build_table(offline, cfg)
arrivals = [(1, TaskSpec(5, TaskKind.APERIODIC, 2, 5, 5)), (7, TaskSpec(6, TaskKind.APERIODIC, 3, 9, 9))]
execution = ExecutionModel("uniform", seed=3)
result = simulate(table, arrivals, execution=execution)

actuals = {(j.task, j.job_index): j.actual for j in result.state.jobs.values()}
replayed = replay_policy(table, arrivals, actuals)
print("engine and replay agree:", replayed == result.sequence)

with tempfile.TemporaryDirectory() as tmp:
    path = result.trace.flush(Path(tmp) / "run.jsonl.gz")
    header, events = read_trace(path)
    print("metrics:", compute_metrics(events, header).to_dict())
    csv = export_timeline(events, Path(tmp) / "timeline.csv")
    print(csv.read_text())
