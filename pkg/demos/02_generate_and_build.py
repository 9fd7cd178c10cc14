"""Draw a task set with UUniFast, partition it onto the TT cores and report
the spare capacity each core keeps for runtime work."""

from __future__ import annotations

from slotshift import SystemConfig, TaskKind, WorkloadParams, build_table, generate_task_set
from slotshift.intervals import sc_summary

cfg = SystemConfig(total_cores=5, tt_cores=4, slot_length_ms=3.0, horizon=120)
params = WorkloadParams(n_tasks=16, total_utilization=2.0, wcet_range=(1, 12), period_range=(10, 60), seed=7)
tasks, achieved = generate_task_set(params, TaskKind.OFFLINE)
print(f"{len(tasks)} offline tasks, target utilization 2.0, achieved {achieved:.3f}")

table = build_table(tasks, cfg)
print(f"table: {table.n_cores} cores x {table.horizon} slots, {len(table.excluded)} jobs past the horizon")
for row in sc_summary(table):
    print(
        f"  core {row['core']} (cpu {row['cpu']}): {row['intervals']:>3} intervals,"
        f" spare capacity {row['spare_capacity']:>3} ({row['spare_share']:.0%})"
    )
