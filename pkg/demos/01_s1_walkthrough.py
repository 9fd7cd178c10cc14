"""One TT core, six slots: intervals, acceptance tests, a guarantee and the
resulting dispatch.

Run with ``python3 demos/01_s1_walkthrough.py``.
"""

from __future__ import annotations

import numpy as np

from slotshift import (
    EngineConfig,
    ExecutionModel,
    SchedulingTable,
    SystemConfig,
    TaskKind,
    TaskSpec,
    compute_intervals,
    init_runtime,
    simulate,
    total_sc,
)
from slotshift.engine import admit_aperiodic

NAMES = {0: "A", 1: "B", 2: "J", 3: "J2", 4: "J3", 50: "BE", -1: "."}


def show(row) -> str:
    return " ".join(f"{NAMES.get(int(x), x):>2}" for x in row)


cfg = SystemConfig(total_cores=2, tt_cores=1, slot_length_ms=3.0, horizon=6)
A = TaskSpec(0, TaskKind.OFFLINE, 2, 3, 6, 0, 0, "A")
B = TaskSpec(1, TaskKind.OFFLINE, 2, 4, 6, 2, 0, "B")
table = SchedulingTable(cfg, np.array([[0, 0, -1, 1, 1, -1]]), (A, B), ())

print("offline row   ", show(table.cells[0]))
ivs = compute_intervals(table, 0)
for iv in ivs:
    print(f"  interval [{iv.start},{iv.end}) owner={NAMES[iv.owner]:>2} sc={iv.offline_sc}")
print("total spare capacity", total_sc(ivs))

# Each candidate is tested against a fresh state at slot 0.
print("\nacceptance at slot 0:")
for spec in (
    TaskSpec(2, TaskKind.APERIODIC, 2, 6, name="J"),
    TaskSpec(3, TaskKind.APERIODIC, 1, 4, name="J2"),
    TaskSpec(4, TaskKind.APERIODIC, 2, 3, name="J3"),
):
    _, d = admit_aperiodic(init_runtime(table), spec)
    print(f"  {spec.name:<3} wcet={spec.wcet} deadline={spec.deadline}"
          f" available={d.available_sc} -> {'accept' if d.accepted else 'reject'}")

# An accepted job is written into the earliest idle cells before its deadline.
state = init_runtime(table)
J = TaskSpec(2, TaskKind.APERIODIC, 2, 6, name="J")
admit_aperiodic(state, J)
print("\nafter guaranteeing J", show(state.cells[0][:6]))

print("\ndispatch, nominal execution:")
print("  with J            ", show(simulate(table, [(0, J)]).sequence[0]))
print("  no arrivals       ", show(simulate(table).sequence[0]))
print("  no pull-forward   ", show(simulate(table, params=EngineConfig(pull_forward=False)).sequence[0]))
be = TaskSpec(50, TaskKind.BEST_EFFORT, 1, 1, 1, name="BE")
early = ExecutionModel(overrides={(0, 0): 1})
print("  A ends early + BE ", show(simulate(table, tasks=[be], execution=early).sequence[0]))
