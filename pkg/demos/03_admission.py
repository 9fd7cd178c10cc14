"""Feed a burst of aperiodic arrivals and a runtime-periodic task into a
small system and print the admission decisions from the trace."""

from __future__ import annotations

from slotshift import SystemConfig, TaskKind, TaskSpec, build_table, simulate

cfg = SystemConfig(total_cores=3, tt_cores=2, slot_length_ms=3.0, horizon=20)
offline = [
    TaskSpec(0, TaskKind.OFFLINE, 3, 10, 10),
    TaskSpec(1, TaskKind.OFFLINE, 4, 20, 20),
    TaskSpec(2, TaskKind.OFFLINE, 5, 10, 10),
]
table = build_table(offline, cfg)

arrivals = [(2, TaskSpec(10 + k, TaskKind.APERIODIC, 3, 8, 8)) for k in range(5)]
arrivals.append((4, TaskSpec(20, TaskKind.APERIODIC, 2, 50, 50)))  # deadline past the window
arrivals.append((5, TaskSpec(30, TaskKind.RUNTIME, 2, 10, 10)))
result = simulate(table, arrivals, n_slots=4 * cfg.horizon)

for ev in result.trace.events:
    if ev.kind == "admit":
        extra = f" from cycle {ev.detail['first_cycle']}" if "first_cycle" in ev.detail else ""
        print(f"slot {ev.slot:>2}: admit task {ev.task} on core {ev.core}"
              f" (sc {ev.detail['available_sc']} >= {ev.detail['required']}){extra}")
    elif ev.kind == "reject":
        print(f"slot {ev.slot:>2}: reject task {ev.task}: {ev.detail['reason']}"
              f" (sc {ev.detail['available_sc']} < {ev.detail['required']})")
print("deadline misses:", result.misses)
