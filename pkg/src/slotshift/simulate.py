"""Slot-by-slot simulation: manager pass, dispatch, trace."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .dispatch import Dispatcher
from .engine import EngineConfig, EngineState, Execution, init_runtime, run_slot_boundary
from .model import IDLE, SchedulingTable, TaskKind, TaskSpec
from .trace import TraceRecorder


@dataclass
class SimulationResult:
    state: EngineState
    dispatcher: Dispatcher
    trace: Optional[TraceRecorder]
    sequence: list[list[int]]  # per core, task id (or IDLE) dispatched in each slot
    slots: int

    @property
    def misses(self) -> int:
        return self.state.stats.get("misses", 0)


def resolve_arrivals(arrivals: Iterable[tuple[int, int]], tasks: Sequence[TaskSpec]) -> list[tuple[int, TaskSpec]]:
    by_id = {t.id: t for t in tasks}
    return [(int(slot), by_id[int(tid)]) for slot, tid in arrivals]


def simulate(
    table: SchedulingTable,
    arrivals: Iterable[tuple[int, TaskSpec]] = (),
    n_slots: Optional[int] = None,
    *,
    tasks: Iterable[TaskSpec] = (),
    params: Optional[EngineConfig] = None,
    execution: Optional[Execution] = None,
    record: bool = True,
    header: Optional[dict] = None,
    count_filler_switches: bool = True,
) -> SimulationResult:
    """Simulate ``n_slots`` slots (default: one table cycle)."""
    n_slots = table.horizon if n_slots is None else n_slots
    arrivals = sorted(arrivals, key=lambda a: (a[0], a[1].id))
    tasks = list(tasks)
    hdr = {
        "config": table.config.to_dict(),
        "horizon": table.horizon,
        "slots": n_slots,
        "offline_sc_per_cycle": sum(table.idle_count(c) for c in range(table.n_cores)),
        "engine": (params or EngineConfig()).to_dict(),
        "best_effort": sorted(t.id for t in tasks if t.kind is TaskKind.BEST_EFFORT),
        "count_filler_switches": count_filler_switches,
        "arrivals": [[slot, task.to_dict()] for slot, task in arrivals],
    }
    if hasattr(execution, "to_dict"):
        hdr["execution"] = execution.to_dict()
    hdr.update(header or {})
    trace = TraceRecorder(hdr) if record else None
    state = init_runtime(table, arrivals, params=params, execution=execution, tasks=tasks, trace=trace)
    disp = Dispatcher(table.n_cores, frozenset(state.best_effort), count_filler_switches, trace)
    seq = [[] for _ in range(table.n_cores)]
    for t in range(n_slots):
        upcoming = run_slot_boundary(state)
        disp.execute_slot(t, upcoming, state.upcoming_job, state.jobs)
        for core in range(table.n_cores):
            seq[core].append(upcoming[core])
    _flag_unfinished(state, n_slots)
    return SimulationResult(state, disp, trace, seq, n_slots)


def _flag_unfinished(state: EngineState, end: int):
    for job in sorted(state.jobs.values(), key=lambda j: (j.core, j.uid)):
        if job.abs_deadline <= end and not job.done and not job.missed:
            job.missed = True
            state.stats["misses"] = state.stats.get("misses", 0) + 1
            if state.trace is not None:
                state.trace.record(end, job.core, "miss", job.task, job.job_index, deadline=job.abs_deadline)


def dispatched_slots(result: SimulationResult) -> dict[tuple[int, int], list[tuple[int, int]]]:
    """``(task, job_index) -> [(core, slot), ...]`` from the trace."""
    out: dict = {}
    for e in result.trace.events:
        if e.kind == "dispatch" and e.job is not None:
            out.setdefault((e.task, e.job), []).append((e.core, e.slot))
    return out


__all__ = ["SimulationResult", "simulate", "resolve_arrivals", "dispatched_slots", "IDLE"]
