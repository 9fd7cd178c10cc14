"""Per-core dispatcher tick and slot execution.

The tick only reschedules when the task chosen for the slot differs from
the one that ran in the previous slot; a task whose last slot was on a
different core counts as a migration.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional

from .model import IDLE, Job, JobState, TaskKind


class Tick(Enum):
    NO_CHANGE = "no-change"
    SWITCH = "switch"
    MIGRATION = "migration"  # a switch that also pulls the task across cores


@dataclass
class CoreDispatchState:
    core: int
    current_task: int = IDLE
    switches: int = 0
    migrations: int = 0
    idle_slots: int = 0
    be_slots: int = 0
    be_fraction: float = 0.0  # sub-slot time handed to best-effort after early completion

    def counters(self) -> dict:
        return {
            "switches": self.switches,
            "migrations": self.migrations,
            "idle_slots": self.idle_slots,
            "be_slots": self.be_slots,
            "be_fraction": self.be_fraction,
        }


def tick(
    cs: CoreDispatchState,
    next_task: int,
    last_core_of: dict[int, int],
    filler: frozenset = frozenset(),
    count_filler_switches: bool = True,
) -> Tick:
    """``filler`` holds best-effort ids; with ``count_filler_switches`` off,
    changes between idle and best-effort are not counted as switches."""
    prev = cs.current_task
    if next_task == prev:
        return Tick.NO_CHANGE
    cs.current_task = next_task
    if not count_filler_switches and (prev == IDLE or prev in filler) and (
        next_task == IDLE or next_task in filler
    ):
        return Tick.NO_CHANGE
    cs.switches += 1
    if next_task == IDLE:
        return Tick.SWITCH
    last = last_core_of.get(next_task)
    last_core_of[next_task] = cs.core
    if last is not None and last != cs.core:
        cs.migrations += 1
        return Tick.MIGRATION
    return Tick.SWITCH


@dataclass
class Dispatcher:
    """Lock-step dispatcher for all TT cores of one simulation."""

    n_cores: int
    best_effort: frozenset = frozenset()
    count_filler_switches: bool = True
    trace: object = None

    def __post_init__(self):
        self.cores = [CoreDispatchState(c) for c in range(self.n_cores)]
        self.last_core_of: dict[int, int] = {}

    def _emit(self, *args, **kw):
        if self.trace is not None:
            self.trace.record(*args, **kw)

    def execute_slot(
        self,
        slot: int,
        upcoming: Mapping[int, int],
        upcoming_job: Mapping[int, Optional[int]],
        jobs: Mapping[int, Job],
    ) -> dict[int, Optional[Job]]:
        """Run one slot on every core; returns the job (if any) each core ran."""
        out = {}
        for core in range(self.n_cores):
            cs = self.cores[core]
            tid = upcoming[core]
            outcome = tick(cs, tid, self.last_core_of, self.best_effort, self.count_filler_switches)
            if outcome is not Tick.NO_CHANGE:
                self._emit(slot, core, "switch", None if tid == IDLE else tid)
                if outcome is Tick.MIGRATION:
                    self._emit(slot, core, "migration", tid)
            uid = upcoming_job.get(core)
            job = jobs[uid] if uid is not None else None
            out[core] = job
            if job is None:
                if tid == IDLE:
                    cs.idle_slots += 1
                    self._emit(slot, core, "dispatch", None, None, cls="idle")
                else:
                    cs.be_slots += 1
                    self._emit(slot, core, "dispatch", tid, None, cls="be")
                continue
            cls = "ap" if job.kind is TaskKind.APERIODIC else "tt"
            self._emit(slot, core, "dispatch", job.task, job.job_index, cls=cls)
            job.executed += 1
            job.state = JobState.RUNNING
            if job.executed == job.actual:
                job.state = JobState.COMPLETE
                job.finished_at = slot
                cs.be_fraction += 1.0 - job.tail
                self._emit(
                    slot, core, "complete", job.task, job.job_index,
                    deadline=job.abs_deadline, actual=job.actual, cls=cls,
                )
            elif job.executed >= job.wcet:
                job.state = JobState.OVERRUN
                job.finished_at = slot
                self._emit(slot, core, "overrun", job.task, job.job_index, deadline=job.abs_deadline)
        return out
