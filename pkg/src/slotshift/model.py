"""Domain types shared by every stage of the slot-shifting pipeline.

All times are integer slot counts. Wall-clock values (slot length) only
appear in :class:`SystemConfig` and in reports.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

IDLE = -1


class TaskKind(str, Enum):
    OFFLINE = "offline-periodic"
    RUNTIME = "runtime-periodic"
    APERIODIC = "aperiodic"
    BEST_EFFORT = "best-effort"

    @property
    def periodic(self) -> bool:
        return self in (TaskKind.OFFLINE, TaskKind.RUNTIME)

    @property
    def realtime(self) -> bool:
        return self is not TaskKind.BEST_EFFORT


class JobState(str, Enum):
    PENDING = "pending"
    READY = "ready"
    RUNNING = "running"
    COMPLETE = "complete"
    REJECTED = "rejected"
    OVERRUN = "overrun"


@dataclass(frozen=True)
class SystemConfig:
    """Core topology and cyclic-table geometry.

    TT cores are addressed by their local index ``0 .. tt_cores-1`` in
    tables and in the engine; :meth:`cpu_of` maps a local index to the
    physical CPU number (the last ``tt_cores`` CPUs of the machine).
    """

    total_cores: int = 16
    tt_cores: int = 15
    slot_length_ms: float = 3.0
    horizon: int = 500

    def __post_init__(self):
        if not 1 <= self.tt_cores < self.total_cores:
            raise ValueError(
                f"need 1 <= tt_cores < total_cores, got tt_cores={self.tt_cores}, "
                f"total_cores={self.total_cores}"
            )
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not self.slot_length_ms > 0:
            raise ValueError(f"slot_length_ms must be > 0, got {self.slot_length_ms}")

    def cpu_of(self, core: int) -> int:
        return self.total_cores - self.tt_cores + core

    @property
    def manager_cpu(self) -> int:
        return 0

    def with_horizon(self, horizon: int) -> "SystemConfig":
        return SystemConfig(self.total_cores, self.tt_cores, self.slot_length_ms, horizon)

    def to_dict(self) -> dict:
        return {
            "total_cores": self.total_cores,
            "tt_cores": self.tt_cores,
            "slot_length_ms": self.slot_length_ms,
            "horizon": self.horizon,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SystemConfig":
        return cls(
            total_cores=int(d["total_cores"]),
            tt_cores=int(d["tt_cores"]),
            slot_length_ms=float(d.get("slot_length_ms", 3.0)),
            horizon=int(d["horizon"]),
        )


@dataclass(frozen=True)
class TaskSpec:
    """Static description of one task, in slots.

    ``deadline`` is relative to each job's release. ``release`` is the
    phase of a periodic task or the arrival slot of an aperiodic one.
    ``core`` is the TT core an offline task was partitioned onto.
    """

    id: int
    kind: TaskKind
    wcet: int
    deadline: int
    period: Optional[int] = None
    release: int = 0
    core: Optional[int] = None
    name: Optional[str] = None

    @property
    def utilization(self) -> Fraction:
        if not self.period:
            return Fraction(0)
        return Fraction(self.wcet, self.period)

    @property
    def label(self) -> str:
        return self.name if self.name is not None else f"T{self.id}"

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "kind": self.kind.value,
            "wcet": self.wcet,
            "deadline": self.deadline,
            "period": self.period,
            "release": self.release,
            "core": self.core,
        }
        if self.name is not None:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSpec":
        return cls(
            id=int(d["id"]),
            kind=TaskKind(d["kind"]),
            wcet=int(d["wcet"]),
            deadline=int(d["deadline"]),
            period=None if d.get("period") is None else int(d["period"]),
            release=int(d.get("release", 0)),
            core=None if d.get("core") is None else int(d["core"]),
            name=d.get("name"),
        )


@dataclass(slots=True)
class Job:
    """One released instance of a task. Mutable runtime record."""

    uid: int
    task: int
    job_index: int
    kind: TaskKind
    core: int
    release: int
    abs_deadline: int
    wcet: int
    actual: int
    tail: float = 1.0  # fraction of the last slot actually used
    executed: int = 0
    state: JobState = JobState.PENDING
    missed: bool = False
    finished_at: Optional[int] = None

    @property
    def remaining(self) -> int:
        return self.wcet - self.executed

    @property
    def done(self) -> bool:
        return self.state in (JobState.COMPLETE, JobState.OVERRUN, JobState.REJECTED)

    @property
    def key(self) -> tuple[int, int]:
        return (self.task, self.job_index)


def job_windows(task: TaskSpec, horizon: int) -> tuple[list[tuple[int, int, int]], list[int]]:
    """Split the jobs of a periodic task over one cycle.

    Returns ``(included, excluded)`` where ``included`` holds
    ``(job_index, release, abs_deadline)`` for jobs whose deadline fits in
    ``[0, horizon]`` and ``excluded`` holds the indices of jobs released
    inside the cycle whose deadline does not.
    """
    included, excluded = [], []
    if not task.period:
        return included, excluded
    i = 0
    r = task.release
    while r < horizon:
        if r + task.deadline <= horizon:
            included.append((i, r, r + task.deadline))
        else:
            excluded.append(i)
        i += 1
        r += task.period
    return included, excluded


@dataclass(frozen=True, eq=False)
class SchedulingTable:
    """Cyclic per-core, per-slot assignment of task ids over one horizon.

    ``cells`` has shape ``(tt_cores, horizon)``; entries are task ids or
    :data:`IDLE`. ``tasks`` holds the periodic tasks the table serves.
    ``excluded`` lists ``(task, job_index)`` pairs dropped because their
    deadline falls beyond the horizon.
    """

    config: SystemConfig
    cells: np.ndarray
    tasks: tuple[TaskSpec, ...] = ()
    excluded: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.int32, copy=True)
        expected = (self.config.tt_cores, self.config.horizon)
        if cells.shape != expected:
            raise ValueError(f"cells shape {cells.shape} != {expected}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "excluded", tuple(tuple(e) for e in self.excluded))

    @property
    def horizon(self) -> int:
        return self.config.horizon

    @property
    def n_cores(self) -> int:
        return self.config.tt_cores

    def row(self, core: int) -> np.ndarray:
        return self.cells[core]

    def assignment(self, core: int, slot: int) -> int:
        return int(self.cells[core, slot % self.horizon])

    def task(self, task_id: int) -> TaskSpec:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def idle_count(self, core: int) -> int:
        return int(np.count_nonzero(self.cells[core] == IDLE))

    def with_cells(self, cells, tasks: Optional[Iterable[TaskSpec]] = None) -> "SchedulingTable":
        return SchedulingTable(
            self.config, cells, self.tasks if tasks is None else tuple(tasks), self.excluded
        )

    def __eq__(self, other):
        if not isinstance(other, SchedulingTable):
            return NotImplemented
        return (
            self.config == other.config
            and np.array_equal(self.cells, other.cells)
            and self.tasks == other.tasks
            and self.excluded == other.excluded
        )

    __hash__ = None


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_task_set(tasks: Sequence[TaskSpec], config: SystemConfig) -> ValidationReport:
    """Collect every range, deadline, id and per-core utilization violation."""
    out = []
    seen = set()
    per_core: dict[int, Fraction] = defaultdict(Fraction)
    for t in tasks:
        who = f"task {t.id}"
        if t.id in seen:
            out.append(f"{who}: duplicate id")
        seen.add(t.id)
        if t.id < 0:
            out.append(f"{who}: negative id")
        if t.kind.realtime:
            if t.wcet < 1:
                out.append(f"{who}: WCET < 1")
            if t.deadline < t.wcet:
                out.append(f"{who}: deadline < WCET")
        if t.release < 0:
            out.append(f"{who}: negative release")
        if t.kind.periodic:
            if t.period is None or t.period < 1:
                out.append(f"{who}: periodic task without positive period")
            elif t.deadline > t.period:
                out.append(f"{who}: deadline > period")
        if t.core is not None:
            if not 0 <= t.core < config.tt_cores:
                out.append(f"{who}: core {t.core} outside [0, {config.tt_cores})")
            elif t.kind.periodic and t.period:
                per_core[t.core] += t.utilization
    for core in sorted(per_core):
        if per_core[core] > 1:
            out.append(f"core {core}: over-utilized ({float(per_core[core]):.4f} > 1)")
    return ValidationReport(out)
