"""Runtime slot-shifting manager.

The engine keeps a working copy of the cyclic table over a two-cycle
window ``[window_start, window_start + 2*horizon)``: the current cycle and
the next one, so that aperiodic jobs may be guaranteed up to one full
cycle ahead. Every runtime decision is a cell rewrite of that window:

* a guaranteed aperiodic job owns the idle cells reserved for it,
* pulling a ready job forward moves its latest reserved cell into the
  current idle slot,
* a job that completes early gives its remaining cells back.

Capacity intervals are re-segmented incrementally on each rewrite so they
always equal the maximal runs of the working cells (never straddling a
cycle boundary). The runtime spare capacity of an interval is the number
of its idle cells at or after ``current_slot``.
"""

from __future__ import annotations

import bisect
import hashlib
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

from .intervals import Interval, segment_row
from .model import IDLE, Job, JobState, SchedulingTable, TaskKind, TaskSpec, job_windows

POLICIES = ("first-fit", "best-fit")


class EngineFault(AssertionError):
    """Broken internal invariant; never a normal scheduling outcome."""


@dataclass(frozen=True)
class EngineConfig:
    admission_core_policy: str = "first-fit"
    pull_forward: bool = True
    # Lead time of the manager callback before each boundary. Decisions are
    # modeled as instantaneous; the value is carried into reports only.
    ssm_lead_us: float = 0.0

    def __post_init__(self):
        if self.admission_core_policy not in POLICIES:
            raise ValueError(f"admission_core_policy must be one of {POLICIES}")

    def to_dict(self) -> dict:
        return {
            "admission_core_policy": self.admission_core_policy,
            "pull_forward": self.pull_forward,
            "ssm_lead_us": self.ssm_lead_us,
        }


@dataclass(frozen=True)
class AcceptanceDecision:
    accepted: bool
    available_sc: int
    required: int
    placement: tuple[tuple[int, int], ...] = ()
    core: Optional[int] = None
    reason: Optional[str] = None


class ExecutionModel:
    """Draws how many slots each job really needs.

    ``nominal`` makes every job use its full WCET. ``uniform`` draws a
    real execution time in ``[bcet_ratio * wcet, wcet]``; the job occupies
    ``ceil`` of it and the unused part of its last slot is reported as
    ``tail``. The draw depends only on ``(seed, task, job_index)``.
    ``overrides`` pins actual slot counts (values above WCET model overruns).
    """

    def __init__(self, mode: str = "nominal", seed: int = 0, bcet_ratio: float = 0.5, overrides=None):
        if mode not in ("nominal", "uniform"):
            raise ValueError(f"unknown execution mode {mode!r}")
        self.mode = mode
        self.seed = seed
        self.bcet_ratio = bcet_ratio
        self.overrides = dict(overrides or {})

    def __call__(self, task: int, job_index: int, wcet: int) -> tuple[int, float]:
        pinned = self.overrides.get((task, job_index))
        if pinned is not None:
            return int(pinned), 1.0
        if self.mode == "nominal" or wcet == 0:
            return wcet, 1.0
        u = random.Random(f"{self.seed}:{task}:{job_index}").random()
        time = wcet * (self.bcet_ratio + (1.0 - self.bcet_ratio) * (1.0 - u))
        slots = max(1, min(wcet, -int(-time // 1)))
        return slots, min(1.0, max(time - (slots - 1), 1e-9))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "seed": self.seed, "bcet_ratio": self.bcet_ratio}


Execution = Callable[[int, int, int], tuple[int, float]]


@dataclass
class EngineState:
    base: SchedulingTable
    params: EngineConfig
    execution: Execution
    tasks: dict[int, TaskSpec]
    best_effort: list[int]
    window_start: int = 0
    current_slot: int = 0
    cells: list[list[int]] = field(default_factory=list)
    cell_jobs: list[list[int]] = field(default_factory=list)
    offline_cells: list[list[int]] = field(default_factory=list)
    intervals: list[list[Interval]] = field(default_factory=list)
    cursor: list[int] = field(default_factory=list)
    base_intervals: list[list[Interval]] = field(default_factory=list)
    jobs: dict[int, Job] = field(default_factory=dict)
    ready: list[list[tuple]] = field(default_factory=list)
    reservations: dict[int, list[int]] = field(default_factory=dict)
    releases: list[dict[int, list[int]]] = field(default_factory=list)
    arrivals: dict[int, list[TaskSpec]] = field(default_factory=dict)
    upcoming: dict[int, int] = field(default_factory=dict)
    upcoming_job: dict[int, Optional[int]] = field(default_factory=dict)
    activation: dict[int, int] = field(default_factory=dict)  # runtime task -> first cycle
    arrival_count: dict[int, int] = field(default_factory=dict)
    next_uid: int = 0
    be_taken: set = field(default_factory=set)
    stats: dict[str, int] = field(default_factory=dict)
    trace: object = None

    @property
    def horizon(self) -> int:
        return self.base.horizon

    @property
    def n_cores(self) -> int:
        return self.base.n_cores

    @property
    def window_end(self) -> int:
        return self.window_start + 2 * self.horizon

    @property
    def cycle(self) -> int:
        return self.window_start // self.horizon

    @property
    def admission_queue(self) -> list[TaskSpec]:
        return list(self.arrivals.get(self.current_slot, ()))

    def cell(self, core: int, slot: int) -> int:
        return self.cells[core][slot - self.window_start]

    def job_at(self, core: int, slot: int) -> Optional[Job]:
        uid = self.cell_jobs[core][slot - self.window_start]
        return None if uid < 0 else self.jobs[uid]

    def current_interval(self, core: int) -> Interval:
        return self.intervals[core][self.cursor[core]]

    def cycle_intervals(self, core: int) -> list[Interval]:
        end = self.window_start + self.horizon
        return [iv for iv in self.intervals[core] if self.window_start <= iv.start < end]

    def sc_map(self) -> dict[tuple[int, int], int]:
        """Runtime SC of every window interval keyed by ``(core, index)``."""
        return {
            (core, k): iv.runtime_sc
            for core, ivs in enumerate(self.intervals)
            for k, iv in enumerate(ivs)
        }

    def offline_sc_map(self) -> dict[tuple[int, int], int]:
        return {
            (core, k): iv.offline_sc
            for core, ivs in enumerate(self.base_intervals)
            for k, iv in enumerate(ivs)
        }

    def available_sc(self, core: int, deadline: int) -> int:
        """Idle working cells in ``[current_slot, deadline)`` via intervals."""
        return _scan(self, core, deadline, 0)[0]

    def digest(self) -> str:
        """Hash of the scheduling-relevant state (counters and trace excluded)."""
        h = hashlib.sha256()
        parts = [
            self.window_start,
            self.current_slot,
            self.cells,
            self.cell_jobs,
            [[iv.as_tuple() for iv in ivs] for ivs in self.intervals],
            self.cursor,
            [[iv.as_tuple() for iv in ivs] for ivs in self.base_intervals],
            self.base.cells.tolist(),
            self.ready,
            sorted(self.reservations.items()),
            sorted(
                (u, j.task, j.job_index, j.core, j.executed, j.state.value, j.missed)
                for u, j in self.jobs.items()
            ),
            sorted(self.activation.items()),
        ]
        for p in parts:
            h.update(repr(p).encode())
            h.update(b"|")
        return h.hexdigest()


def _emit(state: EngineState, slot, core, kind, task=None, job=None, **detail):
    if state.trace is not None:
        state.trace.record(slot, core, kind, task, job, **detail)


def _bump(state: EngineState, key: str, n: int = 1):
    state.stats[key] = state.stats.get(key, 0) + n


# ---------------------------------------------------------------- intervals


def _find(ivs: list[Interval], slot: int, start: int = 0) -> int:
    k = start if start < len(ivs) and ivs[start].start <= slot else 0
    while ivs[k].end <= slot:
        k += 1
    return k


def _paint(
    ivs: list[Interval],
    row: list[int],
    offset: int,
    slot: int,
    owner: int,
    cycle: int,
    sc_from: int,
    offline_row: Optional[list[int]] = None,
    hint: int = 0,
):
    """Rewrite one cell and re-segment the enclosing interval in place.

    Runtime SC is carried by decrement/increment from the split interval,
    never recounted. ``offline_row`` gives the cells offline SC is counted
    on; without it offline SC follows runtime SC.
    """
    i = slot - offset
    old = row[i]
    if old == owner:
        return
    if slot < sc_from:
        raise EngineFault(f"rewrite of past slot {slot} (sc origin {sc_from})")
    row[i] = owner
    k = _find(ivs, slot, hint)
    iv = ivs[k]
    if iv.owner != old:
        raise EngineFault(f"interval {iv} does not match cell owner {old}")
    core = iv.core
    # Split [start, slot) | [slot] | [slot+1, end); all of slot.. is future.
    right_len = iv.end - slot - 1
    right_sc = right_len if old == IDLE else 0
    mid_sc = 1 if owner == IDLE else 0
    left_sc = iv.runtime_sc - right_sc - (1 if old == IDLE else 0)
    if left_sc < 0:
        raise EngineFault(f"negative SC while splitting {iv} at {slot}")
    pieces = []
    if iv.start < slot:
        pieces.append(Interval(core, iv.start, slot, old, 0, left_sc))
    pieces.append(Interval(core, slot, slot + 1, owner, 0, mid_sc))
    if right_len > 0:
        pieces.append(Interval(core, slot + 1, iv.end, old, 0, right_sc))
    ivs[k : k + 1] = pieces
    m = k + (1 if iv.start < slot else 0)
    # Merge the new cell with equal-owner neighbours inside the same cycle.
    if m + 1 < len(ivs) and ivs[m + 1].owner == owner and (slot + 1) % cycle != 0:
        nxt = ivs.pop(m + 1)
        ivs[m].end = nxt.end
        ivs[m].runtime_sc += nxt.runtime_sc
    if m > 0 and ivs[m - 1].owner == owner and slot % cycle != 0:
        cur = ivs.pop(m)
        ivs[m - 1].end = cur.end
        ivs[m - 1].runtime_sc += cur.runtime_sc
        m -= 1
    src = row if offline_row is None else offline_row
    for j in range(max(0, m - 1), min(len(ivs), m + 2)):
        seg = ivs[j]
        if offline_row is None:
            seg.offline_sc = seg.runtime_sc
        else:
            a, b = seg.start - offset, seg.end - offset
            seg.offline_sc = src[a:b].count(IDLE)


def _set_cell(state: EngineState, core: int, slot: int, uid: int):
    owner = IDLE if uid < 0 else state.jobs[uid].task
    w = slot - state.window_start
    state.cell_jobs[core][w] = uid
    _paint(
        state.intervals[core],
        state.cells[core],
        state.window_start,
        slot,
        owner,
        state.horizon,
        state.current_slot,
        state.offline_cells[core],
        state.cursor[core],
    )
    state.cursor[core] = _find(state.intervals[core], min(state.current_slot, state.window_end - 1))


def _seed_intervals(state: EngineState, core: int) -> list[Interval]:
    ivs = segment_row(state.cells[core], core, state.window_start, state.horizon)
    off = state.offline_cells[core]
    for iv in ivs:
        a, b = iv.start - state.window_start, iv.end - state.window_start
        iv.offline_sc = off[a:b].count(IDLE)
        iv.runtime_sc = max(0, iv.end - max(iv.start, state.current_slot)) if iv.owner == IDLE else 0
    return ivs


# --------------------------------------------------------------------- jobs


def _new_job(state: EngineState, task: TaskSpec, job_index: int, core: int, release: int, deadline: int) -> Job:
    actual, tail = state.execution(task.id, job_index, task.wcet)
    job = Job(
        uid=state.next_uid,
        task=task.id,
        job_index=job_index,
        kind=task.kind,
        core=core,
        release=release,
        abs_deadline=deadline,
        wcet=task.wcet,
        actual=actual,
        tail=tail,
    )
    state.next_uid += 1
    return job


def _materialize(state: EngineState, cycle: int, half: int):
    """Copy the permanent table into window half ``half`` as cycle ``cycle``."""
    h = state.horizon
    base_off = cycle * h
    for core in range(state.n_cores):
        row = state.base.cells[core].tolist()
        state.cells[core][half * h : (half + 1) * h] = row
        state.offline_cells[core][half * h : (half + 1) * h] = row
        jrow = state.cell_jobs[core]
        for s in range(half * h, (half + 1) * h):
            jrow[s] = -1
    for task in state.base.tasks:
        if task.kind is TaskKind.RUNTIME and state.activation.get(task.id, 0) > cycle:
            continue
        windows, _ = job_windows(task, h)
        if not windows:
            continue
        core = task.core
        row = state.cells[core]
        jrow = state.cell_jobs[core]
        n = len(windows)
        for i, r, d in windows:
            job = _new_job(state, task, cycle * n + i, core, base_off + r, base_off + d)
            state.jobs[job.uid] = job
            slots = []
            for s in range(r, d):
                w = half * h + s
                if row[w] == task.id:
                    jrow[w] = job.uid
                    slots.append(base_off + s)
            if len(slots) != task.wcet:
                raise EngineFault(f"table gives job {job.key} {len(slots)} cells, WCET {task.wcet}")
            state.reservations[job.uid] = slots
            state.releases[core].setdefault(job.release, []).append(job.uid)


def _ready_key(job: Job) -> tuple:
    return (job.abs_deadline, job.task, job.job_index, job.uid)


def _insert_ready(state: EngineState, job: Job):
    job.state = JobState.READY
    bisect.insort(state.ready[job.core], _ready_key(job))


# ------------------------------------------------------------------ public


def init_runtime(
    table: SchedulingTable,
    arrivals: Iterable[tuple[int, TaskSpec]] = (),
    *,
    params: Optional[EngineConfig] = None,
    execution: Optional[Execution] = None,
    tasks: Iterable[TaskSpec] = (),
    trace=None,
) -> EngineState:
    """Prepare the manager: window, intervals, jobs released at slot 0.

    ``arrivals`` are ``(slot, TaskSpec)`` pairs of aperiodic or
    runtime-periodic tasks to admit at that slot. ``tasks`` may carry
    best-effort task specs (and any other specs for lookup).
    """
    extra = list(tasks)
    state = EngineState(
        base=table,
        params=params or EngineConfig(),
        execution=execution or ExecutionModel(),
        tasks={t.id: t for t in list(table.tasks) + extra},
        best_effort=sorted(t.id for t in extra if t.kind is TaskKind.BEST_EFFORT),
        trace=trace,
    )
    h, m = table.horizon, table.n_cores
    state.cells = [[IDLE] * (2 * h) for _ in range(m)]
    state.offline_cells = [[IDLE] * (2 * h) for _ in range(m)]
    state.cell_jobs = [[-1] * (2 * h) for _ in range(m)]
    state.ready = [[] for _ in range(m)]
    state.releases = [{} for _ in range(m)]
    state.cursor = [0] * m
    _materialize(state, 0, 0)
    _materialize(state, 1, 1)
    state.intervals = [_seed_intervals(state, c) for c in range(m)]
    state.base_intervals = [segment_row(table.cells[c].tolist(), c) for c in range(m)]
    for slot, task in arrivals:
        state.arrivals.setdefault(int(slot), []).append(task)
        state.tasks.setdefault(task.id, task)
    for core in range(m):
        for uid in state.releases[core].pop(0, ()):
            _insert_ready(state, state.jobs[uid])
    return state


def _advance_window(state: EngineState):
    """Drop the finished cycle, shift the next one in, materialize a new one."""
    h = state.horizon
    state.window_start += h
    for core in range(state.n_cores):
        for rows in (state.cells, state.offline_cells, state.cell_jobs):
            rows[core][:h] = rows[core][h:]
    _materialize(state, state.cycle + 1, 1)
    queued = {e[-1] for q in state.ready for e in q}
    for uid in list(state.reservations):
        kept = [s for s in state.reservations[uid] if s >= state.window_start]
        job = state.jobs[uid]
        if not kept and job.done and uid not in queued:
            del state.reservations[uid]
            del state.jobs[uid]
        else:
            state.reservations[uid] = kept
    for core in range(state.n_cores):
        state.intervals[core] = _seed_intervals(state, core)
        state.cursor[core] = 0
    _emit(state, state.current_slot, None, "cycle_wrap", cycle=state.cycle)


def update_intervals(state: EngineState, core: int):
    """Move the interval cursor to the interval holding ``current_slot``."""
    ivs = state.intervals[core]
    k = state.cursor[core]
    t = state.current_slot
    while ivs[k].end <= t:
        k += 1
        if k >= len(ivs):
            raise EngineFault(f"core {core}: intervals do not cover slot {t}")
    state.cursor[core] = k


def _release_from(state: EngineState, job: Job, slot: int) -> int:
    """Give back ``job``'s reserved cells at or after ``slot``."""
    res = state.reservations.get(job.uid, [])
    cut = bisect.bisect_left(res, slot)
    freed = res[cut:]
    del res[cut:]
    for s in reversed(freed):
        _set_cell(state, job.core, s, -1)
    if freed:
        _emit(state, state.current_slot, job.core, "sc_change", job.task, job.job_index, delta=len(freed))
    return len(freed)


def update_ready_queue(state: EngineState, core: int):
    """Drop finished jobs (returning unused cells), flag misses, add releases."""
    t = state.current_slot
    keep = []
    for entry in state.ready[core]:
        job = state.jobs[entry[-1]]
        if job.state is JobState.COMPLETE:
            freed = _release_from(state, job, t)
            if freed:
                _bump(state, "released_slots", freed)
            continue
        if job.state is JobState.OVERRUN:
            continue
        if job.abs_deadline <= t:
            job.missed = True
            _bump(state, "misses")
            _emit(state, t, core, "miss", job.task, job.job_index, deadline=job.abs_deadline)
            continue
        keep.append(entry)
    state.ready[core] = keep
    for uid in state.releases[core].pop(t, ()):
        _insert_ready(state, state.jobs[uid])


def _scan(state: EngineState, core: int, deadline: int, want: int) -> tuple[int, list[int]]:
    """Count idle cells in ``[current_slot, deadline)``; collect the first ``want``."""
    t = state.current_slot
    ivs = state.intervals[core]
    avail = 0
    cells: list[int] = []
    k = state.cursor[core]
    while k < len(ivs) and ivs[k].start < deadline:
        iv = ivs[k]
        k += 1
        if iv.end <= t or iv.owner != IDLE:
            continue
        if iv.end <= deadline:
            avail += iv.runtime_sc
        else:
            avail += deadline - max(iv.start, t)  # usable part of the deadline interval
        if len(cells) < want:
            lo = max(iv.start, t)
            cells.extend(range(lo, min(iv.end, deadline, lo + want - len(cells))))
    return avail, cells


def acceptance_test(state: EngineState, job: Job, core: int) -> AcceptanceDecision:
    """Test whether ``core`` has enough spare capacity before the deadline.

    Pure: the state is not modified.
    """
    if job.abs_deadline > state.window_end:
        return AcceptanceDecision(False, 0, job.wcet, core=core, reason="beyond-horizon")
    avail, cells = _scan(state, core, job.abs_deadline, job.wcet)
    if avail < job.wcet:
        return AcceptanceDecision(False, avail, job.wcet, core=core, reason="no-capacity")
    return AcceptanceDecision(True, avail, job.wcet, tuple((core, s) for s in cells), core)


def guarantee(state: EngineState, job: Job, decision: AcceptanceDecision):
    """Reserve the decision's cells for ``job`` and enqueue it."""
    if not decision.accepted:
        raise EngineFault("guarantee called with a rejected decision")
    core = decision.placement[0][0] if decision.placement else decision.core
    for c, s in decision.placement:
        if c != core or state.cell(c, s) != IDLE:
            raise EngineFault(f"placement cell ({c}, {s}) is not idle on core {core}")
    job.core = core
    state.jobs[job.uid] = job
    for _, s in decision.placement:
        _set_cell(state, core, s, job.uid)
    state.reservations[job.uid] = sorted(s for _, s in decision.placement)
    if job.release <= state.current_slot:
        _insert_ready(state, job)
    else:
        state.releases[core].setdefault(job.release, []).append(job.uid)
    _emit(state, state.current_slot, core, "sc_change", job.task, job.job_index, delta=-len(decision.placement))


def _core_order(state: EngineState, decisions: list[AcceptanceDecision]) -> Optional[AcceptanceDecision]:
    ok = [d for d in decisions if d.accepted]
    if not ok:
        return None
    if state.params.admission_core_policy == "best-fit":
        return min(ok, key=lambda d: (d.available_sc, d.core))
    return ok[0]


def admit_aperiodic(state: EngineState, task: TaskSpec) -> tuple[Job, AcceptanceDecision]:
    """Acceptance test across cores and, if one accepts, the guarantee."""
    t = state.current_slot
    index = state.arrival_count.get(task.id, 0)
    state.arrival_count[task.id] = index + 1
    state.tasks.setdefault(task.id, task)
    job = _new_job(state, task, index, -1, t, t + task.deadline)
    decisions = []
    for core in range(state.n_cores):
        d = acceptance_test(state, job, core)
        decisions.append(d)
        if d.accepted and state.params.admission_core_policy == "first-fit":
            break
    chosen = _core_order(state, decisions)
    _bump(state, "admission_attempts")
    if chosen is None:
        best = max(decisions, key=lambda d: d.available_sc)
        reason = "beyond-horizon" if all(d.reason == "beyond-horizon" for d in decisions) else "no-capacity"
        decision = replace(best, core=None, reason=reason)
        job.state = JobState.REJECTED
        _bump(state, "rejected")
        _emit(
            state, t, None, "reject", task.id, index,
            available_sc=decision.available_sc, required=job.wcet, deadline=job.abs_deadline,
            reason=reason, task_kind=task.kind.value,
        )
        return job, decision
    guarantee(state, job, chosen)
    _bump(state, "accepted")
    _emit(
        state, t, chosen.core, "admit", task.id, index,
        available_sc=chosen.available_sc, required=job.wcet, deadline=job.abs_deadline,
        task_kind=task.kind.value, wcet=task.wcet, actual=job.actual,
    )
    return job, chosen


def _offline_fit(state: EngineState, task: TaskSpec, core: int) -> tuple[list[AcceptanceDecision], Optional[list[int]]]:
    row = state.base.cells[core].tolist()
    windows, _ = job_windows(task, state.horizon)
    decisions = []
    for i, r, d in windows:
        idle = [s for s in range(r, d) if row[s] == IDLE]
        if len(idle) < task.wcet:
            decisions.append(AcceptanceDecision(False, len(idle), task.wcet, core=core, reason="no-capacity"))
            return decisions, None
        take = idle[: task.wcet]
        for s in take:
            row[s] = task.id
        decisions.append(AcceptanceDecision(True, len(idle), task.wcet, tuple((core, s) for s in take), core))
    return decisions, row


def add_periodic_permanent(state: EngineState, task: TaskSpec) -> list[AcceptanceDecision]:
    """Admit a runtime periodic task into the permanent table, all or nothing.

    Every job of one cycle is tested against offline spare capacity. On
    success the permanent table (and its offline SC) is updated; the task
    runs from the first cycle not yet materialized in the window.
    """
    if task.kind is not TaskKind.RUNTIME:
        raise ValueError(f"task {task.id} is {task.kind.value}, expected runtime-periodic")
    t = state.current_slot
    _bump(state, "admission_attempts")
    attempts = []
    for core in range(state.n_cores):
        decisions, row = _offline_fit(state, task, core)
        attempts.append((core, decisions, row))
        if row is not None and state.params.admission_core_policy == "first-fit":
            break
    fits = [a for a in attempts if a[2] is not None]
    if not fits:
        _bump(state, "rejected")
        first = attempts[0][1]
        bad = next((i for i, d in enumerate(first) if not d.accepted), 0)
        _emit(
            state, t, None, "reject", task.id, bad, available_sc=first[-1].available_sc if first else 0,
            required=task.wcet, reason="no-capacity", task_kind=task.kind.value,
        )
        return first
    if state.params.admission_core_policy == "best-fit":
        core, decisions, row = min(fits, key=lambda a: (state.base.cells[a[0]].tolist().count(IDLE), a[0]))
    else:
        core, decisions, row = fits[0]
    placed = replace(task, core=core)
    cells = state.base.cells.copy()
    ivs = state.base_intervals[core]
    base_row = cells[core].tolist()
    for d in decisions:
        for _, s in d.placement:
            _paint(ivs, base_row, 0, s, task.id, state.horizon, 0)
    cells[core] = base_row
    tasks = [x for x in state.base.tasks if x.id != task.id] + [placed]
    state.base = state.base.with_cells(cells, sorted(tasks, key=lambda x: x.id))
    state.tasks[task.id] = placed
    state.activation[task.id] = state.cycle + 2
    _bump(state, "accepted")
    _emit(
        state, t, core, "admit", task.id, 0, available_sc=sum(d.available_sc for d in decisions),
        required=task.wcet * len(decisions), task_kind=task.kind.value, first_cycle=state.cycle + 2,
        deadline=None, wcet=task.wcet,
    )
    return decisions


def admit(state: EngineState, task: TaskSpec):
    if task.kind is TaskKind.RUNTIME:
        return add_periodic_permanent(state, task)
    if task.kind is TaskKind.APERIODIC:
        return admit_aperiodic(state, task)
    raise ValueError(f"cannot admit a {task.kind.value} task at runtime")


def _pull_candidate(state: EngineState, core: int) -> Optional[Job]:
    t = state.current_slot
    later = None
    for entry in state.ready[core]:
        job = state.jobs[entry[-1]]
        res = state.reservations.get(job.uid)
        if job.done or not res or res[-1] <= t or job.release > t:
            continue
        if job.kind is TaskKind.APERIODIC:
            return job
        if later is None:
            later = job
    return later


def set_upcoming_slot_task(state: EngineState, core: int) -> int:
    """Pick what runs on ``core`` in ``current_slot``.

    Order: the cell's own job; else, in an idle cell, the earliest-deadline
    ready guaranteed aperiodic job, then the earliest-deadline ready table
    job, pulled forward from a later reserved cell; else a best-effort
    task; else idle.
    """
    t = state.current_slot
    w = t - state.window_start
    uid = state.cell_jobs[core][w]
    if uid >= 0:
        job = state.jobs[uid]
        if job.done:
            raise EngineFault(f"cell ({core}, {t}) still holds finished job {job.key}")
        chosen, tid = uid, job.task
    else:
        chosen, tid = None, IDLE
        job = _pull_candidate(state, core) if state.params.pull_forward else None
        if job is not None:
            res = state.reservations[job.uid]
            last = res.pop()
            _set_cell(state, core, last, -1)
            _set_cell(state, core, t, job.uid)
            res.insert(0, t)
            _bump(state, "pull_forwards")
            chosen, tid = job.uid, job.task
        else:
            for be in state.best_effort:
                if be not in state.be_taken:
                    state.be_taken.add(be)
                    tid = be
                    break
    state.upcoming[core] = tid
    state.upcoming_job[core] = chosen
    return tid


def update_spare_capacities(state: EngineState, core: int):
    """Charge the slot being dispatched against the current interval."""
    t = state.current_slot
    iv = state.intervals[core][state.cursor[core]]
    if not iv.contains(t):
        raise EngineFault(f"cursor interval {iv} does not hold slot {t}")
    if state.cells[core][t - state.window_start] == IDLE:
        iv.runtime_sc -= 1
    if not 0 <= iv.runtime_sc <= len(iv):
        raise EngineFault(f"SC out of bounds in {iv}")


def run_slot_boundary(state: EngineState, arrivals_at_slot: Sequence[TaskSpec] = ()) -> dict[int, int]:
    """One manager pass at the boundary into ``current_slot``.

    Housekeeping runs for every core first, then admissions (ordered by
    task id), then per core the slot selection and SC charge. Admission
    only touches the core a job is placed on, so this is equivalent to
    interleaving the steps per core. Returns ``{core: task id or IDLE}``
    and advances ``current_slot``.
    """
    t = state.current_slot
    if t >= state.window_start + state.horizon:
        _advance_window(state)
    for core in range(state.n_cores):
        update_intervals(state, core)
        update_ready_queue(state, core)
    pending = state.arrivals.pop(t, []) + list(arrivals_at_slot)
    for task in sorted(pending, key=lambda x: x.id):
        admit(state, task)
    state.be_taken = set()
    for core in range(state.n_cores):
        set_upcoming_slot_task(state, core)
        update_spare_capacities(state, core)
    state.current_slot = t + 1
    return dict(state.upcoming)
