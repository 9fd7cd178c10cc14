"""Brute-force reference checks for the engine.

Everything here works from raw cells with plain loops and dictionaries and
shares no code with :mod:`slotshift.intervals` or :mod:`slotshift.engine`.
A disagreement between the two is an engine defect candidate.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Sequence

from .model import IDLE, SchedulingTable, TaskKind, TaskSpec

MAX_CORES = 2
MAX_SLOTS = 24


class OracleSizeError(ValueError):
    pass


def _rows(table) -> list[list[int]]:
    if isinstance(table, SchedulingTable):
        return [list(map(int, r)) for r in table.cells.tolist()]
    return [list(map(int, r)) for r in table]


def recompute_sc_from_table(
    table, from_slot: int = 0, offset: int = 0, cycle: Optional[int] = None
) -> dict[tuple[int, int], int]:
    """Re-segment raw cells and count idle cells per interval.

    ``table`` is a :class:`SchedulingTable` or a list of rows whose first
    cell is absolute slot ``offset``. Only cells at or after ``from_slot``
    count. Runs are also cut at multiples of ``cycle`` (defaults to the
    table horizon for tables, no cut for raw rows).
    """
    if cycle is None and isinstance(table, SchedulingTable):
        cycle = table.horizon
    out = {}
    for core, row in enumerate(_rows(table)):
        k = -1
        prev = None
        for i, cell in enumerate(row):
            slot = offset + i
            if prev is None or cell != prev or (cycle and slot % cycle == 0):
                k += 1
                out[(core, k)] = 0
            if cell == IDLE and slot >= from_slot:
                out[(core, k)] += 1
            prev = cell
    return out


def feasible_placement_exists(
    table, job, from_slot: int = 0, offset: int = 0, enforce_bound: bool = True
) -> bool:
    """Does any single core have ``wcet`` idle cells in ``[start, deadline)``?

    ``job`` needs ``wcet``, ``release`` and ``abs_deadline`` attributes.
    Deadlines past the end of the given cells are infeasible.
    """
    rows = _rows(table)
    if enforce_bound:
        width = max((len(r) for r in rows), default=0)
        if len(rows) > MAX_CORES or width > 2 * MAX_SLOTS:
            raise OracleSizeError(f"{len(rows)}x{width} exceeds {MAX_CORES}x{2 * MAX_SLOTS}")
    if job.wcet <= 0:
        return True
    start = max(from_slot, job.release)
    for row in rows:
        if job.abs_deadline > offset + len(row):
            continue
        free = 0
        for slot in range(start, job.abs_deadline):
            if row[slot - offset] == IDLE:
                free += 1
        if free >= job.wcet:
            return True
    return False


def replay_policy(
    table: SchedulingTable,
    arrivals: Iterable[tuple[int, TaskSpec]] = (),
    actuals: Optional[Mapping[tuple[int, int], int]] = None,
    n_slots: Optional[int] = None,
    *,
    best_effort: Sequence[int] = (),
    pull_forward: bool = True,
    policy: str = "first-fit",
    enforce_bound: bool = True,
) -> list[list[int]]:
    """Direct simulation of the dispatch rules; returns per-core task ids.

    Admission places an aperiodic job on the earliest idle cells of the
    first (or, for ``best-fit``, the tightest) core that has enough of them
    before the deadline, within the current and next table cycle.
    """
    h = table.horizon
    n_cores = table.n_cores
    if enforce_bound and (n_cores > MAX_CORES or h > MAX_SLOTS):
        raise OracleSizeError(f"{n_cores} cores x {h} slots exceeds {MAX_CORES}x{MAX_SLOTS}")
    n_slots = h if n_slots is None else n_slots
    actuals = dict(actuals or {})
    base = _rows(table)
    cells: dict[tuple[int, int], Optional[tuple[int, int]]] = {}
    jobs: dict[tuple[int, int], dict] = {}

    def materialize(c):
        for core in range(n_cores):
            for s in range(h):
                cells[(core, c * h + s)] = None
        for task in table.tasks:
            windows = []
            r = task.release
            while r < h:
                if r + task.deadline <= h:
                    windows.append((r, r + task.deadline))
                r += task.period
            for i, (r, d) in enumerate(windows):
                key = (task.id, c * len(windows) + i)
                jobs[key] = {
                    "core": task.core, "release": c * h + r, "deadline": c * h + d,
                    "wcet": task.wcet, "actual": actuals.get(key, task.wcet),
                    "executed": 0, "done": False, "aperiodic": False,
                }
                for s in range(r, d):
                    if base[task.core][s] == task.id:
                        cells[(task.core, c * h + s)] = key

    by_slot: dict[int, list[TaskSpec]] = {}
    for slot, task in arrivals:
        by_slot.setdefault(slot, []).append(task)
    ordinal: dict[int, int] = {}
    materialize(0)
    materialize(1)
    finished_last_slot = []
    out = [[] for _ in range(n_cores)]
    for t in range(n_slots):
        if t > 0 and t % h == 0:
            materialize(t // h + 1)
        for key in finished_last_slot:
            core = jobs[key]["core"]
            for (c, s), v in list(cells.items()):
                if c == core and s >= t and v == key:
                    cells[(c, s)] = None
        finished_last_slot = []
        window_end = (t // h + 2) * h
        for task in sorted(by_slot.get(t, []), key=lambda x: x.id):
            if task.kind is not TaskKind.APERIODIC:
                raise ValueError("replay_policy only admits aperiodic tasks")
            idx = ordinal.get(task.id, 0)
            ordinal[task.id] = idx + 1
            key = (task.id, idx)
            deadline = t + task.deadline
            if deadline > window_end:
                continue
            options = []
            for core in range(n_cores):
                free = [s for s in range(t, deadline) if cells[(core, s)] is None]
                if len(free) >= task.wcet:
                    options.append((len(free), core, free[: task.wcet]))
                    if policy == "first-fit":
                        break
            if not options:
                continue
            _, core, take = min(options) if policy == "best-fit" else options[0]
            for s in take:
                cells[(core, s)] = key
            jobs[key] = {
                "core": core, "release": t, "deadline": deadline, "wcet": task.wcet,
                "actual": actuals.get(key, task.wcet), "executed": 0, "done": False,
                "aperiodic": True,
            }
        taken = set()
        for core in range(n_cores):
            key = cells[(core, t)]
            if key is None and pull_forward:
                best = None
                for k, j in jobs.items():
                    if j["core"] != core or j["done"] or j["release"] > t or j["deadline"] <= t:
                        continue
                    later = [s for (c, s), v in cells.items() if c == core and s > t and v == k]
                    if not later:
                        continue
                    rank = (0 if j["aperiodic"] else 1, j["deadline"], k[0], k[1])
                    if best is None or rank < best[0]:
                        best = (rank, k, max(later))
                if best is not None:
                    _, key, last = best
                    cells[(core, last)] = None
                    cells[(core, t)] = key
            if key is None:
                choice = IDLE
                for be in sorted(best_effort):
                    if be not in taken:
                        taken.add(be)
                        choice = be
                        break
                out[core].append(choice)
                continue
            out[core].append(key[0])
            j = jobs[key]
            j["executed"] += 1
            if j["executed"] == j["actual"]:
                j["done"] = True
                finished_last_slot.append(key)
            elif j["executed"] >= j["wcet"]:
                j["done"] = True
    return out
