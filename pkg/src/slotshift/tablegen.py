"""Offline table construction: worst-fit partitioning plus per-core EDF."""

from __future__ import annotations

import heapq
from dataclasses import replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .model import IDLE, SchedulingTable, SystemConfig, TaskKind, TaskSpec, job_windows


class Infeasible(Exception):
    """No valid placement exists under the offline heuristic."""

    def __init__(self, message: str, core: Optional[int] = None, slot: Optional[int] = None, job=None):
        super().__init__(message)
        self.core = core
        self.slot = slot
        self.job = job


def partition_tasks(tasks: Sequence[TaskSpec], config: SystemConfig) -> dict[int, int]:
    """Worst-fit decreasing by utilization onto the TT cores.

    Tasks that already name a core keep it. Ties go to the smaller task
    id and then the lower core index.
    """
    load = [Fraction(0)] * config.tt_cores
    out: dict[int, int] = {}
    free = []
    for t in tasks:
        if t.core is not None:
            load[t.core] += t.utilization
            out[t.id] = t.core
        else:
            free.append(t)
    for core, u in enumerate(load):
        if u > 1:
            raise Infeasible(f"pre-assigned tasks over-utilize core {core}", core=core)
    for t in sorted(free, key=lambda t: (-t.utilization, t.id)):
        core = min(range(config.tt_cores), key=lambda c: (load[c], c))
        if load[core] + t.utilization > 1:
            raise Infeasible(
                f"task {t.id} (U={float(t.utilization):.3f}) fits on no core", job=(t.id, None)
            )
        load[core] += t.utilization
        out[t.id] = core
    return out


def edf_row(tasks: Sequence[TaskSpec], horizon: int, core: int = 0) -> tuple[np.ndarray, list]:
    """Lay the jobs of ``tasks`` onto one core by EDF over ``[0, horizon)``."""
    row = np.full(horizon, IDLE, dtype=np.int32)
    releases: dict[int, list] = {}
    excluded = []
    for t in tasks:
        included, dropped = job_windows(t, horizon)
        excluded.extend((t.id, j) for j in dropped)
        for j, r, d in included:
            releases.setdefault(r, []).append((d, t.id, j, t.wcet))
    heap: list = []
    left: dict[tuple[int, int], int] = {}
    for s in range(horizon):
        for d, tid, j, wcet in releases.get(s, ()):
            heapq.heappush(heap, (d, tid, j))
            left[(tid, j)] = wcet
        if not heap:
            continue
        d, tid, j = heap[0]
        if d <= s:
            raise Infeasible(f"job {(tid, j)} misses deadline {d} on core {core}", core, s, (tid, j))
        row[s] = tid
        left[(tid, j)] -= 1
        if left[(tid, j)] == 0:
            heapq.heappop(heap)
    if heap:
        d, tid, j = heap[0]
        raise Infeasible(f"job {(tid, j)} unfinished at horizon on core {core}", core, horizon, (tid, j))
    return row, excluded


def build_table(tasks: Sequence[TaskSpec], config: SystemConfig) -> SchedulingTable:
    """Build the cyclic offline table for the offline-periodic tasks.

    Jobs whose deadline falls beyond the horizon are left out and listed
    in ``SchedulingTable.excluded``.
    """
    offline = [t for t in tasks if t.kind is TaskKind.OFFLINE]
    cores = partition_tasks(offline, config)
    placed = sorted((replace(t, core=cores[t.id]) for t in offline), key=lambda t: t.id)
    cells = np.full((config.tt_cores, config.horizon), IDLE, dtype=np.int32)
    excluded = []
    for core in range(config.tt_cores):
        row, dropped = edf_row([t for t in placed if t.core == core], config.horizon, core)
        cells[core] = row
        excluded.extend(dropped)
    return SchedulingTable(config, cells, placed, sorted(excluded))
