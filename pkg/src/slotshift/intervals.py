"""Capacity intervals and spare capacity, per TT core."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .model import IDLE, SchedulingTable


@dataclass(slots=True)
class Interval:
    core: int
    start: int
    end: int  # exclusive
    owner: int  # task id or IDLE
    offline_sc: int
    runtime_sc: int

    def __len__(self) -> int:
        return self.end - self.start

    def contains(self, slot: int) -> bool:
        return self.start <= slot < self.end

    def as_tuple(self) -> tuple:
        return (self.core, self.start, self.end, self.owner, self.offline_sc, self.runtime_sc)


def segment_row(
    row: Sequence[int], core: int = 0, offset: int = 0, cycle: Optional[int] = None
) -> list[Interval]:
    """Cut ``row`` into maximal runs of equal assignment.

    ``offset`` is the absolute slot of ``row[0]``. With ``cycle`` set, a
    run is also cut wherever the absolute slot is a multiple of ``cycle``
    so that no interval straddles two table cycles.
    """
    out: list[Interval] = []
    n = len(row)
    i = 0
    while i < n:
        owner = int(row[i])
        j = i + 1
        while j < n and int(row[j]) == owner and not (cycle and (offset + j) % cycle == 0):
            j += 1
        sc = j - i if owner == IDLE else 0
        out.append(Interval(core, offset + i, offset + j, owner, sc, sc))
        i = j
    return out


def compute_intervals(table: SchedulingTable, core: int) -> list[Interval]:
    """Intervals of one core's row; runtime SC starts equal to offline SC."""
    return segment_row(table.row(core).tolist(), core)


def total_sc(intervals: Iterable[Interval]) -> int:
    return sum(iv.offline_sc for iv in intervals)


def sc_summary(table: SchedulingTable) -> list[dict]:
    """Per-core interval counts and spare capacity, for reports."""
    out = []
    for core in range(table.n_cores):
        ivs = compute_intervals(table, core)
        out.append(
            {
                "core": core,
                "cpu": table.config.cpu_of(core),
                "intervals": len(ivs),
                "idle_intervals": sum(1 for iv in ivs if iv.owner == IDLE),
                "spare_capacity": total_sc(ivs),
                "spare_share": total_sc(ivs) / table.horizon,
            }
        )
    return out
