"""Synthetic task sets and aperiodic arrival streams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .model import TaskKind, TaskSpec

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence]

# Parameter ranges of the two task populations used in the overhead
# experiments: offline table tasks and runtime-admitted aperiodic tasks.
OFFLINE_WCET_RANGE = (1, 15)
OFFLINE_PERIOD_RANGE = (15, 50)
APERIODIC_WCET_RANGE = (10, 15)
APERIODIC_PERIOD_RANGE = (10, 15)
UTILIZATION_SHARE = 0.5

ARRIVAL_MODELS = ("sporadic", "poisson-capped")


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class WorkloadParams:
    n_tasks: int
    total_utilization: float
    wcet_range: tuple[int, int]
    period_range: tuple[int, int]
    seed: int = 0

    def __post_init__(self):
        if self.n_tasks < 1:
            raise ValueError("n_tasks must be >= 1")
        if not self.total_utilization > 0:
            raise ValueError("total_utilization must be > 0")
        for name in ("wcet_range", "period_range"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 1:
                raise ValueError(f"{name} must satisfy 1 <= lo <= hi, got {(lo, hi)}")

    @classmethod
    def offline(cls, tt_cores: int, n_tasks: int, seed: int = 0) -> "WorkloadParams":
        return cls(n_tasks, UTILIZATION_SHARE * tt_cores, OFFLINE_WCET_RANGE, OFFLINE_PERIOD_RANGE, seed)

    @classmethod
    def aperiodic(cls, tt_cores: int, n_tasks: int, seed: int = 0) -> "WorkloadParams":
        return cls(
            n_tasks, UTILIZATION_SHARE * tt_cores, APERIODIC_WCET_RANGE, APERIODIC_PERIOD_RANGE, seed
        )

    def to_dict(self) -> dict:
        return {
            "n_tasks": self.n_tasks,
            "total_utilization": self.total_utilization,
            "wcet_range": list(self.wcet_range),
            "period_range": list(self.period_range),
            "seed": self.seed,
        }


def uunifast(n: int, total_utilization: float, seed: SeedLike = None) -> list[float]:
    """Draw ``n`` task utilizations summing to ``total_utilization``."""
    if n < 1:
        raise ValueError("uunifast needs n >= 1")
    if not total_utilization > 0:
        raise ValueError("total_utilization must be > 0")
    rng = as_generator(seed)
    out = []
    remaining = float(total_utilization)
    for i in range(1, n):
        nxt = remaining * rng.random() ** (1.0 / (n - i))
        out.append(remaining - nxt)
        remaining = nxt
    out.append(remaining)
    return out


def generate_task_set(
    params: WorkloadParams, kind: TaskKind = TaskKind.OFFLINE, first_id: int = 0
) -> tuple[list[TaskSpec], float]:
    """Turn UUniFast utilizations into integer tasks.

    Periods are drawn uniformly from ``period_range``; WCETs are rounded
    from ``U_i * period`` and clamped to ``wcet_range`` (and to the
    period). Returns the tasks and the utilization actually achieved,
    which the clamping may move away from the target.
    """
    rng = np.random.default_rng(params.seed)
    utils = uunifast(params.n_tasks, params.total_utilization, rng)
    lo, hi = params.wcet_range
    plo, phi = params.period_range
    tasks = []
    for i, u in enumerate(utils):
        period = int(rng.integers(plo, phi + 1))
        if lo > period:
            raise ValueError(f"task {first_id + i}: minimum WCET {lo} exceeds period {period}")
        wcet = int(math.floor(u * period + 0.5))
        wcet = min(max(wcet, lo), hi, period)
        tasks.append(
            TaskSpec(id=first_id + i, kind=kind, wcet=wcet, deadline=period, period=period)
        )
    achieved = sum(t.wcet / t.period for t in tasks)
    return tasks, achieved


def generate_arrivals(
    ap_tasks: Sequence[TaskSpec],
    horizon: int,
    seed: SeedLike = None,
    model: str = "sporadic",
    jitter: float = 0.5,
) -> list[tuple[int, int]]:
    """Arrival slots for each aperiodic task, as sorted ``(slot, task_id)``.

    ``period`` acts as the minimum inter-arrival time. ``sporadic`` adds
    a uniform jitter of up to ``jitter * period`` to every gap;
    ``poisson-capped`` draws exponential gaps with mean
    ``(1 + jitter) * period`` and floors them at ``period``. The first
    arrival of each task lands uniformly in ``[0, period)``.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if model not in ARRIVAL_MODELS:
        raise ValueError(f"unknown arrival model {model!r}; expected one of {ARRIVAL_MODELS}")
    rng = as_generator(seed)
    out = []
    for t in sorted(ap_tasks, key=lambda t: t.id):
        gap_min = max(1, t.period or t.deadline)
        slot = int(rng.integers(0, gap_min))
        while slot < horizon:
            out.append((slot, t.id))
            if model == "sporadic":
                slot += gap_min + int(rng.integers(0, int(jitter * gap_min) + 1))
            else:
                slot += max(gap_min, int(math.ceil(rng.exponential((1 + jitter) * gap_min))))
    out.sort()
    return out
