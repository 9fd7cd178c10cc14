from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slotshift.model import SystemConfig, TaskKind, TaskSpec, validate_task_set
from slotshift.workload import (
    WorkloadParams,
    generate_arrivals,
    generate_task_set,
    uunifast,
)


def reference_uunifast(n, total, seed):
    # textbook form: sumU_next = sumU * r^(1/(n-i)), drawn in order
    rng = np.random.default_rng(seed)
    sum_u = total
    utils = []
    for i in range(1, n):
        next_sum = sum_u * math.pow(rng.random(), 1.0 / (n - i))
        utils.append(sum_u - next_sum)
        sum_u = next_sum
    utils.append(sum_u)
    return utils


def test_single_task_takes_everything():
    assert uunifast(1, 0.5, 0) == [0.5]


def test_matches_reference_implementation():
    got = uunifast(3, 1.5, 42)
    assert got == pytest.approx(reference_uunifast(3, 1.5, 42), abs=1e-15)
    assert abs(sum(got) - 1.5) <= 1e-9


def test_fifteen_tasks_positive_and_summing():
    for seed in range(1000):
        u = uunifast(15, 7.5, seed)
        assert abs(sum(u) - 7.5) <= 1e-9
        assert all(x > 0 for x in u)


def test_rejects_empty():
    with pytest.raises(ValueError):
        uunifast(0, 1.0, 0)
    with pytest.raises(ValueError):
        WorkloadParams(3, 1.0, (5, 2), (10, 20))


@given(st.integers(1, 64), st.floats(0.01, 32.0), st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_uunifast_sum_property(n, total, seed):
    assert abs(sum(uunifast(n, total, seed)) - total) <= 1e-9


def test_offline_profile_ranges():
    for seed in range(50):
        params = WorkloadParams.offline(15, 60, seed)
        tasks, achieved = generate_task_set(params, TaskKind.OFFLINE)
        assert len(tasks) == 60 and achieved > 0
        for t in tasks:
            assert 1 <= t.wcet <= 15 and 15 <= t.period <= 50 and t.deadline == t.period
        assert validate_task_set(tasks, SystemConfig(16, 15, 3.0, 500)).ok


def test_aperiodic_profile_wcet_fits_period():
    for seed in range(50):
        tasks, _ = generate_task_set(WorkloadParams.aperiodic(15, 8, seed), TaskKind.APERIODIC, first_id=100)
        assert [t.id for t in tasks] == list(range(100, 108))
        for t in tasks:
            assert 10 <= t.wcet <= 15 and 10 <= t.period <= 15 and t.wcet <= t.period


def test_forced_arithmetic():
    tasks, achieved = generate_task_set(WorkloadParams(1, 1.0, (1, 15), (10, 10), 3))
    assert (tasks[0].wcet, tasks[0].period) == (10, 10)
    assert achieved == 1.0


def test_min_wcet_above_period_fails():
    with pytest.raises(ValueError):
        generate_task_set(WorkloadParams(2, 0.5, (12, 15), (5, 10), 0))


def test_generation_is_deterministic():
    p = WorkloadParams.offline(4, 10, 123)
    assert generate_task_set(p) == generate_task_set(p)
    assert generate_arrivals(generate_task_set(p)[0], 200, 9) == generate_arrivals(generate_task_set(p)[0], 200, 9)


def test_no_tasks_no_arrivals():
    assert generate_arrivals([], 100, 0) == []


@pytest.mark.parametrize("model", ["sporadic", "poisson-capped"])
def test_arrival_gaps_respect_minimum(model):
    task = TaskSpec(0, TaskKind.APERIODIC, 10, 10, 10)
    for seed in range(200):
        arr = generate_arrivals([task], 30, seed, model)
        slots = [s for s, _ in arr]
        assert len(slots) <= 3
        assert slots == sorted(slots) and all(0 <= s < 30 for s in slots)
        assert all(b - a >= 10 for a, b in zip(slots, slots[1:]))


def test_unknown_arrival_model():
    with pytest.raises(ValueError):
        generate_arrivals([], 10, 0, "bursty")
