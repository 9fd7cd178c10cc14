from __future__ import annotations

import random

from _support import J, random_instance, s1_table
from slotshift.dispatch import CoreDispatchState, Dispatcher, Tick, tick
from slotshift.engine import ExecutionModel
from slotshift.model import IDLE, TaskKind, TaskSpec
from slotshift.simulate import simulate
from slotshift.verify import check_trace

BE = TaskSpec(50, TaskKind.BEST_EFFORT, 0, 0)


def test_same_task_is_no_change():
    cs = CoreDispatchState(0, current_task=3)
    assert tick(cs, 3, {}) is Tick.NO_CHANGE
    assert cs.switches == 0


def test_new_task_is_a_switch():
    cs = CoreDispatchState(0, current_task=3)
    last = {}
    assert tick(cs, 4, last) is Tick.SWITCH
    assert (cs.switches, cs.migrations, last) == (1, 0, {4: 0})


def test_task_from_another_core_migrates():
    last = {}
    c1, c2 = CoreDispatchState(1), CoreDispatchState(2)
    seq = [(c2, 7), (c1, 8), (c1, 7), (c2, 8)]  # two tasks alternating between cores
    outcomes = [tick(cs, task, last) for cs, task in seq]
    assert outcomes == [Tick.SWITCH, Tick.SWITCH, Tick.MIGRATION, Tick.MIGRATION]
    assert (c1.migrations, c2.migrations) == (1, 1)


def test_filler_switches_can_be_excluded():
    cs = CoreDispatchState(0)
    assert tick(cs, 50, {}, frozenset({50}), count_filler_switches=False) is Tick.NO_CHANGE
    assert tick(cs, IDLE, {}, frozenset({50}), count_filler_switches=False) is Tick.NO_CHANGE
    assert cs.switches == 0
    assert tick(cs, 50, {}, frozenset({50})) is Tick.SWITCH


def test_s1_nominal_switch_count():
    sim = simulate(s1_table())
    assert sim.sequence[0] == [0, 0, 1, 1, IDLE, IDLE]
    assert sim.dispatcher.cores[0].switches == 3  # IDLE->A, A->B, B->IDLE
    sim = simulate(s1_table(), tasks=[BE])
    assert sim.sequence[0] == [0, 0, 1, 1, 50, 50]
    assert sim.dispatcher.cores[0].switches == 3


def test_idle_and_filler_slot_accounting():
    sim = simulate(s1_table(), tasks=[BE], execution=ExecutionModel(overrides={(0, 0): 1}))
    cs = sim.dispatcher.cores[0]
    assert sim.sequence[0] == [0, 50, 1, 1, 50, 50]
    assert (cs.be_slots, cs.idle_slots) == (3, 0)
    sim = simulate(s1_table(), [(0, J)])
    assert sim.dispatcher.cores[0].idle_slots == 0


def test_early_finish_hands_the_tail_to_filler():
    uniform = ExecutionModel("uniform", seed=1, bcet_ratio=0.2)
    sim = simulate(s1_table(), tasks=[BE], execution=uniform, n_slots=60)
    assert sim.dispatcher.cores[0].be_fraction > 0


def test_switches_match_recount_and_no_task_on_two_cores():
    rng = random.Random(5)
    done = 0
    while done < 60:
        inst = random_instance(rng)
        if inst is None:
            continue
        table, arrivals = inst
        done += 1
        sim = simulate(table, arrivals, 3 * table.horizon, tasks=[BE], execution=ExecutionModel("uniform", seed=done))
        check = check_trace(sim.trace.events, sim.trace.header)
        assert check["switches_match"] and not check["task_on_two_cores"]
        assert check["switches"] == sum(c.switches for c in sim.dispatcher.cores)


def test_dispatcher_without_trace():
    d = Dispatcher(1)
    out = d.execute_slot(0, {0: IDLE}, {0: None}, {})
    assert out == {0: None} and d.cores[0].idle_slots == 1
