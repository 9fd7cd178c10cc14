from __future__ import annotations

import numpy as np

from _support import J, s1_table
from slotshift.model import SchedulingTable, SystemConfig
from slotshift.simulate import simulate
from slotshift.trace import TraceEvent
from slotshift.verify import actuals_from_trace, check_conservation, check_trace, verify_run


def test_clean_run_verifies():
    sim = simulate(s1_table(), [(0, J)], 12)
    report = verify_run(s1_table(), sim.trace.events, sim.trace.header)
    assert report["ok"] and report["replay"]["checked"] and report["replay"]["diverged"] == 0


def test_arrivals_come_from_the_header():
    sim = simulate(s1_table(), [(0, J)])
    assert [a for a in sim.trace.header["arrivals"]] == [[0, J.to_dict()]]
    assert verify_run(s1_table(), sim.trace.events, sim.trace.header)["ok"]


def test_divergent_dispatch_is_reported():
    sim = simulate(s1_table(), [(0, J)])
    events = list(sim.trace.events)
    i = next(k for k, e in enumerate(events) if e.kind == "dispatch" and e.slot == 2)
    events[i] = TraceEvent(2, 0, "dispatch", 1, 0, {"cls": "tt"})
    report = verify_run(s1_table(), events, sim.trace.header)
    assert not report["ok"]
    assert report["replay"]["divergences"][0] == {"core": 0, "slot": 2, "engine": 1, "oracle": 2}
    assert not report["trace"]["switches_match"]


def test_task_on_two_cores_is_caught():
    events = [TraceEvent(0, 0, "dispatch", 4), TraceEvent(0, 1, "dispatch", 4)]
    assert check_trace(events)["task_on_two_cores"] == [(0, 4)]


def test_conservation_on_odd_rows():
    t = SchedulingTable(SystemConfig(3, 2, 3.0, 5), np.array([[-1, 1, -1, -1, 2], [3, 3, 3, 3, 3]]))
    assert check_conservation(t) == []


def test_actuals_include_overruns():
    events = [TraceEvent(1, 0, "complete", 2, 0, {"actual": 2}), TraceEvent(3, 0, "overrun", 5, 1)]
    actuals = actuals_from_trace(events)
    assert actuals[(2, 0)] == 2 and actuals[(5, 1)] > 1000
