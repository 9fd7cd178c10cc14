"""Self-checks of a finished run against the oracles and the trace."""

from __future__ import annotations

from typing import Iterable, Optional

from .model import IDLE, SchedulingTable, TaskSpec
from .oracle import recompute_sc_from_table, replay_policy
from .intervals import compute_intervals
from .trace import TraceEvent


def check_conservation(table: SchedulingTable) -> list[str]:
    """Offline SC per core must equal the idle cells of that core's row."""
    problems = []
    oracle = recompute_sc_from_table(table)
    for core in range(table.n_cores):
        ivs = compute_intervals(table, core)
        idle = int((table.cells[core] == IDLE).sum())
        total = sum(iv.offline_sc for iv in ivs)
        if total != idle:
            problems.append(f"core {core}: interval SC {total} != idle cells {idle}")
        ref = [v for (c, _), v in sorted(oracle.items()) if c == core]
        if ref != [iv.offline_sc for iv in ivs]:
            problems.append(f"core {core}: interval SC differs from recomputation")
    return problems


def check_trace(events: Iterable[TraceEvent], header: Optional[dict] = None) -> dict:
    header = header or {}
    filler = set(header.get("best_effort", []))
    count_filler = header.get("count_filler_switches", True)
    last = {}
    recount = 0
    switches = 0
    misses = 0
    per_slot: dict[int, dict[int, int]] = {}
    double = []
    prev_slot = -1
    ordered = True
    for e in events:
        if e.slot < prev_slot:
            ordered = False
        prev_slot = e.slot
        if e.kind == "switch":
            switches += 1
        elif e.kind == "miss":
            misses += 1
        elif e.kind == "complete" and e.detail.get("deadline") is not None and e.slot >= e.detail["deadline"]:
            misses += 1
        elif e.kind == "dispatch":
            tid = IDLE if e.task is None else e.task
            prev = last.get(e.core, IDLE)
            if tid != prev:
                quiet = not count_filler and (prev == IDLE or prev in filler) and (tid == IDLE or tid in filler)
                if not quiet:
                    recount += 1
            last[e.core] = tid
            if tid != IDLE:
                seen = per_slot.setdefault(e.slot, {})
                if tid in seen and seen[tid] != e.core:
                    double.append((e.slot, tid))
                seen[tid] = e.core
    return {
        "ordered": ordered,
        "switches": switches,
        "switch_recount": recount,
        "switches_match": switches == recount,
        "task_on_two_cores": double[:10],
        "deadline_misses": misses,
    }


def actuals_from_trace(events: Iterable[TraceEvent]) -> dict[tuple[int, int], int]:
    out = {}
    for e in events:
        if e.kind == "complete":
            out[(e.task, e.job)] = int(e.detail["actual"])
        elif e.kind == "overrun":
            out[(e.task, e.job)] = 1 << 30
    return out


def verify_run(
    table: SchedulingTable,
    events: list[TraceEvent],
    header: dict,
    arrivals: Optional[list[tuple[int, TaskSpec]]] = None,
    replay: bool = True,
    enforce_bound: bool = True,
) -> dict:
    """Divergence report for one run; ``ok`` is true when nothing diverged."""
    report: dict = {"conservation": check_conservation(table)}
    report["trace"] = check_trace(events, header)
    if arrivals is None:
        arrivals = [(int(s), TaskSpec.from_dict(d)) for s, d in header.get("arrivals", [])]
    engine = {}
    for e in events:
        if e.kind == "dispatch":
            engine.setdefault(e.core, []).append(IDLE if e.task is None else e.task)
    report["replay"] = {"checked": False, "divergences": []}
    if replay:
        params = header.get("engine", {})
        try:
            ref = replay_policy(
                table,
                arrivals,
                actuals_from_trace(events),
                int(header.get("slots", table.horizon)),
                best_effort=header.get("best_effort", []),
                pull_forward=params.get("pull_forward", True),
                policy=params.get("admission_core_policy", "first-fit"),
                enforce_bound=enforce_bound,
            )
        except ValueError as exc:
            report["replay"]["skipped"] = str(exc)
        else:
            report["replay"]["checked"] = True
            div = []
            for core, seq in enumerate(ref):
                got = engine.get(core, [])
                for slot, (a, b) in enumerate(zip(got, seq)):
                    if a != b:
                        div.append({"core": core, "slot": slot, "engine": a, "oracle": b})
                if len(got) != len(seq):
                    div.append({"core": core, "length": [len(got), len(seq)]})
            report["replay"]["divergences"] = div[:20]
            report["replay"]["diverged"] = len(div)
    tr = report["trace"]
    report["ok"] = (
        not report["conservation"]
        and tr["ordered"]
        and tr["switches_match"]
        and not tr["task_on_two_cores"]
        and tr["deadline_misses"] == 0
        and not report["replay"].get("diverged", 0)
    )
    return report
