"""Headline acceptance checks, one printed PASS/FAIL line each.

Run under pytest (``pytest tests/test_acceptance.py -v``) or directly as a
script (``python3 tests/test_acceptance.py``).
"""

from __future__ import annotations

import random
import subprocess
import sys
import time
from pathlib import Path

from _support import (
    J,
    J2,
    J3,
    job_for,
    load_fixture,
    names,
    random_actuals,
    random_instance,
    s1_table,
    step,
)
from slotshift import engine as eng
from slotshift.campaign import CampaignConfig, make_workload, run_experiment
from slotshift.dispatch import Dispatcher
from slotshift.engine import EngineConfig, ExecutionModel, init_runtime
from slotshift.intervals import compute_intervals
from slotshift.model import IDLE, TaskKind, TaskSpec
from slotshift.oracle import feasible_placement_exists, recompute_sc_from_table, replay_policy
from slotshift.simulate import dispatched_slots, simulate
from slotshift.tablegen import Infeasible, build_table
from slotshift.verify import check_conservation
from slotshift.workload import WorkloadParams, generate_task_set, uunifast

N_INSTANCES = 1000


def report(capsys, name: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


# -- guarantee soundness -------------------------------------------------------


def check_guarantee_soundness():
    t0 = time.perf_counter()
    result = run_experiment(CampaignConfig())
    elapsed = time.perf_counter() - t0
    s = result.summary
    ok = s["deadline_misses"] == 0 and elapsed < 300 and s["runs"] == 250 and s["verified_ok"] == s["verified_runs"]
    detail = (
        f"{s['runs']} runs, {s['core_slots']} core-slots, {s['deadline_misses']} misses, "
        f"{s['admitted']} admitted / {s['rejected']} rejected, "
        f"{s['verified_ok']}/{s['verified_runs']} sampled runs verified, {elapsed:.1f} s"
    )
    return ok, detail


# -- oracle equivalence ----------------------------------------------------------


def check_oracle_equivalence(n: int = N_INSTANCES):
    rng = random.Random(20240611)
    counts = {"instances": 0, "verdicts": 0, "sc_checks": 0, "slots": 0, "permanent_adds": 0}
    failures = []
    while counts["instances"] < n:
        inst = random_instance(rng, runtime=rng.random() < 0.3)
        if inst is None:
            continue
        table, arrivals = inst
        counts["instances"] += 1
        h = table.horizon
        actuals = random_actuals(rng, table, arrivals)
        execution = ExecutionModel(overrides=actuals)
        pull = rng.random() < 0.8
        state = init_runtime(table, arrivals, params=EngineConfig(pull_forward=pull), execution=execution)
        disp = Dispatcher(table.n_cores)
        tag = f"instance {counts['instances']}"

        def before(state, task):
            if task.kind is not TaskKind.APERIODIC:
                return
            job = job_for(state, task, state.current_slot)
            for core in range(state.n_cores):
                got = eng.acceptance_test(state, job, core).accepted
                want = feasible_placement_exists(
                    [state.cells[core]], job, from_slot=state.current_slot, offset=state.window_start
                )
                counts["verdicts"] += 1
                if got != want:
                    failures.append(f"{tag}: verdict {got} != oracle {want} for task {task.id} core {core}")

        def after(state, task, result):
            counts["sc_checks"] += 1
            ref = recompute_sc_from_table(
                state.cells, from_slot=state.current_slot, offset=state.window_start, cycle=h
            )
            if state.sc_map() != ref:
                failures.append(f"{tag}: runtime SC diverged after admitting task {task.id}")
            if task.kind is TaskKind.RUNTIME:
                counts["permanent_adds"] += 1
                if state.offline_sc_map() != recompute_sc_from_table(state.base):
                    failures.append(f"{tag}: offline SC diverged after permanent add")

        seq = [[] for _ in range(table.n_cores)]
        for _ in range(3 * h):
            up = step(state, disp, before, after)
            for core in range(table.n_cores):
                seq[core].append(up[core])
        counts["slots"] += 3 * h
        if not any(t.kind is TaskKind.RUNTIME for _, t in arrivals):
            ref = replay_policy(table, arrivals, actuals, 3 * h, pull_forward=pull)
            if ref != seq:
                failures.append(f"{tag}: dispatch sequence differs from replay")
        else:
            # replay handles aperiodic arrivals only; cross-check the public loop instead
            sim = simulate(table, arrivals, 3 * h, params=EngineConfig(pull_forward=pull), execution=execution)
            if sim.sequence != seq:
                failures.append(f"{tag}: phase stepping differs from run_slot_boundary")
        if state.stats.get("misses", 0):
            failures.append(f"{tag}: {state.stats['misses']} misses")
    detail = ", ".join(f"{k}={v}" for k, v in counts.items())
    if failures:
        detail += f"; {len(failures)} failures, first: {failures[0]}"
    return not failures, detail


# -- SC conservation ---------------------------------------------------------------


def check_sc_conservation():
    tables = 0
    problems = []
    cfg = CampaignConfig()
    for i in range(cfg.task_sets):
        offline, _, horizon, _ = make_workload(cfg, i)
        try:
            table = build_table(offline, cfg.system.with_horizon(horizon))
        except Infeasible:
            continue
        tables += 1
        problems += check_conservation(table)
    rng = random.Random(7)
    while tables < cfg.task_sets + 500:
        inst = random_instance(rng, max_arrivals=0)
        if inst is None:
            continue
        tables += 1
        problems += check_conservation(inst[0])
    detail = f"{tables} tables, {len(problems)} mismatches"
    if problems:
        detail += f": {problems[0]}"
    return not problems, detail


# -- reject purity ----------------------------------------------------------------


def check_reject_purity(n: int = N_INSTANCES):
    rng = random.Random(99)
    trials = 0
    changed = 0
    attempts = 0
    while trials < n and attempts < 50 * n:
        attempts += 1
        inst = random_instance(rng)
        if inst is None:
            continue
        table, arrivals = inst
        state = init_runtime(
            table, arrivals, execution=ExecutionModel(overrides=random_actuals(rng, table, arrivals))
        )
        disp = Dispatcher(table.n_cores)
        for _ in range(rng.randint(0, 2 * table.horizon - 1)):
            step(state, disp)
        if state.current_slot >= state.window_start + state.horizon:
            eng._advance_window(state)
        for core in range(state.n_cores):
            eng.update_intervals(state, core)
            eng.update_ready_queue(state, core)
        h = table.horizon
        if rng.random() < 0.25:
            p = rng.randint(2, h)
            d = rng.randint(1, p)
            task = TaskSpec(95, TaskKind.RUNTIME, rng.randint(1, d), d, p, rng.randint(0, h - 1))
        else:
            w = rng.randint(1, 2 * h)
            task = TaskSpec(96, TaskKind.APERIODIC, w, rng.randint(w, 3 * h))
        before = state.digest()
        rejected = state.stats.get("rejected", 0)
        eng.admit(state, task)
        if state.stats.get("rejected", 0) == rejected:
            continue
        trials += 1
        if state.digest() != before:
            changed += 1
    ok = trials == n and changed == 0
    return ok, f"{trials} rejected admissions, {changed} changed the state hash"


# -- UUniFast ------------------------------------------------------------------------


def check_uunifast():
    worst = 0.0
    for n in range(1, 65):
        for seed in range(1000):
            u = uunifast(n, 7.5, seed)
            worst = max(worst, abs(sum(u) - 7.5))
    ranges_ok = True
    sets = 0
    for seed in range(200):
        for params, kind in (
            (WorkloadParams.offline(15, 60, seed), TaskKind.OFFLINE),
            (WorkloadParams.aperiodic(15, 8, seed), TaskKind.APERIODIC),
        ):
            tasks, _ = generate_task_set(params, kind)
            sets += 1
            lo, hi = params.wcet_range
            plo, phi = params.period_range
            for t in tasks:
                if not (lo <= t.wcet <= hi and plo <= t.period <= phi and t.deadline == t.period):
                    ranges_ok = False
    ok = worst <= 1e-9 and ranges_ok
    return ok, f"max |sum - U| = {worst:.2e} over n=1..64 x 1000 seeds; {sets} sets within the configured ranges: {ranges_ok}"


# -- determinism ----------------------------------------------------------------------


def _cli_outputs(workdir: Path) -> dict[str, bytes]:
    workdir.mkdir(parents=True, exist_ok=True)
    cmd = [sys.executable, "-m", "slotshift.cli"]
    common = ["--seed", "11", "--cores", "3", "--tt-cores", "2", "--horizon", "48"]
    subprocess.run(
        cmd + ["generate", *common, "--n-offline", "8", "--n-aperiodic", "3",
               "-o", "ts.json", "--arrivals-out", "arr.json"],
        cwd=workdir, check=True,
    )
    subprocess.run(cmd + ["build-table", "ts.json", "-o", "table.json"], cwd=workdir, check=True)
    subprocess.run(
        cmd + ["simulate", "--seed", "7", "--table", "table.json", "--taskset", "ts.json",
               "--arrivals", "arr.json", "--cycles", "2", "--out-dir", "run"],
        cwd=workdir, check=True, stdout=subprocess.DEVNULL,
    )
    subprocess.run(
        cmd + ["simulate", "--seed", "7", "--table", "table.json", "--taskset", "ts.json",
               "--arrivals", "arr.json", "--trace", "trace.jsonl.gz"],
        cwd=workdir, check=True, stdout=subprocess.DEVNULL,
    )
    return {
        str(p.relative_to(workdir)): p.read_bytes() for p in sorted(workdir.rglob("*")) if p.is_file()
    }


def check_determinism(tmp: Path):
    first = _cli_outputs(tmp / "a")
    second = _cli_outputs(tmp / "b")
    c1 = run_experiment(CampaignConfig(task_sets=2, repetitions=2, verify_sample=1, write_traces=True), tmp / "c1")
    c2 = run_experiment(CampaignConfig(task_sets=2, repetitions=2, verify_sample=1, write_traces=True), tmp / "c2")
    camp1 = {str(p.relative_to(c1.out_dir)): p.read_bytes() for p in sorted(c1.out_dir.rglob("*")) if p.is_file()}
    camp2 = {str(p.relative_to(c2.out_dir)): p.read_bytes() for p in sorted(c2.out_dir.rglob("*")) if p.is_file()}
    ok = first == second and camp1 == camp2 and "trace.jsonl.gz" in first and "run/trace.jsonl" in first
    return ok, f"{len(first)} CLI files and {len(camp1)} campaign files byte-identical across two runs: {ok}"


# -- isolation --------------------------------------------------------------------------


def check_isolation(n: int = 100):
    rng = random.Random(4242)
    trials = 0
    disturbed = 0
    overruns = 0
    while trials < n:
        inst = random_instance(rng)
        if inst is None:
            continue
        table, arrivals = inst
        slots = 3 * table.horizon
        nominal = simulate(table, arrivals, slots)
        candidates = sorted({(e.task, e.job) for e in nominal.trace.events if e.kind == "complete"})
        if not candidates:
            continue
        trials += 1
        victims = rng.sample(candidates, k=min(len(candidates), rng.randint(1, 3)))
        wcet = {t.id: t.wcet for t in list(table.tasks) + [t for _, t in arrivals]}
        pinned = {(task, job): wcet[task] + rng.randint(1, 5) for task, job in victims}
        faulty = simulate(table, arrivals, slots, execution=ExecutionModel(overrides=pinned))
        overruns += sum(1 for e in faulty.trace.events if e.kind == "overrun")
        a = dispatched_slots(nominal)
        b = dispatched_slots(faulty)
        others = (set(a) | set(b)) - set(pinned)
        if any(a.get(k) != b.get(k) for k in others) or faulty.misses:
            disturbed += 1
    ok = disturbed == 0 and overruns > 0
    return ok, f"{trials} trials, {overruns} overrun jobs cut off, {disturbed} trials disturbed other jobs"


# -- S1 golden fixture ----------------------------------------------------------------------


def check_s1_golden():
    exp = load_fixture("s1_expected.json")
    table = s1_table()
    problems = []
    ivs = [[iv.start, iv.end, iv.owner, iv.offline_sc] for iv in compute_intervals(table, 0)]
    if ivs != exp["intervals"]:
        problems.append(f"intervals {ivs}")
    if [v for _, v in sorted(recompute_sc_from_table(table).items())] != exp["sc"]:
        problems.append("oracle SC")
    for label, task in (("J", J), ("J2", J2), ("J3", J3)):
        state = init_runtime(table)
        d = eng.acceptance_test(state, job_for(state, task), 0)
        want = exp["verdicts"][label]
        got = {"accepted": d.accepted, "available_sc": d.available_sc}
        if d.accepted:
            got["placement"] = [list(p) for p in d.placement]
        if got != want:
            problems.append(f"{label}: {got}")
    state = init_runtime(table)
    job = job_for(state, J)
    eng.guarantee(state, job, eng.acceptance_test(state, job, 0))
    d2 = eng.acceptance_test(state, job_for(state, J2), 0)
    if {"accepted": d2.accepted, "available_sc": d2.available_sc} != exp["verdicts"]["J2_after_J"]:
        problems.append("J2 after J")
    label = {0: "A", 1: "B", IDLE: "IDLE", job.uid: "J"}
    row = [label[u] for u in state.cell_jobs[0][:6]]
    if row != exp["after_J"]["row"]:
        problems.append(f"row {row}")
    after = [[iv.start, iv.end, label[state.cell_jobs[0][iv.start]]] for iv in state.cycle_intervals(0)]
    if after != exp["after_J"]["intervals"]:
        problems.append(f"post intervals {after}")
    if [iv.runtime_sc for iv in state.cycle_intervals(0)] != exp["after_J"]["sc"]:
        problems.append("post SC")
    sim = simulate(table, [(0, J)])
    if names(sim.sequence[0]) != exp["sequence_with_J"]:
        problems.append(f"sequence {names(sim.sequence[0])}")
    detail = "intervals, SC {0,1,0,1}, J/J2/J3 verdicts, [A,A,J,B,B,J] reproduced"
    return not problems, detail if not problems else "; ".join(problems)


# -- pytest entry points ------------------------------------------------------------------------


def test_guarantee_soundness(capsys):
    ok, detail = check_guarantee_soundness()
    assert report(capsys, "guarantee soundness", ok, detail), detail


def test_oracle_equivalence(capsys):
    ok, detail = check_oracle_equivalence()
    assert report(capsys, "oracle equivalence", ok, detail), detail


def test_sc_conservation(capsys):
    ok, detail = check_sc_conservation()
    assert report(capsys, "SC conservation", ok, detail), detail


def test_reject_purity(capsys):
    ok, detail = check_reject_purity()
    assert report(capsys, "reject purity", ok, detail), detail


def test_uunifast(capsys):
    ok, detail = check_uunifast()
    assert report(capsys, "UUniFast", ok, detail), detail


def test_determinism(capsys, tmp_path):
    ok, detail = check_determinism(tmp_path)
    assert report(capsys, "determinism", ok, detail), detail


def test_isolation(capsys):
    ok, detail = check_isolation()
    assert report(capsys, "isolation", ok, detail), detail


def test_s1_golden(capsys):
    ok, detail = check_s1_golden()
    assert report(capsys, "S1 golden fixture", ok, detail), detail


if __name__ == "__main__":
    import tempfile

    checks = [
        ("guarantee soundness", check_guarantee_soundness),
        ("oracle equivalence", check_oracle_equivalence),
        ("SC conservation", check_sc_conservation),
        ("reject purity", check_reject_purity),
        ("UUniFast", check_uunifast),
        ("determinism", lambda: check_determinism(Path(tempfile.mkdtemp()))),
        ("isolation", check_isolation),
        ("S1 golden fixture", check_s1_golden),
    ]
    results = [report(None, name, *fn()) for name, fn in checks]
    sys.exit(0 if all(results) else 1)
