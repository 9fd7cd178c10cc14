"""Command-line front end.

Settings resolve in three layers: built-in defaults, then the JSON file
given with ``--config``, then explicit flags. Every file written embeds the
resolved settings and seed under ``provenance``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import serialize
from .campaign import CampaignConfig, CampaignError, make_workload, run_experiment
from .engine import EngineConfig, ExecutionModel
from .intervals import compute_intervals, sc_summary
from .model import SystemConfig, TaskKind, TaskSpec, validate_task_set
from .simulate import resolve_arrivals, simulate
from .tablegen import Infeasible, build_table
from .trace import (
    TraceParseError,
    compute_metrics,
    export_timeline,
    read_trace,
    write_metrics_csv,
    write_metrics_json,
)
from .verify import verify_run
from .workload import generate_arrivals

log = logging.getLogger("slotshift")

# flag dest -> campaign key
FLAG_KEYS = {
    "seed": "seed",
    "cores": "total_cores",
    "tt_cores": "tt_cores",
    "slot_ms": "slot_ms",
    "horizon": "horizon",
    "repetitions": "repetitions",
    "verify_sample": "verify_sample",
    "task_sets": "task_sets",
    "n_offline": "n_offline",
    "n_aperiodic": "n_aperiodic",
    "arrival_model": "arrival_model",
    "execution": "execution",
    "bcet_ratio": "bcet_ratio",
    "policy": "admission_core_policy",
    "best_effort": "best_effort_tasks",
    "cycles": "cycles",
}


class CliError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


def resolve_config(args) -> CampaignConfig:
    cfg = CampaignConfig()
    if getattr(args, "config", None):
        cfg = CampaignConfig.from_file(args.config)
    flags = {key: getattr(args, dest, None) for dest, key in FLAG_KEYS.items()}
    if getattr(args, "no_pull_forward", False):
        flags["pull_forward"] = False
    if getattr(args, "write_traces", False):
        flags["write_traces"] = True
    return cfg.override(flags)


def _emit_json(doc, out: Optional[str]):
    if out:
        serialize.write_json(doc, out)
    else:
        sys.stdout.write(serialize.dumps(doc))


def _system(cfg: CampaignConfig, horizon: int) -> SystemConfig:
    return SystemConfig(cfg.total_cores, cfg.tt_cores, cfg.slot_ms, horizon)


def _provenance(cfg: CampaignConfig, command: str, **extra) -> dict:
    d = {"command": command, "config": cfg.to_dict()}
    d.update(extra)
    return d


def load_arrivals(path, tasks: Sequence[TaskSpec]) -> tuple[list[tuple[int, int]], list[TaskSpec]]:
    """Read an arrivals file; extra task definitions may ride along in it."""
    doc = serialize.read_json(path)
    if doc.get("v") != 1 or "arrivals" not in doc:
        raise ValueError(f"{path}: not an arrivals document")
    extra = [TaskSpec.from_dict(d) for d in doc.get("tasks", [])]
    return [(int(s), int(i)) for s, i in doc["arrivals"]], extra


def save_arrivals(path, arrivals, extra_tasks=(), provenance=None):
    doc = {"v": 1, "arrivals": [[int(s), int(i)] for s, i in sorted(arrivals)]}
    if extra_tasks:
        doc["tasks"] = [t.to_dict() for t in sorted(extra_tasks, key=lambda t: t.id)]
    if provenance is not None:
        doc["provenance"] = provenance
    return serialize.write_json(doc, path)


# -- subcommands -------------------------------------------------------------


def cmd_generate(args, cfg: CampaignConfig) -> int:
    offline, aperiodic, horizon, info = make_workload(cfg, args.index)
    system = _system(cfg, horizon)
    report = validate_task_set(offline + aperiodic, system)
    if not report.ok:
        raise CliError("generate", "; ".join(report.violations))
    prov = _provenance(cfg, "generate", task_set=info)
    doc = serialize.taskset_to_dict(offline + aperiodic, system, prov)
    _emit_json(doc, args.out)
    if args.arrivals_out:
        n = cfg.cycles * horizon
        arr = generate_arrivals(aperiodic, n, cfg.seed, cfg.arrival_model, cfg.jitter)
        save_arrivals(args.arrivals_out, arr, provenance=prov)
    return 0


def cmd_build_table(args, cfg: CampaignConfig) -> int:
    tasks, system = serialize.load_taskset(args.taskset)
    if system is None or args.horizon is not None or args.cores is not None or args.tt_cores is not None:
        base = system or _system(cfg, cfg.horizon or cfg.horizon_min)
        system = SystemConfig(
            args.cores or base.total_cores,
            args.tt_cores or base.tt_cores,
            args.slot_ms or base.slot_length_ms,
            args.horizon or base.horizon,
        )
    try:
        table = build_table(tasks, system)
    except Infeasible as exc:
        raise CliError("build-table", str(exc)) from exc
    doc = serialize.table_to_dict(table, _provenance(cfg, "build-table"))
    _emit_json(doc, args.out)
    return 0


def cmd_analyze(args, cfg: CampaignConfig) -> int:
    table = serialize.load_table(args.table)
    if args.format == "json":
        doc = {
            "v": 1,
            "summary": sc_summary(table),
            "intervals": {
                str(core): [list(iv.as_tuple()) for iv in compute_intervals(table, core)]
                for core in range(table.n_cores)
            },
        }
        _emit_json(doc, args.out)
        return 0
    lines = [f"{'core':>4} {'cpu':>4} {'start':>6} {'end':>6} {'owner':>6} {'sc':>4}"]
    for core in range(table.n_cores):
        for iv in compute_intervals(table, core):
            owner = "-" if iv.owner < 0 else str(iv.owner)
            lines.append(
                f"{core:>4} {table.config.cpu_of(core):>4} {iv.start:>6} {iv.end:>6} {owner:>6} {iv.offline_sc:>4}"
            )
    lines.append("")
    for row in sc_summary(table):
        lines.append("  ".join(f"{k}={v}" for k, v in row.items()))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _load_run_inputs(args, cfg: CampaignConfig):
    table = serialize.load_table(args.table)
    tasks = []
    if args.taskset:
        tasks, _ = serialize.load_taskset(args.taskset)
    arrivals_ids: list[tuple[int, int]] = []
    if args.arrivals:
        arrivals_ids, extra = load_arrivals(args.arrivals, tasks)
        tasks = tasks + [t for t in extra if t.id not in {x.id for x in tasks}]
    return table, tasks, arrivals_ids


def _best_effort(cfg: CampaignConfig, tasks) -> list[TaskSpec]:
    first = max([t.id for t in tasks] + [9_999]) + 1
    return [TaskSpec(first + i, TaskKind.BEST_EFFORT, 0, 0, name=f"be{i}") for i in range(cfg.best_effort_tasks)]


def _run(table, tasks, arrivals_ids, cfg, n_slots, command):
    pool = list(tasks) + list(table.tasks)
    arrivals = resolve_arrivals(arrivals_ids, pool)
    be = _best_effort(cfg, pool)
    return simulate(
        table, arrivals, n_slots,
        tasks=be,
        params=EngineConfig(cfg.admission_core_policy, cfg.pull_forward),
        execution=ExecutionModel(cfg.execution, cfg.seed, cfg.bcet_ratio),
        header={"provenance": _provenance(cfg, command)},
    )


def cmd_simulate(args, cfg: CampaignConfig) -> int:
    table, tasks, arrivals_ids = _load_run_inputs(args, cfg)
    n_slots = args.slots if args.slots is not None else cfg.cycles * table.horizon
    try:
        sim = _run(table, tasks, arrivals_ids, cfg, n_slots, "simulate")
    except AssertionError as exc:
        raise CliError("simulate", str(exc)) from exc
    out = Path(args.out_dir) if args.out_dir else None
    trace_path = args.trace or (out / ("trace.jsonl.gz" if args.gzip else "trace.jsonl") if out else None)
    if trace_path:
        sim.trace.flush(trace_path)
    metrics = compute_metrics(sim.trace.events, sim.trace.header)
    if out:
        write_metrics_json(metrics, out / "metrics.json", _provenance(cfg, "simulate"))
        export_timeline(sim.trace.events, out / "timeline.csv")
    sys.stdout.write(serialize.dumps({"v": 1, "metrics": metrics.to_dict()}))
    return 0


def cmd_admit(args, cfg: CampaignConfig) -> int:
    table, tasks, arrivals_ids = _load_run_inputs(args, cfg)
    pool = {t.id: t for t in list(tasks) + list(table.tasks)}
    extra = []
    if args.task is not None:
        if args.task not in pool:
            raise CliError("admit", f"unknown task id {args.task}")
        task = pool[args.task]
    else:
        if args.wcet is None or args.deadline is None:
            raise CliError("admit", "give --task or both --wcet and --deadline")
        kind = TaskKind.RUNTIME if args.period else TaskKind.APERIODIC
        task = TaskSpec(
            max(pool, default=-1) + 1, kind, args.wcet, args.deadline,
            period=args.period, release=args.release or 0,
        )
        extra.append(task)
        pool[task.id] = task
    if task.kind not in (TaskKind.APERIODIC, TaskKind.RUNTIME):
        raise CliError("admit", f"task {task.id} is {task.kind.value}; only aperiodic and runtime-periodic tasks are admitted")
    before = [a for a in arrivals_ids if a[0] <= args.at]
    run_tasks = list(tasks) + extra
    sim = _run(table, run_tasks, before + [(args.at, task.id)], cfg, args.at + 1, "admit")
    verdict = [
        e for e in sim.trace.events
        if e.slot == args.at and e.task == task.id and e.kind in ("admit", "reject")
    ][-1]
    doc = {
        "v": 1,
        "slot": args.at,
        "task": task.to_dict(),
        "accepted": verdict.kind == "admit",
        "core": verdict.core,
        "detail": verdict.detail,
    }
    sys.stdout.write(serialize.dumps(doc))
    if args.append:
        if not args.arrivals:
            raise CliError("admit", "--append needs --arrivals")
        _, old_extra = load_arrivals(args.arrivals, tasks)
        save_arrivals(args.arrivals, arrivals_ids + [(args.at, task.id)], old_extra + extra)
    return 0 if doc["accepted"] else 3


def cmd_verify(args, cfg: CampaignConfig) -> int:
    table = serialize.load_table(args.table)
    header, events = read_trace(args.trace)
    report = verify_run(table, events, header, replay=not args.no_replay, enforce_bound=not args.unbounded)
    _emit_json({"v": 1, "report": report}, args.out)
    return 0 if report["ok"] else 1


def cmd_report(args, cfg: CampaignConfig) -> int:
    rows = []
    for path in args.traces:
        header, events = read_trace(path)
        m = compute_metrics(events, header)
        rows.append({"trace": Path(path).name, **m.to_dict()})
        if args.timeline:
            target = Path(args.timeline)
            if len(args.traces) > 1:
                target = target.with_name(f"{Path(path).name.split('.')[0]}-{target.name}")
            export_timeline(events, target)
    if args.csv:
        write_metrics_csv(rows, args.csv)
    _emit_json({"v": 1, "metrics": rows}, args.out)
    return 0


def cmd_experiment(args, cfg: CampaignConfig) -> int:
    result = run_experiment(cfg, args.out_dir)
    sys.stdout.write(serialize.dumps({"v": 1, "summary": result.summary}))
    return 1 if result.summary["deadline_misses"] else 0


# -- parser ------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("common settings")
    g.add_argument("--config", help="JSON file of campaign settings (flags override it)")
    g.add_argument("--seed", type=int)
    g.add_argument("--cores", type=int, help="total cores N (the first N-M run the manager)")
    g.add_argument("--tt-cores", type=int, help="time-triggered cores M")
    g.add_argument("--slot-ms", type=float)
    g.add_argument("--horizon", type=int, help="table horizon in slots")
    g.add_argument("--out-dir")
    g.add_argument("--repetitions", type=int)
    g.add_argument("--verify-sample", type=int)
    g.add_argument("--policy", choices=["first-fit", "best-fit"], help="admission core policy")
    g.add_argument("--no-pull-forward", action="store_true")
    g.add_argument("--execution", choices=["nominal", "uniform"])
    g.add_argument("--bcet-ratio", type=float)
    g.add_argument("--best-effort", type=int, help="number of best-effort filler tasks")
    g.add_argument("--cycles", type=int, help="table cycles to simulate")
    g.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slotshift", description="Slot-shifting TT/ET scheduling simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a task set (JSON)")
    _common(p)
    p.add_argument("--index", type=int, default=0, help="task-set index within the seed")
    p.add_argument("--task-sets", type=int, help=argparse.SUPPRESS)
    p.add_argument("--n-offline", type=int)
    p.add_argument("--n-aperiodic", type=int)
    p.add_argument("--arrival-model", choices=["sporadic", "poisson-capped"])
    p.add_argument("--arrivals-out", help="also write an arrivals file")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build-table", help="build the offline scheduling table")
    _common(p)
    p.add_argument("taskset")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_build_table)

    p = sub.add_parser("analyze", help="capacity intervals and spare capacity of a table")
    _common(p)
    p.add_argument("table")
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_analyze)

    for name, func in (("simulate", cmd_simulate), ("admit", cmd_admit)):
        p = sub.add_parser(name, help="run the engine" if name == "simulate" else "test one admission at a slot")
        _common(p)
        p.add_argument("--table", required=True)
        p.add_argument("--taskset", help="task set holding the aperiodic/runtime tasks")
        p.add_argument("--arrivals", help="arrivals file")
        p.set_defaults(func=func)
        if name == "simulate":
            p.add_argument("--slots", type=int)
            p.add_argument("--trace", help="trace output (.jsonl or .jsonl.gz)")
            p.add_argument("--gzip", action="store_true")
        else:
            p.add_argument("--at", type=int, required=True, help="arrival slot")
            p.add_argument("--task", type=int, help="id of a task in the task set")
            p.add_argument("--wcet", type=int)
            p.add_argument("--deadline", type=int)
            p.add_argument("--period", type=int, help="admit as runtime-periodic")
            p.add_argument("--release", type=int)
            p.add_argument("--append", action="store_true", help="record the arrival in --arrivals")

    p = sub.add_parser("verify", help="check a trace against the oracles")
    _common(p)
    p.add_argument("--table", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--no-replay", action="store_true")
    p.add_argument("--unbounded", action="store_true", help="replay beyond the oracle size bound")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="metrics and timeline from traces")
    _common(p)
    p.add_argument("traces", nargs="+")
    p.add_argument("--csv")
    p.add_argument("--timeline")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("experiment", help="run a full seeded campaign")
    _common(p)
    p.add_argument("--task-sets", type=int)
    p.add_argument("--n-offline", type=int)
    p.add_argument("--n-aperiodic", type=int)
    p.add_argument("--arrival-model", choices=["sporadic", "poisson-capped"])
    p.add_argument("--write-traces", action="store_true")
    p.set_defaults(func=cmd_experiment, out_dir="runs")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    stage = args.command
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except (CliError, CampaignError) as exc:
        stage = exc.stage
        msg = str(exc)
    except TraceParseError as exc:
        msg = str(exc)
    except (OSError, ValueError, KeyError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
    sys.stderr.write(f"slotshift {stage}: error: {msg}\n")
    return 2


if __name__ == "__main__":
    sys.exit(main())
