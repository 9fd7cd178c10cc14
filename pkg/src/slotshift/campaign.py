"""Seeded experiment campaigns: generate, build, analyze, simulate, verify, report.

Defaults reproduce the overhead-experiment shape: 50 task sets, 5
repetitions each, a table horizon drawn from [480, 520] slots of 3 ms,
15 TT cores plus one manager core, half the TT capacity used by offline
tasks and another half offered by aperiodic arrivals.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import serialize
from .engine import EngineConfig, ExecutionModel
from .intervals import sc_summary
from .model import SystemConfig, TaskKind, TaskSpec, validate_task_set
from .simulate import resolve_arrivals, simulate
from .tablegen import Infeasible, build_table
from .trace import compute_metrics, write_metrics_csv
from .verify import verify_run
from .workload import WorkloadParams, generate_arrivals, generate_task_set

log = logging.getLogger(__name__)


class CampaignError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class CampaignConfig:
    seed: int = 0
    task_sets: int = 50
    repetitions: int = 5
    total_cores: int = 16
    tt_cores: int = 15
    slot_ms: float = 3.0
    horizon_min: int = 480
    horizon_max: int = 520
    horizon: Optional[int] = None  # fixed horizon instead of a per-set draw
    cycles: int = 1
    n_offline: int = 60
    n_aperiodic: int = 8
    offline_share: float = 0.5
    aperiodic_share: float = 0.5
    arrival_model: str = "sporadic"
    jitter: float = 0.5
    execution: str = "uniform"
    bcet_ratio: float = 0.5
    admission_core_policy: str = "first-fit"
    pull_forward: bool = True
    best_effort_tasks: int = 0
    verify_sample: int = 5
    write_traces: bool = False

    @classmethod
    def from_file(cls, path) -> "CampaignConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls().override(doc)

    def override(self, values: dict) -> "CampaignConfig":
        known = {f.name for f in fields(self)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown campaign keys: {sorted(unknown)}")
        d = asdict(self)
        d.update({k: v for k, v in values.items() if v is not None})
        return CampaignConfig(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def system(self) -> SystemConfig:
        return SystemConfig(self.total_cores, self.tt_cores, self.slot_ms, self.horizon or self.horizon_min)


@dataclass
class CampaignResult:
    config: CampaignConfig
    rows: list[dict] = field(default_factory=list)
    infeasible: int = 0
    verified: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    out_dir: Optional[Path] = None


def _ints(seq: np.random.SeedSequence, n: int) -> list[int]:
    return [int(x) for x in seq.generate_state(n, dtype=np.uint32)]


def make_workload(cfg: CampaignConfig, index: int):
    """Task set ``index`` of the campaign: offline tasks, aperiodic tasks, horizon."""
    ss = np.random.SeedSequence([cfg.seed, index])
    s_off, s_ap, s_h = _ints(ss, 3)
    m = cfg.tt_cores
    off_params = WorkloadParams(
        cfg.n_offline, cfg.offline_share * m, (1, 15), (15, 50), s_off
    )
    ap_params = WorkloadParams(
        cfg.n_aperiodic, cfg.aperiodic_share * m, (10, 15), (10, 15), s_ap
    )
    offline, u_off = generate_task_set(off_params, TaskKind.OFFLINE)
    aperiodic, u_ap = generate_task_set(ap_params, TaskKind.APERIODIC, first_id=len(offline))
    horizon = cfg.horizon or int(np.random.default_rng(s_h).integers(cfg.horizon_min, cfg.horizon_max + 1))
    info = {
        "index": index,
        "horizon": horizon,
        "offline_utilization": u_off,
        "aperiodic_utilization": u_ap,
        "offline_params": off_params.to_dict(),
        "aperiodic_params": ap_params.to_dict(),
    }
    return offline, aperiodic, horizon, info


def _provenance(cfg: CampaignConfig, **extra) -> dict:
    d = {"campaign": cfg.to_dict()}
    d.update(extra)
    return d


def run_experiment(cfg: CampaignConfig, out_dir=None) -> CampaignResult:
    """Run every (task set, repetition) cell; results keyed by cell, not order."""
    result = CampaignResult(cfg)
    root = None
    if out_dir is not None:
        root = Path(out_dir) / f"seed-{cfg.seed}"
        root.mkdir(parents=True, exist_ok=True)
        result.out_dir = root
        serialize.write_json({"v": 1, "campaign": cfg.to_dict()}, root / "config.json")
    params = EngineConfig(cfg.admission_core_policy, cfg.pull_forward)
    be = [
        TaskSpec(10_000 + i, TaskKind.BEST_EFFORT, 0, 0, name=f"be{i}")
        for i in range(cfg.best_effort_tasks)
    ]
    sample_rng = np.random.default_rng([cfg.seed, 0x5EED])
    n_cells = cfg.task_sets * cfg.repetitions
    sample = set(
        sample_rng.choice(n_cells, size=min(cfg.verify_sample, n_cells), replace=False).tolist()
    ) if cfg.verify_sample else set()
    analysis = []
    for i in range(cfg.task_sets):
        try:
            offline, aperiodic, horizon, info = make_workload(cfg, i)
        except ValueError as exc:
            raise CampaignError("generate", f"task set {i}: {exc}") from exc
        system = SystemConfig(cfg.total_cores, cfg.tt_cores, cfg.slot_ms, horizon)
        report = validate_task_set(offline + aperiodic, system)
        if not report.ok:
            raise CampaignError("generate", f"task set {i}: {report.violations[:3]}")
        if root is not None:
            serialize.save_taskset(
                root / "tasksets" / f"ts-{i:03d}.json", offline + aperiodic, system,
                _provenance(cfg, task_set=info),
            )
        try:
            table = build_table(offline, system)
        except Infeasible as exc:
            log.warning("task set %d infeasible: %s", i, exc)
            result.infeasible += 1
            continue
        if root is not None:
            serialize.save_table(root / "tables" / f"table-{i:03d}.json", table, _provenance(cfg, task_set=i))
        analysis.append({"task_set": i, "cores": sc_summary(table), **info})
        for rep in range(cfg.repetitions):
            s_arr, s_exec = _ints(np.random.SeedSequence([cfg.seed, i, rep]), 2)
            n_slots = cfg.cycles * horizon
            arrivals = resolve_arrivals(
                generate_arrivals(aperiodic, n_slots, s_arr, cfg.arrival_model, cfg.jitter), aperiodic
            )
            execution = ExecutionModel(cfg.execution, s_exec, cfg.bcet_ratio)
            try:
                sim = simulate(
                    table, arrivals, n_slots, tasks=be, params=params, execution=execution,
                    header={"provenance": _provenance(cfg, task_set=i, repetition=rep)},
                )
            except AssertionError as exc:
                raise CampaignError("simulate", f"task set {i} rep {rep}: {exc}") from exc
            metrics = compute_metrics(sim.trace.events, sim.trace.header)
            row = {"task_set": i, "repetition": rep, "horizon": horizon, **metrics.to_dict()}
            result.rows.append(row)
            cell = i * cfg.repetitions + rep
            if root is not None and cfg.write_traces:
                sim.trace.flush(root / "traces" / f"trace-{i:03d}-{rep}.jsonl.gz")
            if cell in sample:
                rep_report = verify_run(table, sim.trace.events, sim.trace.header, arrivals, enforce_bound=False)
                rep_report.update(task_set=i, repetition=rep)
                result.verified.append(rep_report)
                if not rep_report["ok"]:
                    raise CampaignError("verify", f"task set {i} rep {rep} diverged: {rep_report}")
    result.rows.sort(key=lambda r: (r["task_set"], r["repetition"]))
    result.summary = summarize(result)
    if root is not None:
        serialize.write_json({"v": 1, "task_sets": analysis}, root / "analysis.json")
        write_metrics_csv(result.rows, root / "metrics.csv")
        serialize.write_json(
            {"v": 1, "verify": [_brief(v) for v in result.verified]}, root / "verify.json"
        )
        serialize.write_json(
            {"v": 1, "summary": result.summary, "provenance": _provenance(cfg)}, root / "summary.json"
        )
    return result


def _brief(report: dict) -> dict:
    return {
        "task_set": report["task_set"],
        "repetition": report["repetition"],
        "ok": report["ok"],
        "replay_checked": report["replay"]["checked"],
        "replay_divergences": report["replay"].get("diverged", 0),
        "deadline_misses": report["trace"]["deadline_misses"],
    }


def summarize(result: CampaignResult) -> dict:
    rows = result.rows
    cfg = result.config
    core_slots = sum(r["core_slots"] for r in rows)
    admitted = sum(r["admitted"] for r in rows)
    rejected = sum(r["rejected"] for r in rows)
    return {
        "runs": len(rows),
        "infeasible_task_sets": result.infeasible,
        "slots": sum(r["slots"] for r in rows),
        "core_slots": core_slots,
        "tt_cores": cfg.tt_cores,
        "deadline_misses": sum(r["deadline_misses"] for r in rows),
        "admitted": admitted,
        "rejected": rejected,
        "acceptance_ratio": admitted / (admitted + rejected) if admitted + rejected else 1.0,
        "switches": sum(r["switches"] for r in rows),
        "migrations": sum(r["migrations"] for r in rows),
        "verified_runs": len(result.verified),
        "verified_ok": sum(1 for v in result.verified if v["ok"]),
    }
