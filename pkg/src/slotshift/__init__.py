"""Slot-shifting scheduling engine and simulator for partitioned TT cores."""

from .engine import (
    AcceptanceDecision,
    EngineConfig,
    EngineState,
    ExecutionModel,
    acceptance_test,
    add_periodic_permanent,
    guarantee,
    init_runtime,
    run_slot_boundary,
)
from .intervals import Interval, compute_intervals, total_sc
from .model import IDLE, Job, JobState, SchedulingTable, SystemConfig, TaskKind, TaskSpec, validate_task_set
from .simulate import simulate
from .tablegen import Infeasible, build_table, partition_tasks
from .workload import WorkloadParams, generate_arrivals, generate_task_set, uunifast

__version__ = "0.1.0"
