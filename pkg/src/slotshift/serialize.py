"""JSON documents for task sets and scheduling tables.

Both documents carry ``"v": 1`` and an optional ``provenance`` object
holding the resolved configuration and seed that produced them. Output is
byte-stable: keys are sorted and floats are written by ``json``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .model import IDLE, SchedulingTable, SystemConfig, TaskSpec

FORMAT_VERSION = 1


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_json(doc: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc), encoding="utf-8")
    return path


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from exc


def _check_version(doc: dict, what: str):
    v = doc.get("v")
    if v != FORMAT_VERSION:
        raise ValueError(f"unsupported {what} format version {v!r}")


def taskset_to_dict(
    tasks: Sequence[TaskSpec],
    config: Optional[SystemConfig] = None,
    provenance: Optional[dict] = None,
) -> dict:
    doc = {"v": FORMAT_VERSION, "tasks": [t.to_dict() for t in tasks]}
    if config is not None:
        doc["config"] = config.to_dict()
    if provenance is not None:
        doc["provenance"] = provenance
    return doc


def taskset_from_dict(doc: dict) -> tuple[list[TaskSpec], Optional[SystemConfig]]:
    _check_version(doc, "taskset")
    tasks = [TaskSpec.from_dict(d) for d in doc["tasks"]]
    config = SystemConfig.from_dict(doc["config"]) if "config" in doc else None
    return tasks, config


def table_to_dict(table: SchedulingTable, provenance: Optional[dict] = None) -> dict:
    rows = [[None if c == IDLE else int(c) for c in row] for row in table.cells.tolist()]
    doc = {
        "v": FORMAT_VERSION,
        "config": table.config.to_dict(),
        "tasks": [t.to_dict() for t in table.tasks],
        "cells": rows,
        "excluded": [list(e) for e in table.excluded],
    }
    if provenance is not None:
        doc["provenance"] = provenance
    return doc


def table_from_dict(doc: dict) -> SchedulingTable:
    _check_version(doc, "table")
    config = SystemConfig.from_dict(doc["config"])
    cells = np.array(
        [[IDLE if c is None else int(c) for c in row] for row in doc["cells"]],
        dtype=np.int32,
    ).reshape(config.tt_cores, config.horizon)
    tasks = [TaskSpec.from_dict(d) for d in doc.get("tasks", [])]
    excluded = [tuple(e) for e in doc.get("excluded", [])]
    return SchedulingTable(config, cells, tasks, excluded)


def save_taskset(path, tasks, config=None, provenance=None) -> Path:
    return write_json(taskset_to_dict(tasks, config, provenance), path)


def load_taskset(path) -> tuple[list[TaskSpec], Optional[SystemConfig]]:
    return taskset_from_dict(read_json(path))


def save_table(path, table: SchedulingTable, provenance=None) -> Path:
    return write_json(table_to_dict(table, provenance), path)


def load_table(path) -> SchedulingTable:
    return table_from_dict(read_json(path))
