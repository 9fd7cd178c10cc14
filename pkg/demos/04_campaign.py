"""A reduced evaluation campaign written to a temporary directory."""

from __future__ import annotations

import tempfile

from slotshift.campaign import CampaignConfig, run_experiment

cfg = CampaignConfig(task_sets=2, repetitions=2, verify_sample=1, n_offline=30, n_aperiodic=4)
with tempfile.TemporaryDirectory() as tmp:
    result = run_experiment(cfg, tmp)
    for row in result.rows:
        print(
            f"set {row['task_set']} rep {row['repetition']}: acceptance {row['acceptance_ratio']:.2f},"
            f" misses {row['deadline_misses']}, switches {row['switches']}"
        )
    print({k: result.summary[k] for k in ("runs", "core_slots", "deadline_misses", "verified_ok")})
