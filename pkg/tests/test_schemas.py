from __future__ import annotations

import json

import pytest

from _support import FIXTURES, SCHEMAS, s1_table, schema_validator
from slotshift import serialize
from slotshift.campaign import CampaignConfig, run_experiment
from slotshift.trace import read_trace


@pytest.mark.parametrize("path", sorted(SCHEMAS.glob("*.json")), ids=lambda p: p.name)
def test_schemas_are_valid_documents(path):
    import jsonschema

    jsonschema.Draft202012Validator.check_schema(json.loads(path.read_text()))


@pytest.mark.parametrize(
    "fixture, schema",
    [
        ("s1_table.json", "table.schema.json"),
        ("s1_taskset.json", "taskset.schema.json"),
        ("s1_arrivals.json", "arrivals.schema.json"),
    ],
)
def test_fixtures_validate(fixture, schema):
    schema_validator(schema).validate(serialize.read_json(FIXTURES / fixture))


def test_fixture_matches_code_built_table():
    assert serialize.load_table(FIXTURES / "s1_table.json") == s1_table()


def test_campaign_outputs_validate(tmp_path):
    result = run_experiment(CampaignConfig(task_sets=1, repetitions=1, verify_sample=0, write_traces=True,
                                           horizon=60, tt_cores=2, total_cores=3, n_offline=6, n_aperiodic=2), tmp_path)
    root = result.out_dir
    for p in (root / "tasksets").iterdir():
        schema_validator("taskset.schema.json").validate(serialize.read_json(p))
    for p in (root / "tables").iterdir():
        schema_validator("table.schema.json").validate(serialize.read_json(p))
    events = schema_validator("trace-event.schema.json")
    for p in (root / "traces").iterdir():
        header, evs = read_trace(p)
        events.validate(header)
        for e in evs:
            events.validate(e.to_dict())


def test_schema_rejects_bad_documents():
    from jsonschema import ValidationError

    doc = serialize.read_json(FIXTURES / "s1_table.json")
    doc["cells"][0][0] = "A"
    with pytest.raises(ValidationError):
        schema_validator("table.schema.json").validate(doc)
    with pytest.raises(ValidationError):
        schema_validator("arrivals.schema.json").validate({"v": 1, "arrivals": [[0]]})
