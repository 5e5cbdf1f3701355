from __future__ import annotations

import importlib.resources as resources
import json

import pytest

import cal_infill as ci
from cal_infill.types import ConfidenceCurve


def data_text(name: str) -> str:
    return resources.files("cal_infill").joinpath("data", name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def reference_bias() -> ci.BiasModel:
    return ci.BiasModel.from_json_dict(json.loads(data_text("reference_bias.json")))


@pytest.fixture(scope="session")
def under_curve() -> ConfidenceCurve:
    return ConfidenceCurve.from_records(ci.parse_probe_log(data_text("demo_curve_underestimate.jsonl")))


@pytest.fixture(scope="session")
def over_curve() -> ConfidenceCurve:
    return ConfidenceCurve.from_records(ci.parse_probe_log(data_text("demo_curve_overestimate.jsonl")))


@pytest.fixture(scope="session")
def full_curve() -> ConfidenceCurve:
    return ConfidenceCurve.from_records(ci.parse_probe_log(data_text("demo_curve_full.jsonl")))


@pytest.fixture(scope="session")
def demo_task() -> ci.InfillTask:
    return ci.parse_tasks(data_text("demo_tasks.jsonl"))[0]
