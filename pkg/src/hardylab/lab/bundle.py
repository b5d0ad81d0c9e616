"""Self-describing result bundles: ``bundle.json`` plus ``series/<name>.csv``."""
from __future__ import annotations

import csv
import json
import math
import os
import platform
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .schema import SCHEMA_VERSION

try:
    from importlib.metadata import version as _pkg_version

    TOOL_VERSION = _pkg_version("artifact")
except Exception:  # pragma: no cover - running from a source tree without metadata
    TOOL_VERSION = "0.1.0"

BUNDLE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "spec_echo", "metrics", "series", "verdicts", "provenance"],
    "properties": {
        "schema_version": {"type": "string"},
        "spec_echo": {"type": "object"},
        "metrics": {"type": "object", "additionalProperties": {"type": ["number", "null"]}},
        "series": {"type": "object", "additionalProperties": {
            "type": "object", "required": ["file", "columns"],
            "properties": {"file": {"type": "string"},
                           "columns": {"type": "array", "items": {"type": "string"}}}}},
        "verdicts": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "labels": {"type": "object", "additionalProperties": {"type": "string"}},
        "provenance": {"type": "object", "required": ["tool_version", "seed", "wall_time_s"]},
        "error": {"type": ["object", "null"]},
    },
}


@dataclass
class Series:
    columns: tuple
    rows: list


@dataclass
class ResultBundle:
    spec_echo: dict
    metrics: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    error: Optional[dict] = None
    schema_version: str = SCHEMA_VERSION

    def metric(self, name: str, value) -> None:
        self.metrics[name] = float(value)

    def verdict(self, name: str, value) -> None:
        self.verdicts[name] = bool(value)

    def add_series(self, name: str, columns, rows) -> None:
        self.series[name] = Series(tuple(columns), [tuple(float(v) for v in r) for r in rows])

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.verdicts) and all(self.verdicts.values())

    def to_json(self) -> dict:
        def clean(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v

        return {
            "schema_version": self.schema_version,
            "spec_echo": self.spec_echo,
            "metrics": {k: clean(v) for k, v in self.metrics.items()},
            "nonfinite_metrics": {k: repr(v) for k, v in self.metrics.items()
                                  if not math.isfinite(v)},
            "series": {k: {"file": f"series/{k}.csv", "columns": list(s.columns)}
                       for k, s in self.series.items()},
            "verdicts": dict(self.verdicts),
            "labels": dict(self.labels),
            "passed": self.passed,
            "provenance": self.provenance,
            "error": self.error,
        }

    def write(self, out_dir: str) -> str:
        os.makedirs(os.path.join(out_dir, "series"), exist_ok=True)
        for name, s in self.series.items():
            with open(os.path.join(out_dir, "series", f"{name}.csv"), "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(s.columns)
                for row in s.rows:
                    w.writerow([repr(v) for v in row])
        path = os.path.join(out_dir, "bundle.json")
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
        return path


def provenance(seed: int, wall_time: float) -> dict:
    return {"tool_version": TOOL_VERSION, "seed": int(seed), "wall_time_s": float(wall_time),
            "python": platform.python_version(), "numpy": np.__version__}


def read_bundle(out_dir: str) -> dict:
    with open(os.path.join(out_dir, "bundle.json")) as fh:
        return json.load(fh)
