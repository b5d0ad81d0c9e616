import copy
import json
import shutil
import subprocess

import numpy as np
import pytest
from jsonschema import Draft202012Validator

from hardylab.errors import ParseError, ValidationError
from hardylab.lab import (
    BUNDLE_SCHEMA, DEFAULT_SPECS, EXPERIMENTS, REQUIRED_BLOCKS, RUNSPEC_SCHEMA, build_system_case,
    parse_runspec, read_bundle, run_experiment, suite_specs, validate_document,
)
from hardylab.lab.cli import main
from hardylab.lab.runspec import spec_generator, spec_initial, spec_grid

MINIMAL = {
    "experiment": "free-oracle",
    "grid": {"dim": 1, "L": 16.0, "P": 512, "m": 2},
    "evolution": {"a": 0.0, "b": 1.0, "t_end": 1.0, "steps": 1000},
}


def _paths(doc):
    return [p for p, _ in validate_document(doc)]


def _with(doc, **changes):
    d = copy.deepcopy(doc)
    d.update(changes)
    return d


# --- parsing and validation -----------------------------------------------------------

def test_minimal_spec_valid():
    spec = parse_runspec(MINIMAL)
    assert spec.experiment == "free-oracle" and spec.seed == 0


def test_parse_from_text():
    assert parse_runspec(json.dumps(MINIMAL)).grid["P"] == 512
    with pytest.raises(ParseError):
        parse_runspec("{not json")


def test_missing_weights_named():
    doc = _with(MINIMAL, experiment="log-convexity")
    with pytest.raises(ValidationError) as e:
        parse_runspec(doc)
    assert "weights" in [p for p, _ in e.value.violations]


def test_negative_a_cites_propagator_constraint():
    doc = copy.deepcopy(MINIMAL)
    doc["evolution"]["a"] = -1.0
    v = dict(validate_document(doc))
    assert "evolution.a" in v and "propagator" in v["evolution.a"]


def test_unknown_keys_rejected_everywhere():
    doc = copy.deepcopy(MINIMAL)
    doc["grid"]["spacing"] = 0.1
    doc["colour"] = "blue"
    v = dict(validate_document(doc))
    assert v.get("grid.spacing") == "unknown key" and v.get("colour") == "unknown key"


def test_all_violations_reported_together():
    doc = copy.deepcopy(MINIMAL)
    doc["grid"]["P"] = 500
    doc["evolution"]["record_every"] = 7
    doc["generator"] = {"matrix": [[0, 1], [0, 0]]}
    paths = _paths(doc)
    for want in ("grid.P", "evolution.record_every", "generator.matrix"):
        assert want in paths


def test_semantic_checks():
    doc = _with(MINIMAL, potential={"id": "nope"}, initial={"kind": "gaussian", "fiber": [1]})
    paths = _paths(doc)
    assert "potential.id" in paths and "initial.fiber" in paths
    zero = copy.deepcopy(MINIMAL)
    zero["evolution"]["b"] = 0.0
    assert "evolution" in _paths(zero)
    sysdoc = _with(MINIMAL, generator={"g": [1, 2], "s": 1.0, "N": 3})
    assert {"generator.N", "generator.g"} <= set(_paths(sysdoc))


def test_complex_matrix_entries():
    doc = _with(MINIMAL, generator={"matrix": [[1, [0, 1]], [[0, -1], -1]]})
    gen = spec_generator(parse_runspec(doc))
    assert gen.matrix[0, 1] == 1j


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_default_specs_valid(name):
    spec = parse_runspec(DEFAULT_SPECS[name])
    for block in REQUIRED_BLOCKS[name]:
        assert getattr(spec, block)


def test_suite_specs_valid():
    specs = suite_specs()
    assert set(EXPERIMENTS) <= set(specs)
    for doc in specs.values():
        assert validate_document(doc) == []


def test_schema_is_valid_draft_2020_12():
    Draft202012Validator.check_schema(RUNSPEC_SCHEMA)
    Draft202012Validator.check_schema(BUNDLE_SCHEMA)


def test_initial_kinds():
    base = parse_runspec(MINIMAL)
    g = spec_grid(base)
    assert not np.any(spec_initial(base.replace(initial={"kind": "zero"}), g).values)
    r1 = spec_initial(base.replace(initial={"kind": "random"}, seed=4), g).values
    r2 = spec_initial(base.replace(initial={"kind": "random"}, seed=4), g).values
    assert np.array_equal(r1, r2)


# --- system case -------------------------------------------------------------------------

def test_system_case_symmetric_input():
    s, N = -0.5, 4
    g = [2.0 ** (s * m) for m in range(1, N + 1)]
    gen = build_system_case(g, s, N)
    assert gen.projection_distance == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(gen.matrix, gen.raw_matrix)


def test_system_case_single_mode():
    gen = build_system_case([3.0], 1.0, 1)
    assert gen.matrix.shape == (1, 1) and gen.matrix[0, 0] == pytest.approx(6.0)
    assert gen.projection_distance == 0.0


def test_system_case_projection_distance():
    g, s, N = [1.0, 0.6, 0.3], -1.0, 3
    gen = build_system_case(g, s, N)
    j = np.arange(1, N + 1)
    A = np.array(g)[:, None] * (2.0 ** (s * j))[None, :]
    assert gen.projection_distance == pytest.approx(np.linalg.norm((A - A.T) / 2, 2), rel=1e-12)
    assert np.allclose(gen.matrix, (A + A.T) / 2)


# --- experiments and bundles ------------------------------------------------------------

def test_free_oracle_default():
    b = run_experiment(parse_runspec(DEFAULT_SPECS["free-oracle"]))
    assert b.error is None and b.metrics["relative_error"] <= 1e-6 and b.passed


def test_hardy_sharp_default():
    b = run_experiment(parse_runspec(DEFAULT_SPECS["hardy-sharp"]))
    assert abs(b.metrics["product_alphabeta"] / 4.0 - 1.0) <= 0.02
    assert b.labels["classification"] == "sharp-gaussian"


def test_theorem1_zero_solution():
    doc = _with(DEFAULT_SPECS["theorem1-decay"], initial={"kind": "zero"})
    b = run_experiment(parse_runspec(doc))
    assert b.labels["status"] == "zero-solution" and b.verdicts == {"zero-solution": True}
    assert "product_alphabeta" not in b.metrics


def _small_sweep(seed):
    doc = copy.deepcopy(DEFAULT_SPECS["carleman-sweep"])
    doc["carleman"]["n_fields"] = 4
    doc["carleman"]["n_times"] = 65
    doc["seed"] = seed
    return parse_runspec(doc)


def test_determinism():
    a, b = run_experiment(_small_sweep(7)), run_experiment(_small_sweep(7), threads=2)
    assert a.metrics.keys() == b.metrics.keys()
    for k in a.metrics:
        assert abs(a.metrics[k] - b.metrics[k]) <= 1e-12 * max(1.0, abs(a.metrics[k]))
    c = run_experiment(_small_sweep(8))
    assert c.metrics["min_ratio_schrodinger"] != a.metrics["min_ratio_schrodinger"]


def test_partial_bundle_on_failure(tmp_path):
    doc = copy.deepcopy(DEFAULT_SPECS["log-convexity"])
    doc["evolution"]["a"] = 1.0
    doc["evolution"]["b"] = 0.0
    b = run_experiment(parse_runspec(doc))
    assert b.error["type"] == "ValueError" and not b.passed
    b.write(str(tmp_path))
    data = read_bundle(str(tmp_path))
    Draft202012Validator(BUNDLE_SCHEMA).validate(data)
    assert data["error"]["message"] and data["provenance"]["seed"] == 0


def test_bundle_files(tmp_path):
    b = run_experiment(parse_runspec(DEFAULT_SPECS["hardy-sharp"]))
    b.write(str(tmp_path))
    data = read_bundle(str(tmp_path))
    Draft202012Validator(BUNDLE_SCHEMA).validate(data)
    sweep = (tmp_path / "series" / "sweep.csv").read_text().splitlines()
    assert sweep[0] == "coeff,product" and len(sweep) == 21
    assert data["spec_echo"]["experiment"] == "hardy-sharp"


def test_nonfinite_metrics_become_null(tmp_path):
    from hardylab.lab.bundle import ResultBundle
    b = ResultBundle(spec_echo={})
    b.metric("x", float("inf"))
    b.verdict("ok", True)
    data = b.to_json()
    assert data["metrics"]["x"] is None and data["nonfinite_metrics"]["x"] == "inf"


# --- command line -----------------------------------------------------------------------

def test_cli_run_and_exit_codes(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(DEFAULT_SPECS["hardy-sharp"]))
    assert main(["run", str(spec), "--out", str(tmp_path / "out"), "--seed", "3"]) == 0
    assert read_bundle(str(tmp_path / "out"))["provenance"]["seed"] == 3
    assert "PASS hardy-sharp" in capsys.readouterr().out

    bad = copy.deepcopy(DEFAULT_SPECS["hardy-sharp"])
    bad["evolution"]["a"] = -1
    spec.write_text(json.dumps(bad))
    assert main(["run", str(spec), "--out", str(tmp_path / "bad")]) == 2
    assert "evolution.a" in capsys.readouterr().err

    spec.write_text("{")
    assert main(["run", str(spec)]) == 2

    fail = copy.deepcopy(DEFAULT_SPECS["log-convexity"])
    fail["evolution"].update(a=1.0, b=0.0)
    spec.write_text(json.dumps(fail))
    assert main(["run", str(spec), "--out", str(tmp_path / "fail")]) == 1
    assert read_bundle(str(tmp_path / "fail"))["error"]["type"] == "ValueError"


def test_cli_schema(capsys):
    assert main(["schema"]) == 0
    assert json.loads(capsys.readouterr().out) == RUNSPEC_SCHEMA


def test_console_script_installed():
    exe = shutil.which("hardy-lab")
    assert exe is not None
    out = subprocess.run([exe, "schema"], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["$schema"].endswith("2020-12/schema")
