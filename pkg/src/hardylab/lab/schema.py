"""RunSpec JSON schema, per-experiment block requirements and embedded defaults."""
from __future__ import annotations

import copy

SCHEMA_VERSION = "1.0"

EXPERIMENTS = (
    "free-oracle", "unitarity", "log-convexity", "appell-residual", "carleman-sweep",
    "hardy-sharp", "theorem1-decay", "theorem4-heat", "theorem51-bound", "system-case",
)

REQUIRED_BLOCKS = {
    "free-oracle": ("grid", "evolution"),
    "unitarity": ("grid", "generator", "potential", "evolution"),
    "log-convexity": ("grid", "evolution", "weights"),
    "appell-residual": ("grid", "evolution", "weights"),
    "carleman-sweep": ("grid", "carleman"),
    "hardy-sharp": ("grid", "evolution", "weights"),
    "theorem1-decay": ("grid", "potential", "evolution", "weights"),
    "theorem4-heat": ("grid", "evolution"),
    "theorem51-bound": ("grid", "potential", "evolution", "weights"),
    "system-case": ("grid", "generator", "potential", "evolution", "weights"),
}

_number = {"type": "number"}
_complex = {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}
_pair = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}


def _block(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


RUNSPEC_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hardy-lab RunSpec",
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "properties": {
        "schema_version": {"type": "string"},
        "experiment": {"enum": list(EXPERIMENTS)},
        "grid": _block({
            "dim": {"type": "integer", "minimum": 1, "maximum": 3},
            "L": {"type": "number", "exclusiveMinimum": 0},
            "P": {"type": "integer", "minimum": 8},
            "m": {"type": "integer", "minimum": 1},
        }, ("dim", "L", "P", "m")),
        "generator": {
            "oneOf": [
                _block({"matrix": {"type": "array", "items": {"type": "array", "items": _complex}}},
                       ("matrix",)),
                _block({"g": {"type": "array", "items": _number, "minItems": 1},
                        "s": _number, "N": {"type": "integer", "minimum": 1}},
                       ("g", "s", "N")),
            ]
        },
        "potential": _block({"id": {"type": "string"}, "params": {"type": "object"}}, ("id",)),
        "evolution": _block({
            "a": _number, "b": _number,
            "t_end": {"type": "number", "exclusiveMinimum": 0},
            "steps": {"type": "integer", "minimum": 1},
            "record_every": {"type": "integer", "minimum": 1},
            "scheme": {"enum": ["exact-free", "strang-split", "duhamel"]},
        }, ("a", "b", "t_end", "steps")),
        "weights": _block({
            "alpha": {"type": "number", "exclusiveMinimum": 0},
            "beta": {"type": "number", "exclusiveMinimum": 0},
            "gamma": {"type": "number", "minimum": 0},
        }, ("alpha", "beta")),
        "carleman": _block({
            "mu_c": {"type": "number", "exclusiveMinimum": 0},
            "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "R": {"type": "number", "exclusiveMinimum": 0},
            "R_values": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                         "minItems": 1},
            "n_fields": {"type": "integer", "minimum": 1},
            "n_times": {"type": "integer", "minimum": 16},
        }),
        "initial": _block({
            "kind": {"enum": ["gaussian", "zero", "bump", "random"]},
            "coeff": _complex,
            "fiber": {"type": "array", "items": _complex, "minItems": 1},
            "center": {"type": "array", "items": _number},
            "radius": {"type": "number", "exclusiveMinimum": 0},
        }, ("kind",)),
        "options": _block({
            "samples": {"type": "integer", "minimum": 3},
            "sweep_count": {"type": "integer", "minimum": 1},
            "sweep_range": _pair,
            "epsilons": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
            "band": {"type": "number", "exclusiveMinimum": 0},
            "fit_window": _pair,
            "output_times": {"type": "integer", "minimum": 7},
            "order_potential": {"type": "object"},
        }),
        "seed": {"type": "integer"},
        "output": {"type": "string"},
    },
}

_GAUSS = {"kind": "gaussian", "coeff": 0.25, "fiber": [1.0, [0.0, 0.5]]}
_A_SMALL = [[0.3, 0.1], [0.1, -0.2]]
_A_NSD = [[-0.5, 0.2], [0.2, -0.3]]
_SCHRODINGER = {"a": 0.0, "b": 1.0, "t_end": 1.0, "steps": 1000}
_G16 = {"dim": 1, "L": 16.0, "P": 512, "m": 2}
_G20 = {"dim": 1, "L": 20.0, "P": 512, "m": 2}

DEFAULT_SPECS = {
    "free-oracle": {
        "experiment": "free-oracle", "grid": _G16, "evolution": _SCHRODINGER,
        "generator": {"matrix": _A_SMALL}, "initial": _GAUSS,
        "options": {"order_potential": {"id": "gaussian_well", "params": {"depth": 2.0}}},
    },
    "unitarity": {
        "experiment": "unitarity", "grid": _G20, "generator": {"matrix": _A_SMALL},
        "potential": {"id": "gaussian_coupling", "params": {"width": 2.0}},
        "evolution": _SCHRODINGER, "initial": _GAUSS,
    },
    "log-convexity": {
        "experiment": "log-convexity", "grid": _G20,
        "evolution": dict(_SCHRODINGER, steps=1024), "weights": {"alpha": 4.0, "beta": 5.0},
        "initial": _GAUSS, "options": {"samples": 33},
    },
    "appell-residual": {
        "experiment": "appell-residual", "grid": {"dim": 1, "L": 32.0, "P": 1024, "m": 2},
        "evolution": _SCHRODINGER, "weights": {"alpha": 1.0, "beta": 2.0, "gamma": 0.005},
        "initial": _GAUSS, "options": {"output_times": 101},
    },
    "carleman-sweep": {
        "experiment": "carleman-sweep", "grid": _G16, "generator": {"matrix": _A_SMALL},
        "carleman": {"R_values": [8.0, 16.0, 32.0], "n_fields": 100, "n_times": 257},
    },
    "hardy-sharp": {
        "experiment": "hardy-sharp", "grid": _G16, "evolution": _SCHRODINGER,
        "weights": {"alpha": 2.0, "beta": 2.0},
        "options": {"sweep_count": 20, "sweep_range": [0.2, 2.0], "band": 0.02},
    },
    "theorem1-decay": {
        "experiment": "theorem1-decay", "grid": _G20,
        "potential": {"id": "decaying_pulse", "params": {"amplitude": 0.3, "decay": 0.25}},
        "evolution": _SCHRODINGER, "weights": {"alpha": 4.0, "beta": 4.0},
        "initial": _GAUSS, "options": {"band": 0.02},
    },
    "theorem4-heat": {
        "experiment": "theorem4-heat", "grid": _G16, "generator": {"matrix": _A_NSD},
        "evolution": {"a": 1.0, "b": 0.0, "t_end": 1.0, "steps": 1000},
        "initial": {"kind": "bump", "radius": 1.0, "fiber": [1.0, 0.5]},
    },
    "theorem51-bound": {
        "experiment": "theorem51-bound", "grid": _G20,
        "potential": {"id": "gaussian_well", "params": {"width": 2.0}},
        "evolution": _SCHRODINGER, "weights": {"alpha": 4.0, "beta": 4.0}, "initial": _GAUSS,
    },
    "system-case": {
        "experiment": "system-case", "grid": dict(_G20, m=3),
        "generator": {"g": [1.0, 0.6, 0.3], "s": -1.0, "N": 3},
        "potential": {"id": "system_coupling", "params": {"width": 2.0}},
        "evolution": _SCHRODINGER, "weights": {"alpha": 4.0, "beta": 4.0},
        "initial": {"kind": "gaussian", "coeff": 0.25, "fiber": [1.0, [0.0, 0.5], 0.25]},
    },
}

# extra named runs used by the acceptance suite
SUITE_VARIANTS = {
    "unitarity-dissipative": dict(
        DEFAULT_SPECS["unitarity"], generator={"matrix": _A_NSD},
        potential={"id": "gaussian_well", "params": {"width": 2.0}},
        evolution={"a": 1.0, "b": 0.0, "t_end": 1.0, "steps": 1000}),
    "log-convexity-potential": dict(
        DEFAULT_SPECS["log-convexity"],
        potential={"id": "decaying_pulse", "params": {"amplitude": 0.2}}),
}


def default_spec(experiment: str) -> dict:
    if experiment not in DEFAULT_SPECS:
        raise KeyError(f"unknown experiment {experiment!r}")
    return copy.deepcopy(DEFAULT_SPECS[experiment])


def suite_specs() -> dict:
    out = {name: default_spec(name) for name in EXPERIMENTS}
    out.update({k: copy.deepcopy(v) for k, v in SUITE_VARIANTS.items()})
    return out
