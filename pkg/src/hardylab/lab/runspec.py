"""Parsing and validation of RunSpec documents, plus builders for the objects they name."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from jsonschema import Draft202012Validator

from ..errors import HardyLabError, ParseError, ShapeMismatch, ValidationError
from ..grid import Field, Grid, gaussian_field, make_grid, random_smooth_field
from ..linalg import hermitian_defect
from ..operators import (
    HERMITIAN_TOL,
    POTENTIAL_REGISTRY,
    GeneratorSpec,
    PotentialSpec,
    build_potential,
    system_matrix,
    zero_generator,
)
from ..propagator import EvolutionParams
from ..weights import WeightParams
from .schema import EXPERIMENTS, REQUIRED_BLOCKS, RUNSPEC_SCHEMA, SCHEMA_VERSION

_VALIDATOR = Draft202012Validator(RUNSPEC_SCHEMA)
BLOCKS = ("grid", "generator", "potential", "evolution", "weights", "carleman", "initial", "options")


@dataclass(frozen=True)
class RunSpec:
    experiment: str
    grid: dict
    generator: Optional[dict] = None
    potential: Optional[dict] = None
    evolution: Optional[dict] = None
    weights: Optional[dict] = None
    carleman: Optional[dict] = None
    initial: Optional[dict] = None
    options: dict = field(default_factory=dict)
    seed: int = 0
    output: Optional[str] = None
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        out = {"schema_version": self.schema_version, "experiment": self.experiment}
        for name in BLOCKS:
            val = getattr(self, name)
            if val is not None and (val or name != "options"):
                out[name] = copy.deepcopy(val)
        out["seed"] = self.seed
        if self.output is not None:
            out["output"] = self.output
        return out

    def replace(self, **changes) -> "RunSpec":
        d = self.to_dict()
        d.update(changes)
        return parse_runspec(d)


def to_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def _path(err) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        missing = err.message.split("'")[1] if "'" in err.message else ""
        parts.append(missing)
    if err.validator == "additionalProperties":
        extra = err.message.split("'")[1] if "'" in err.message else ""
        parts.append(extra)
    return ".".join(p for p in parts if p) or "<root>"


def _schema_violations(doc: dict) -> list:
    out = []
    for err in sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        path = _path(err)
        if path == "evolution.a" or (err.validator == "minimum" and path.endswith(".a")):
            continue  # reported by the semantic check with a clearer message
        if err.validator == "additionalProperties":
            out.append((path, "unknown key"))
        else:
            out.append((path, err.message))
    return out


def _semantic_violations(doc: dict) -> list:
    out = []
    exp = doc.get("experiment")
    if exp in REQUIRED_BLOCKS:
        for block in REQUIRED_BLOCKS[exp]:
            if block not in doc:
                out.append((block, f"block '{block}' is required for experiment '{exp}'"))
    grid = doc.get("grid") if isinstance(doc.get("grid"), dict) else {}
    m = grid.get("m")
    P = grid.get("P")
    if isinstance(P, int) and P >= 8 and P & (P - 1):
        out.append(("grid.P", "P must be a power of two"))
    gen = doc.get("generator")
    if isinstance(gen, dict):
        if "matrix" in gen and isinstance(gen["matrix"], list):
            try:
                A = np.array([[to_complex(e) for e in row] for row in gen["matrix"]])
            except (TypeError, ValueError, IndexError):
                A = None
                out.append(("generator.matrix", "entries must be numbers or [re, im] pairs"))
            if A is not None:
                if A.ndim != 2 or A.shape[0] != A.shape[1]:
                    out.append(("generator.matrix", "matrix must be square"))
                else:
                    if isinstance(m, int) and A.shape[0] != m:
                        out.append(("generator.matrix", f"matrix size {A.shape[0]} differs from grid.m = {m}"))
                    if hermitian_defect(A) > HERMITIAN_TOL:
                        out.append(("generator.matrix", "matrix must be Hermitian"))
        if "N" in gen:
            if isinstance(m, int) and gen["N"] != m:
                out.append(("generator.N", f"N = {gen['N']} must equal grid.m = {m}"))
            if isinstance(gen.get("g"), list) and len(gen["g"]) != gen["N"]:
                out.append(("generator.g", f"need N = {gen['N']} coefficients"))
    pot = doc.get("potential")
    if isinstance(pot, dict) and isinstance(pot.get("id"), str):
        if pot["id"] not in POTENTIAL_REGISTRY:
            out.append(("potential.id", f"unknown registry id {pot['id']!r}; "
                                        f"known: {sorted(POTENTIAL_REGISTRY)}"))
        elif isinstance(m, int) and m >= 1 and isinstance(pot.get("params", {}), dict):
            try:
                build_potential(pot["id"], m, **pot.get("params", {}))
            except TypeError as e:
                out.append(("potential.params", str(e)))
            except (HardyLabError, ValueError) as e:
                out.append(("potential.params", str(e)))
    ev = doc.get("evolution")
    if isinstance(ev, dict):
        a = ev.get("a")
        if isinstance(a, (int, float)) and a < 0:
            out.append(("evolution.a", "a must be >= 0: the propagator needs Re(a + ib) >= 0, "
                                       "backward heat flow is not well posed"))
        if isinstance(a, (int, float)) and isinstance(ev.get("b"), (int, float)) and a == 0 and ev["b"] == 0:
            out.append(("evolution", "a + ib must be nonzero"))
        st, re = ev.get("steps"), ev.get("record_every", 1)
        if isinstance(st, int) and isinstance(re, int) and re > 0 and st % re:
            out.append(("evolution.record_every", "steps must be a multiple of record_every"))
    ini = doc.get("initial")
    if isinstance(ini, dict):
        if isinstance(ini.get("fiber"), list) and isinstance(m, int) and len(ini["fiber"]) != m:
            out.append(("initial.fiber", f"fiber vector needs {m} entries"))
        if isinstance(ini.get("center"), list) and isinstance(grid.get("dim"), int) \
                and len(ini["center"]) != grid["dim"]:
            out.append(("initial.center", f"center needs {grid['dim']} coordinates"))
    return out


def validate_document(doc) -> list:
    """All violations as ``(path, message)`` pairs; empty when valid."""
    if not isinstance(doc, dict):
        return [("<root>", "document must be a JSON object")]
    return _schema_violations(doc) + _semantic_violations(doc)


def parse_runspec(document) -> RunSpec:
    """Parse JSON text (or an already-decoded mapping) into a validated :class:`RunSpec`."""
    if isinstance(document, (str, bytes, bytearray)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as e:
            raise ParseError(f"malformed JSON: {e}") from e
    else:
        doc = copy.deepcopy(document)
    violations = validate_document(doc)
    if violations:
        raise ValidationError(violations)
    kw = {k: doc[k] for k in BLOCKS if k in doc}
    return RunSpec(experiment=doc["experiment"], seed=int(doc.get("seed", 0)),
                   output=doc.get("output"), schema_version=doc.get("schema_version", SCHEMA_VERSION),
                   **kw)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SystemGenerator(GeneratorSpec):
    """Hermitized system matrix together with the raw input and its distance from symmetry."""

    raw_matrix: np.ndarray = None
    projection_distance: float = 0.0


def build_system_case(g, s: float, N: int, fiber_dim: Optional[int] = None) -> SystemGenerator:
    """``a_{mj} = g_m 2^{s j}`` projected to ``(A + A^H)/2``.

    ``projection_distance`` is the spectral norm of ``(A - A^H)/2``.
    """
    if fiber_dim is not None and N != fiber_dim:
        raise ShapeMismatch(f"N = {N} must equal the fiber dimension {fiber_dim}")
    A = system_matrix(g, s, N).astype(np.complex128)
    skew = 0.5 * (A - A.conj().T)
    dist = float(np.linalg.norm(skew, 2))
    return SystemGenerator(0.5 * (A + A.conj().T), raw_matrix=A, projection_distance=dist)


def spec_grid(spec: RunSpec) -> Grid:
    g = spec.grid
    return make_grid(int(g["dim"]), float(g["L"]), int(g["P"]))


def spec_generator(spec: RunSpec, block: Optional[dict] = None) -> GeneratorSpec:
    m = int(spec.grid["m"])
    gen = spec.generator if block is None else block
    if gen is None:
        return zero_generator(m)
    if "matrix" in gen:
        return GeneratorSpec(np.array([[to_complex(e) for e in row] for row in gen["matrix"]]))
    return build_system_case(gen["g"], float(gen["s"]), int(gen["N"]), m)


def spec_potential(spec: RunSpec, block: Optional[dict] = None) -> Optional[PotentialSpec]:
    pot = spec.potential if block is None else block
    if pot is None:
        return None
    return build_potential(pot["id"], int(spec.grid["m"]), **pot.get("params", {}))


def spec_evolution(spec: RunSpec, **overrides) -> EvolutionParams:
    ev = dict(spec.evolution or {})
    kw = {"coeff_a": float(ev.get("a", 0.0)), "coeff_b": float(ev.get("b", 1.0)),
          "t_end": float(ev.get("t_end", 1.0)), "steps": int(ev.get("steps", 1000)),
          "record_every": int(ev.get("record_every", 1))}
    if "scheme" in ev:
        kw["scheme"] = ev["scheme"]
    kw.update(overrides)
    return EvolutionParams(**kw)


def spec_weights(spec: RunSpec) -> WeightParams:
    w = spec.weights or {}
    return WeightParams(float(w.get("alpha", 1.0)), float(w.get("beta", 1.0)), float(w.get("gamma", 0.0)))


def _bump_profile(r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def spec_initial(spec: RunSpec, grid: Grid, block: Optional[dict] = None) -> Field:
    m = int(spec.grid["m"])
    ini = spec.initial if block is None else block
    ini = ini or {"kind": "gaussian"}
    fiber = [to_complex(v) for v in ini.get("fiber", [1.0] + [0.0] * (m - 1))]
    center = ini.get("center")
    kind = ini["kind"]
    if kind == "zero":
        return Field(grid, np.zeros(grid.shape + (m,), dtype=np.complex128))
    if kind == "gaussian":
        return gaussian_field(grid, to_complex(ini.get("coeff", 0.25)), fiber, center)
    if kind == "bump":
        c = np.zeros(grid.dim) if center is None else np.asarray(center, float)
        r = np.sqrt(sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))) / float(ini.get("radius", 1.0))
        return Field(grid, _bump_profile(r)[..., None] * np.asarray(fiber))
    rng = np.random.default_rng(spec.seed)
    return random_smooth_field(grid, m, rng, radius=2.0, width=(1.5, 2.5), momentum=0.5)
