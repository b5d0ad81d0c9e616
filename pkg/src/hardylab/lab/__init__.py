"""Declarative experiment runner."""
from .bundle import BUNDLE_SCHEMA, ResultBundle, read_bundle
from .experiments import EXPERIMENT_FUNCS, run_experiment
from .runspec import RunSpec, SystemGenerator, build_system_case, parse_runspec, validate_document
from .schema import DEFAULT_SPECS, EXPERIMENTS, REQUIRED_BLOCKS, RUNSPEC_SCHEMA, default_spec, suite_specs

__all__ = [
    "BUNDLE_SCHEMA", "ResultBundle", "read_bundle", "EXPERIMENT_FUNCS", "run_experiment",
    "RunSpec", "SystemGenerator", "build_system_case", "parse_runspec", "validate_document",
    "DEFAULT_SPECS", "EXPERIMENTS", "REQUIRED_BLOCKS", "RUNSPEC_SCHEMA", "default_spec", "suite_specs",
]
