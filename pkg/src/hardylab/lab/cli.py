"""``hardy-lab`` command line: ``run``, ``suite acceptance`` and ``schema``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from ..errors import ParseError, ValidationError
from .experiments import run_experiment
from .runspec import parse_runspec
from .schema import RUNSPEC_SCHEMA, suite_specs


def _report(name: str, bundle, out=None) -> None:
    out = out or sys.stdout
    status = "PASS" if bundle.passed else "FAIL"
    extra = f" error={bundle.error['type']}: {bundle.error['message']}" if bundle.error else ""
    failed = [k for k, v in bundle.verdicts.items() if not v]
    if failed:
        extra += f" failed={','.join(failed)}"
    print(f"{status} {name} ({bundle.provenance.get('wall_time_s', 0.0):.1f} s){extra}", file=out)


def cmd_run(args) -> int:
    try:
        with open(args.spec) as fh:
            text = fh.read()
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        print(f"parse-error: {e}", file=sys.stderr)
        return 2
    if args.seed is not None:
        doc["seed"] = args.seed
    try:
        spec = parse_runspec(doc)
    except (ParseError, ValidationError) as e:
        kind = "validation-error" if isinstance(e, ValidationError) else "parse-error"
        for path, msg in getattr(e, "violations", [("<root>", str(e))]):
            print(f"{kind}: {path}: {msg}", file=sys.stderr)
        return 2
    out = args.out or spec.output or "."
    bundle = run_experiment(spec, threads=args.threads)
    bundle.write(out)
    _report(spec.experiment, bundle)
    return 0 if bundle.passed else 1


def cmd_suite(args) -> int:
    specs = suite_specs()
    parsed = {name: parse_runspec(doc) for name, doc in specs.items()}

    def job(name):
        return name, run_experiment(parsed[name], threads=1)

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as ex:
        results = list(ex.map(job, parsed))
    ok = True
    summary = {}
    for name, bundle in results:
        bundle.write(os.path.join(args.out, name))
        _report(name, bundle)
        summary[name] = bundle.passed
        ok &= bundle.passed
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "suite.json"), "w") as fh:
        json.dump({"passed": ok, "experiments": summary}, fh, indent=2, sort_keys=True)
    print(f"{'PASS' if ok else 'FAIL'} suite acceptance")
    return 0 if ok else 1


def cmd_schema(args) -> int:
    print(json.dumps(RUNSPEC_SCHEMA, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardy-lab", description="Desk-scale uniqueness experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one RunSpec document")
    r.add_argument("spec")
    r.add_argument("--out", default=None)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--threads", type=int, default=1)
    r.set_defaults(func=cmd_run)
    s = sub.add_parser("suite", help="run a named suite")
    s.add_argument("name", choices=["acceptance"])
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    s.set_defaults(func=cmd_suite)
    sc = sub.add_parser("schema", help="print the RunSpec JSON schema")
    sc.set_defaults(func=cmd_schema)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
