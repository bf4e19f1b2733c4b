"""Command line: ``atiyah run|suite|check``.  Exit status 0 iff every expectation passes."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .errors import AtiyahError, ScenarioError
from .runner import run_scenario
from .scenario import parse_scenario
from .suites import SUITES, run_property_suite


def bundled_scenarios():
    """Names of the scenario files shipped with the package."""
    root = resources.files("atiyah") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".scn"))


def _read(path: str) -> str:
    p = Path(path)
    if p.exists():
        return p.read_text()
    root = resources.files("atiyah") / "scenarios"
    for name in (path, path + ".scn"):
        cand = root / name
        if cand.is_file():
            return cand.read_text()
    raise FileNotFoundError(f"no such scenario file: {path}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="atiyah", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="run a scenario file (or the name of a bundled scenario)")
    run.add_argument("file")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--json", action="store_true")
    run.add_argument("--numeric-only", action="store_true")
    suite = sub.add_parser("suite", help="run a seeded property suite")
    suite.add_argument("name", choices=SUITES)
    suite.add_argument("--trials", type=int, default=25)
    suite.add_argument("--seed", type=int, default=0)
    suite.add_argument("--json", action="store_true")
    check = sub.add_parser("check", help="parse and validate a scenario file")
    check.add_argument("file")
    sub.add_parser("list", help="list bundled scenarios")
    args = ap.parse_args(argv)

    if args.cmd == "list":
        print("\n".join(bundled_scenarios()))
        return 0
    try:
        if args.cmd == "suite":
            report = run_property_suite(args.name, args.trials, args.seed)
        else:
            sc = parse_scenario(_read(args.file))
            if args.cmd == "check":
                print(f"{sc.name}: {len(sc.charts)} charts, {len(sc.home)} cover sets, "
                      f"{len(sc.nonempty_cycles())} nonempty cycles, {len(sc.expectations)} expectations")
                return 0
            report = run_scenario(sc, args.seed, numeric_only=args.numeric_only)
    except (ScenarioError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AtiyahError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(report.to_json() if args.json else report.to_text())
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
