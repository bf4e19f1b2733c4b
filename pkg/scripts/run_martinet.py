"""Run the bundled P^3 Martinet scenario and print the full report.

    python3 scripts/run_martinet.py [--json] [--numeric-only]
"""

import argparse
from importlib import resources

from atiyah.runner import run_scenario
from atiyah.scenario import parse_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", action="store_true")
    ap.add_argument("--numeric-only", action="store_true")
    args = ap.parse_args()
    text = (resources.files("atiyah") / "scenarios" / "p3_martinet.scn").read_text()
    report = run_scenario(parse_scenario(text), numeric_only=args.numeric_only)
    print(report.to_json() if args.json else report.to_text())
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
