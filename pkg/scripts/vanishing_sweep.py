"""Sweep the Bott-type vanishing suite over several seeds.

For each seed, prints the trial and check counts, failures, and the number of
contrast instances (a^1 = 0 while c^1 != 0).

    python3 scripts/vanishing_sweep.py --seeds 5 --trials 50
"""

import argparse
from dataclasses import dataclass

from atiyah.suites import run_property_suite


@dataclass
class SweepConfig:
    seeds: int = 5
    trials: int = 50


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=SweepConfig.seeds)
    ap.add_argument("--trials", type=int, default=SweepConfig.trials)
    cfg = SweepConfig(**vars(ap.parse_args()))
    print(f"{'seed':>4} {'trials':>6} {'checks':>6} {'fail':>4} {'contrast':>8} {'sec':>6}")
    total_fail = 0
    for seed in range(cfg.seeds):
        rep = run_property_suite("vanishing", cfg.trials, seed)
        s = rep.suite
        total_fail += s["failures"]
        print(f"{seed:>4} {s['trials']:>6} {s['checks']:>6} {s['failures']:>4} "
              f"{s['contrast (a1 = 0, c1 != 0)']:>8} {rep.seconds:>6.2f}")
        if s["first_counterexample"]:
            print("     first counterexample:", s["first_counterexample"])
    return 1 if total_fail else 0


if __name__ == "__main__":
    raise SystemExit(main())
