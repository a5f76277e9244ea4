#!/usr/bin/env python3
"""Reproduce the published type I / type II error-rate cells.

Runs one scan per species preset at the two critical efficacy values and
prints the per-method rejection rates next to the published figures.

    python scripts/run_error_rates.py --reps 10000 --threads 8
"""

import argparse
import time

from nbratio.methods import Method
from nbratio.montecarlo import run_scan, scenario_from_preset

PUBLISHED_TYPE1 = {
    "hookworm": {"inferiority": (0.70, [0.036, 0.033, 0.327, 0.094, 0.038]),
                 "non-inferiority": (0.65, [0.021, 0.029, 0.346, 0.116, 0.021])},
    "ascaris": {"inferiority": (0.95, [0.097, 0.081, 0.460, 0.170, 0.094]),
                "non-inferiority": (0.90, [0.024, 0.053, 0.469, 0.167, 0.014])},
    "trichuris": {"inferiority": (0.50, [0.039, 0.035, 0.424, 0.130, 0.048]),
                  "non-inferiority": (0.45, [0.019, 0.028, 0.426, 0.129, 0.020])},
}

METHOD_ORDER = [Method.WAAVP, Method.GAMMA, Method.BINOMIAL, Method.ASYMPTOTIC, Method.BNB]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()

    header = "species      test             r     " + "".join(f"{m.value:>12}" for m in METHOD_ORDER)
    print(header)
    print("-" * len(header))
    for species, tests in PUBLISHED_TYPE1.items():
        started = time.perf_counter()
        scenario = scenario_from_preset(species, replicates=args.reps, seed=args.seed)
        result = run_scan(scenario, parallelism=args.threads)
        for test, (r, published) in tests.items():
            got = []
            for method in METHOD_ORDER:
                cell = result.cell(method, r)
                got.append(
                    cell.reject_inferiority_rate
                    if test == "inferiority"
                    else cell.reject_noninferiority_rate
                )
            print(f"{species:<12} {test:<16} {r:<5}" + "".join(f"{v:>12.4f}" for v in got))
            print(f"{'':<12} {'(published)':<16} {'':<5}"
                  + "".join(f"{v:>12.3f}" for v in published))
        print(f"  [{species}: {time.perf_counter() - started:.1f}s]")


if __name__ == "__main__":
    main()
