#!/usr/bin/env python3
"""Classification-frequency curves over the threshold band for one preset.

Scans true efficacy over [T_A - 0.10, T_I + 0.10] and writes the scan JSON
plus the tidy CSV that plotting tools (or the web UI) consume.

    python scripts/run_typology_curves.py --preset hookworm --n 91 \
        --reps 2000 --seed 1 --out curves_hookworm
"""

import argparse
from dataclasses import replace
from pathlib import Path

from nbratio.montecarlo import run_scan, scan_to_tidy_csv, scenario_from_preset
from nbratio.serialize import canonical_json, scan_result_to_dict


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="hookworm",
                        choices=["hookworm", "ascaris", "trichuris"])
    parser.add_argument("--n", type=int, default=91)
    parser.add_argument("--reps", type=int, default=2_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--step", type=float, default=0.01)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--out", default="typology_curves")
    args = parser.parse_args()

    scenario = scenario_from_preset(
        args.preset, n=args.n, replicates=args.reps, seed=args.seed
    )
    lo = max(0.0, scenario.design.threshold_adequacy - 0.10)
    hi = min(1.0, scenario.design.threshold_inferiority + 0.10)
    steps = int(round((hi - lo) / args.step))
    grid = tuple(round(lo + args.step * i, 10) for i in range(steps + 1))
    scenario = replace(scenario, r_grid=grid)

    result = run_scan(scenario, parallelism=args.threads)
    json_path = Path(f"{args.out}.json")
    csv_path = Path(f"{args.out}.csv")
    json_path.write_text(canonical_json(scan_result_to_dict(result)) + "\n", encoding="utf-8")
    csv_path.write_text(scan_to_tidy_csv(result), encoding="utf-8")
    print(f"wrote {json_path} and {csv_path} ({len(grid)} efficacy values)")


if __name__ == "__main__":
    main()
