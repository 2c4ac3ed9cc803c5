#!/usr/bin/env python3
"""Compare the hybrid optimizer against ABC and PSO baselines.

Runs each algorithm over the same seeds on the two-cluster layout (half the
hotspots near the launch corner, half in a far cluster) and reports coverage
success rates plus how many far-cluster hotspots each algorithm reaches.
The far cluster is what separates heavy-tailed exploration from the local
baselines: plain ABC and PSO stall on the near band.

Example:
    python scripts/baseline_comparison.py --out results/baseline_comparison
    python scripts/baseline_comparison.py --algorithms hybrid,abc --seeds 5
"""

from __future__ import annotations

import argparse
import pathlib
import statistics

from levyswarm import compare_algorithms, write_runs_csv


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--preset", default="twocluster20", help="named hotspot layout")
    parser.add_argument(
        "--algorithms", default="hybrid,abc,pso", help="comma-separated algorithm names"
    )
    parser.add_argument(
        "--seeds", default="20", help="seed count (e.g. 20) or comma-separated list"
    )
    parser.add_argument("--max-steps", type=int, default=5000)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default=None, help="directory for CSV artifacts")
    return parser.parse_args()


def parse_seeds(text: str) -> list[int]:
    if "," in text:
        return [int(part) for part in text.split(",") if part.strip()]
    return list(range(int(text)))


def summarize(result, max_steps: int):
    """Per-algorithm (name, success, censored median steps, median far covered)."""
    table = []
    for name, success in result.success_rates.items():
        mine = [row for row in result.rows if row.algorithm == name]
        steps = [
            row.metrics.steps_to_cover
            if row.metrics.steps_to_cover is not None
            else max_steps
            for row in mine
        ]
        far = [row.far_covered for row in mine if row.far_covered is not None]
        table.append(
            (
                name,
                success,
                statistics.median(steps),
                statistics.median(far) if far else None,
            )
        )
    return table


def main():
    args = parse_args()
    names = [name.strip() for name in args.algorithms.split(",") if name.strip()]
    seeds = parse_seeds(args.seeds)
    result = compare_algorithms(
        names,
        preset=args.preset,
        seeds=seeds,
        max_steps=args.max_steps,
        workers=args.workers,
    )

    table = summarize(result, args.max_steps)
    print(f"preset={args.preset} seeds={len(seeds)} max_steps={args.max_steps}")
    print(f"{'algorithm':>16} {'success':>8} {'median_steps':>13} {'far_covered':>12}")
    for name, success, med, far in table:
        far_text = f"{far:.1f}" if far is not None else "NA"
        print(f"{name:>16} {success:>8.2f} {med:>13.1f} {far_text:>12}")

    if args.out:
        out = pathlib.Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_runs_csv([row.metrics for row in result.rows], out / "runs.csv")
        with open(out / "comparison.csv", "w", newline="") as f:
            f.write("algorithm,success_rate,median_steps_censored,median_far_covered\n")
            for name, success, med, far in table:
                far_text = repr(far) if far is not None else "NA"
                f.write(f"{name},{success!r},{med!r},{far_text}\n")
        print(f"artifacts written to {out}/")


if __name__ == "__main__":
    main()
