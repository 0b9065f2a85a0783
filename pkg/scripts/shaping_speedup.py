#!/usr/bin/env python3
"""Convergence-speed comparison on the six-node network: cycle penalty on
vs off, several seeds each. Reports per-seed ticks until the windowed
underlying reward first reaches a threshold, and the medians.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gradroute.harness import batch
from gradroute.presets import preset


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", default="1,2,3,4,5")
    parser.add_argument("--threshold", type=float, default=-8.0)
    parser.add_argument("--steps", type=int, default=1_500_000)
    parser.add_argument("--window", type=int, default=100,
                        help="moving-average window in sampled rows")
    args = parser.parse_args()
    seeds = [int(s) for s in args.seeds.split(",")]

    results = {}
    for label, cycle_penalty in (("with shaping", -100.0), ("without shaping", 0.0)):
        cfg = preset("six_node").with_overrides(
            steps=args.steps, ma_window=args.window, cycle_penalty=cycle_penalty
        )
        res = batch(
            cfg,
            seeds,
            underlying_threshold=args.threshold,
            stop_at_threshold=True,
        )
        results[label] = res
        print(f"== {label} (cycle_penalty={cycle_penalty})")
        print(res.table())

    with_med = results["with shaping"].median_ticks_to_threshold
    without_med = results["without shaping"].median_ticks_to_threshold
    print(f"\nmedian ticks to reach {args.threshold}: "
          f"with={with_med:.0f} without={without_med:.0f} "
          f"speedup x{without_med / with_med:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
