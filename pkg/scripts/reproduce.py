#!/usr/bin/env python3
"""Reproduce the four headline experiments and print endpoint summaries.

Writes one CSV + theta snapshot per experiment under the output directory
(default: $GRADROUTE_OUT or ./runs). Step counts target desk-scale runtimes
(a few minutes total); pass --full for the slower paper-scale settings.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gradroute.harness import default_output_dir, run_experiment, summary_line
from gradroute.oracles import (
    braess_expected_cost,
    contention_optimal_p,
    triangle_optimal_average_reward,
)
from gradroute.presets import preset


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=None)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument(
        "--full",
        action="store_true",
        help="run every experiment at its full preset length",
    )
    args = parser.parse_args()
    out = Path(args.out) if args.out else default_output_dir()

    runs = [
        # (name, overrides) -- the contention preset carries the quoted
        # 1e-7 step size, which needs far longer runs than a desk check;
        # the optimum itself does not depend on the step size
        ("triangle", {}),
        ("contention", {"gamma": 1e-5}),
        ("six_node", {}),
        ("braess1", {}),
    ]
    if not args.full:
        for name, ov in runs:
            ov["steps"] = 500_000

    print(f"reference optima: triangle {triangle_optimal_average_reward():.2f}/tick, "
          f"contention p*={contention_optimal_p(21.0)} (reward -10.75), "
          f"braess best-at-independent-choices {braess_expected_cost(0.5, 1.0):.1f}/packet")
    for name, overrides in runs:
        cfg = preset(name).with_overrides(seed=args.seed, **overrides)
        res = run_experiment(cfg, out / name)
        print(f"{name:11s} {summary_line(res)}")
    print(f"outputs under {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
