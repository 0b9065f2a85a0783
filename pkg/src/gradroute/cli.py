"""Command-line entry point.

    gradroute run <config.json> [--out DIR]
    gradroute preset <name> [--steps N] [--seed S] [--beta B] [--gamma G] [--out DIR]
    gradroute batch <config.json> --seeds 1,2,3 [--threshold X] [--stop-at-threshold] [--out DIR]
    gradroute oracle <name> [params...]

The default output directory is $GRADROUTE_OUT, falling back to ./runs.
Each run writes metrics-seed<S>.csv, theta-seed<S>.json and the resolved
config.json into the output directory.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config, save_config
from .harness import batch, default_output_dir, run_experiment, summary_line
from .oracles import (
    braess_cost_for_flows,
    braess_expected_cost,
    contention_expected_reward,
    contention_optimal_p,
    triangle_optimal_average_reward,
)
from .presets import PRESET_NAMES, braess_network, preset


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradroute",
        description="Packet routing simulator with policy-gradient learning routers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")

    p_preset = sub.add_parser("preset", help="run a built-in experiment")
    p_preset.add_argument("name", choices=PRESET_NAMES)
    p_preset.add_argument("--steps", type=int, default=None)
    p_preset.add_argument("--seed", type=int, default=None)
    p_preset.add_argument("--beta", type=float, default=None)
    p_preset.add_argument("--gamma", type=float, default=None)
    p_preset.add_argument("--out", default=None, help="output directory")

    p_batch = sub.add_parser("batch", help="run one config over several seeds")
    p_batch.add_argument("config")
    p_batch.add_argument("--seeds", required=True, help="comma-separated seed list")
    p_batch.add_argument(
        "--threshold",
        type=float,
        default=None,
        help="record first tick at which the windowed underlying reward reaches this value",
    )
    p_batch.add_argument("--stop-at-threshold", action="store_true")
    p_batch.add_argument("--out", default=None, help="output directory")

    p_oracle = sub.add_parser("oracle", help="evaluate an analytic baseline")
    p_oracle.add_argument(
        "name",
        choices=[
            "contention-reward",
            "contention-optimal",
            "braess-cost",
            "braess-expected",
            "triangle-optimal",
        ],
    )
    p_oracle.add_argument("params", nargs="*")
    p_oracle.add_argument(
        "--braess0", action="store_true", help="use the network without the shortcut"
    )
    return parser


def _out_dir(arg: str | None, name: str) -> Path:
    base = Path(arg) if arg else default_output_dir()
    return base / name


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args.out, Path(args.config).stem + f"-seed{cfg.seed}")
    res = run_experiment(cfg, out)
    save_config(res.config, out / "config.json")
    print(summary_line(res))
    print(f"metrics: {res.csv_path}")
    return 0


def _cmd_preset(args) -> int:
    cfg = preset(args.name)
    overrides = {
        k: v
        for k, v in (
            ("steps", args.steps),
            ("seed", args.seed),
            ("beta", args.beta),
            ("gamma", args.gamma),
        )
        if v is not None
    }
    cfg = cfg.with_overrides(**overrides)
    out = _out_dir(args.out, f"{args.name}-seed{cfg.seed}")
    res = run_experiment(cfg, out)
    save_config(res.config, out / "config.json")
    print(summary_line(res))
    print(f"metrics: {res.csv_path}")
    return 0


def _cmd_batch(args) -> int:
    cfg = load_config(args.config)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    out = _out_dir(args.out, Path(args.config).stem + "-batch") if args.out else None
    result = batch(
        cfg,
        seeds,
        underlying_threshold=args.threshold,
        stop_at_threshold=args.stop_at_threshold,
        out_dir=out,
    )
    print(result.table())
    return 0


def _cmd_oracle(args) -> int:
    name, params = args.name, args.params
    if name == "contention-reward":
        p, d = float(params[0]), float(params[1])
        print(contention_expected_reward(p, d))
    elif name == "contention-optimal":
        print(contention_optimal_p(float(params[0])))
    elif name == "braess-cost":
        topo, _ = braess_network(augmented=not args.braess0)
        flows = {}
        for item in params:
            path, _, count = item.partition("=")
            flows[path] = int(count)
        print(braess_cost_for_flows(topo, flows))
    elif name == "braess-expected":
        print(braess_expected_cost(float(params[0]), float(params[1])))
    elif name == "triangle-optimal":
        print(triangle_optimal_average_reward())
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "preset":
            return _cmd_preset(args)
        if args.command == "batch":
            return _cmd_batch(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
    except (ConfigError, ValueError, IndexError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
