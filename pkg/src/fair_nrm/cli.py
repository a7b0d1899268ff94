"""Command line front end: run experiments, inspect the fluid benchmark,
validate configurations. Exit codes: 0 ok, 2 config error, 3 runtime error."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, load_config
from .experiment import run_experiment
from .fluid import solve_fluid


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fair-nrm",
        description="Fairness-aware network revenue management simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment grid and write a CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=None, help="output CSV path (default from config)")
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--seed", type=int, default=None, help="seed base override")
    run.add_argument("--parallel", type=int, default=None, help="worker cap")

    fluid = sub.add_parser("fluid", help="print the fluid benchmark per (gamma, lambda)")
    fluid.add_argument("--config", required=True)

    validate = sub.add_parser("validate", help="check config invariants and exit")
    validate.add_argument("--config", required=True)
    return parser


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    path = run_experiment(
        cfg,
        out_path=args.out,
        trials=args.trials,
        seed_base=args.seed,
        parallel=args.parallel,
    )
    print(f"wrote {path}")
    return 0


def cmd_fluid(args) -> int:
    cfg = load_config(args.config)
    for label, gamma in zip(cfg.gamma_labels, cfg.gammas):
        inst = cfg.make_instance(gamma=gamma)
        for lam in cfg.lambdas:
            reg = cfg.make_regularizer(lam=lam, gamma=gamma)
            sol = solve_fluid(inst, reg, resolution=cfg.fluid_resolution)
            p = np.array2string(sol.p_star, precision=4, separator=", ")
            print(
                f"gamma={label} lambda={lam:g}: p*={p} "
                f"J_D={sol.J_D_per_period:.6g}/period binding={sol.binding}"
            )
    return 0


def cmd_validate(args) -> int:
    load_config(args.config)
    print("config ok")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "fluid": cmd_fluid, "validate": cmd_validate}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
