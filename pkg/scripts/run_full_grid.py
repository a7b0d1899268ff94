#!/usr/bin/env python3
"""Run the full reproduction grid and print where the CSV landed.

Equivalent to `fair-nrm run --config configs/full_grid.toml`; kept as a
script so the grid can be launched with interpreter flags or a debugger.
"""

import argparse
import sys
import time
from pathlib import Path

from fair_nrm import load_config, run_experiment

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(ROOT / "configs" / "full_grid.toml"))
    parser.add_argument("--out", default=None)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--parallel", type=int, default=None)
    args = parser.parse_args()

    cfg = load_config(args.config)
    start = time.time()
    path = run_experiment(cfg, out_path=args.out, trials=args.trials, parallel=args.parallel)
    print(f"wrote {path} in {time.time() - start:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
