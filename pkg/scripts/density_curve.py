"""Count members of D(f, g) up to X for a range of X and compare with X^delta.

Reads a finished pipeline run (density.json) or runs one first.

    python3 scripts/density_curve.py --config scripts/flagship.cfg
"""

import argparse
import json
import os

from yoshida.pipeline import RunConfig, run_pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=os.path.join(os.path.dirname(__file__), "flagship.cfg"))
    ap.add_argument("--cache-dir")
    args = ap.parse_args()
    over = {"cache_dir": args.cache_dir} if args.cache_dir else {}
    cfg = RunConfig.from_file(args.config, over)
    res = run_pipeline(cfg)
    with open(os.path.join(res.run_dir, "density.json")) as fh:
        dens = json.load(fh)
    members = dens["members"]
    print(f"{'X':>5} {'count':>6} {'X^delta':>9}")
    for X in range(20, dens["X"] + 1, 20):
        n = sum(1 for d in members if d <= X)
        print(f"{X:>5} {n:>6} {X ** dens['delta']:>9.2f}")


if __name__ == "__main__":
    main()
