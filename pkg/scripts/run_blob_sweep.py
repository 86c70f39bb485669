#!/usr/bin/env python3
"""Sweep mask selectors on the translating-blob dataset.

Reproduces the desk-scale ranking experiment: every selector is scored at a
range of mask sizes with Isomap residual variance, neighbor preservation,
and LLE reconstruction error, all against full-data references. Results land
in a single CSV.

Usage:
    python3 scripts/run_blob_sweep.py --out-dir results/blob [--n 200 --g 16]
"""

import argparse
import sys

from manifold_masks.cli import main as cli_main


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results/blob")
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--g", type=int, default=16)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--sizes", default="16,32,64")
    ap.add_argument("--trials", type=int, default=20, help="random-mask repetitions")
    return ap.parse_args()


def main():
    args = parse_args()
    return cli_main(
        [
            "evaluate",
            "--synth", f"translating_blob:n={args.n},g={args.g},seed={args.seed}",
            "--algorithms", "maps_global,maps_local,pcoa,random",
            "--sizes", args.sizes,
            "--k", "8", "--k-lle", "8", "--np-k", "20", "--l", "2",
            "--reg", "1e-2",
            "--trials", str(args.trials),
            "--seed", str(args.seed),
            "--out-dir", args.out_dir,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
