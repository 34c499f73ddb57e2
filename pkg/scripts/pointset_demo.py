#!/usr/bin/env python3
"""Emit the small-generator comparison point sets and their discrepancies.

Three CSVs of 2D points: overlapping pairs from one full LFSR period,
overlapping pairs from a full-period LCG, and the same number of i.i.d.
baseline points.  A full-period generator fills the square far more evenly
than the same number of points from a generator with a huge period.
"""

import argparse
import pathlib
import sys

import numpy as np

from lqmc import (bench, builtin_config, generate_cud, overlapping_tuples,
                  star_discrepancy_2d)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=8, help="LFSR period exponent")
    ap.add_argument("--lcg-modulus", type=int, default=251)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="results/pointsets")
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    lfsr = overlapping_tuples(generate_cud(builtin_config(args.m)), 2)
    lcg = bench.lcg_demo(args.lcg_modulus,
                         bench.smallest_primitive_root(args.lcg_modulus))
    iid = bench.iid_pointset(len(lfsr), 2, args.seed)

    for name, ps in (("lfsr_pairs", lfsr), ("lcg_pairs", lcg), ("iid", iid)):
        path = outdir / f"{name}.csv"
        np.savetxt(path, ps.points, fmt="%.17g", delimiter=",")
        print(f"{name}: n={len(ps)} D2*={star_discrepancy_2d(ps):.6g} -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
