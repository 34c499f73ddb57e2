#!/usr/bin/env python3
"""Run every desk-scale experiment spec and write reports under results/.

Reference-run ground truths are cached next to the reports, so repeated
invocations only pay for the chains under comparison.
"""

import argparse
import pathlib
import sys
import time

from lqmc import bench, models
from lqmc.experiment import load_spec

SPEC_DIR = pathlib.Path(__file__).resolve().parent.parent / "specs"


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--results", default="results")
    ap.add_argument("--only", default=None, help="substring filter on spec names")
    args = ap.parse_args()

    outdir = pathlib.Path(args.results)
    outdir.mkdir(parents=True, exist_ok=True)
    for spec_path in sorted(SPEC_DIR.glob("*_desk.yaml")):
        if args.only and args.only not in spec_path.name:
            continue
        spec = load_spec(spec_path)
        name = spec_path.stem
        print(f"== {name}: model={spec.model} m={list(spec.m_values)} "
              f"R={spec.replicates}", flush=True)
        t0 = time.time()
        truth = None
        cache = outdir / f"{name}.truth.json"
        if spec.model in ("logistic", "crossed"):
            truth = models.load_ground_truth_if_exists(cache)
            if truth is None:
                potential, _ = bench.build_model(spec)
                truth = bench.ground_truth_for(spec, potential)
                models.save_ground_truth(truth, cache)
                print(f"   reference truth computed in {time.time() - t0:.0f}s")
        report = bench.run_comparison(spec, truth=truth, threads=args.threads,
                                      collect_replicates=True)
        out = outdir / f"{name}.csv"
        out.write_text(report.to_csv())
        (outdir / f"{name}.replicates.csv").write_text(report.replicate_csv())
        import yaml

        (outdir / f"{name}.meta.yaml").write_text(
            yaml.safe_dump(report.metadata, sort_keys=True))
        print(f"   done in {time.time() - t0:.0f}s -> {out}")
        for kind in spec.test_functions:
            for sched in {r.schedule for r in report.rows}:
                for m in spec.m_values:
                    lmc = report.mse("lmc", m, kind, sched)
                    lq = report.mse("lqmc", m, kind, sched)
                    print(f"   {sched} m={m} {kind}: lmc={lmc:.3e} "
                          f"lqmc={lq:.3e} ratio={lmc / lq:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
