#!/usr/bin/env python3
"""Run the 20-trial desk campaign and print the headline quantiles.

Equivalent to `fdxtrack campaign --config configs/desk.toml --out out/desk`
followed by reading summary.json, kept as a script so the whole loop is one
command during development.
"""
import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fdxtrack.config import load_scenario
from fdxtrack.harness import export_campaign, run_campaign

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=os.path.join(HERE, "..", "configs", "desk.toml"))
    ap.add_argument("--out", default="out/desk")
    args = ap.parse_args()

    scenario = load_scenario(args.config)
    t0 = time.perf_counter()
    result = run_campaign(scenario)
    elapsed = time.perf_counter() - t0
    export_campaign(result, args.out, scenario)

    print(f"{result.n_success}/{result.n_trials} trials in {elapsed:.0f} s "
          f"({scenario.horizon.n_samples} samples each)")
    for i, msg in result.failures:
        print(f"  trial {i} skipped: {msg}")
    print(f"{'scheme':>16}  {'INR p50':>8}  {'INR p90':>8}  {'SINR_DL p50':>11}  {'R p50':>6}")
    for scheme in result.schemes:
        inr = result.summaries[(scheme, "inr_db")].quantiles
        sinr = result.summaries[(scheme, "sinr_dl_db")].quantiles
        rate = result.summaries[(scheme, "sum_se")].quantiles
        print(f"{scheme:>16}  {inr[0.50]:>+8.2f}  {inr[0.90]:>+8.2f}  "
              f"{sinr[0.50]:>+11.2f}  {rate[0.50]:>6.2f}")
    print(f"wrote {args.out}/")


if __name__ == "__main__":
    main()
