#!/usr/bin/env python3
"""Run both regret experiments and write CSV, JSON and SVG files.

    python scripts/reproduce_experiments.py --out results --reps 1000
"""

import argparse
import time
from dataclasses import replace
from pathlib import Path

from maximin_mab.experiments import build_config, load_config, run_gap_sweep, run_scale_sweep
from maximin_mab.plotting import write_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", type=Path, default=Path(__file__).resolve().parents[1] / "configs" / "paper.toml")
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--reps", type=int, default=None)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--only", choices=("gap", "scale"), default=None)
    args = ap.parse_args()

    cfg = build_config(load_config(args.config))
    base = cfg.scenario if args.reps is None else replace(cfg.scenario, replications=args.reps)
    workers = args.workers or cfg.workers
    args.out.mkdir(parents=True, exist_ok=True)

    jobs = {
        "gap": ("gap_sweep", "Regret vs minimum sub-optimality gap", lambda: run_gap_sweep(cfg.sweep["gaps"], base, workers)),
        "scale": (
            "scale_sweep",
            "Regret vs number of channels and nodes",
            lambda: run_scale_sweep(cfg.sweep["channels"], cfg.sweep["nodes"], base, workers),
        ),
    }
    for key, (stem, title, run) in jobs.items():
        if args.only and key != args.only:
            continue
        t0 = time.perf_counter()
        report = run()
        (args.out / f"{stem}.csv").write_text(report.to_csv())
        (args.out / f"{stem}.json").write_text(report.to_json())
        write_svg(report, args.out / f"{stem}.svg", title=title)
        print(f"{stem}: {time.perf_counter() - t0:.1f}s, R={base.replications}")
        for name in report.scenarios:
            mean, half = report.final(name)
            print(f"  {name:>12}  final regret {mean:8.1f} +- {half:.1f}")


if __name__ == "__main__":
    main()
