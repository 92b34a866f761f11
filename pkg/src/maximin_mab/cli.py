"""Command-line front end.

Exit status: 0 on success, 1 on IO or config-parse failure, 2 on invalid
values (e.g. a horizon shorter than the number of channels).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .analysis import ExperimentReport, concentration_check, theorem1_bound, theorem2_bound
from .core import RngStream
from .experiments import (
    ConfigError,
    apply_overrides,
    build_config,
    load_config,
    run_gap_sweep,
    run_scale_sweep,
)
from .plotting import write_svg
from .simulation import gap_profile, run_episode, trace_to_csv

COMMANDS = ("simulate", "gap-sweep", "scale-sweep", "bounds", "concentration")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML scenario file")
    common.add_argument("--out", type=Path, help="output file (stdout when omitted)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--plot", type=Path, help="write an SVG plot here (sweeps only)")
    common.add_argument("--plot-bounds", action="store_true", help="overlay the gap-dependent bound on the plot")
    common.add_argument("--seed", type=int)
    common.add_argument("--reps", type=int, help="replications per scenario")
    common.add_argument("--horizon", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted config override, e.g. run.delta_rule=fixed (repeatable)")

    parser = argparse.ArgumentParser(prog="maximin-mab", description="Maximin UCB bandit experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run one episode and write its regret trace")
    sub.add_parser("gap-sweep", parents=[common], help="regret for several minimum gaps")
    sub.add_parser("scale-sweep", parents=[common], help="regret for several channel and node counts")
    sub.add_parser("bounds", parents=[common], help="evaluate both regret bounds at the checkpoints")
    sub.add_parser("concentration", parents=[common], help="Monte Carlo check of the sample-mean tail bound")
    return parser


def _resolve(args):
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, args.overrides)
    for flag, key in (("seed", "seed"), ("reps", "replications"), ("horizon", "horizon"), ("workers", "workers")):
        value = getattr(args, flag)
        if value is not None:
            cfg["run"][key] = value
    return build_config(cfg)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _trace_json(trace) -> str:
    rows = list(csv.DictReader(io.StringIO(trace_to_csv(trace))))
    doc = {
        "columns": ["round", "action", "cumulative_regret"],
        "round": [int(r["round"]) for r in rows],
        "action": [int(r["action"]) for r in rows],
        "cumulative_regret": [float(r["cumulative_regret"]) for r in rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def cmd_simulate(args) -> None:
    config = _resolve(args)
    sc = config.scenario
    trace = run_episode(sc.instance(), sc.policy, sc.horizon, sc.delta(), RngStream(sc.seed, 0), sigma=sc.sigma)
    _emit(trace_to_csv(trace) if args.format == "csv" else _trace_json(trace), args.out)


def _write_report(report: ExperimentReport, args, title: str) -> None:
    _emit(report.to_csv() if args.format == "csv" else report.to_json(), args.out)
    if args.plot is not None:
        write_svg(report, args.plot, title=title, show_bounds=args.plot_bounds)


def cmd_gap_sweep(args) -> None:
    config = _resolve(args)
    report = run_gap_sweep(config.sweep["gaps"], config.scenario, workers=config.workers)
    _write_report(report, args, "Regret vs minimum sub-optimality gap")


def cmd_scale_sweep(args) -> None:
    config = _resolve(args)
    report = run_scale_sweep(config.sweep["channels"], config.sweep["nodes"], config.scenario, workers=config.workers)
    _write_report(report, args, "Regret vs number of channels and nodes")


def cmd_bounds(args) -> None:
    config = _resolve(args)
    sc = config.scenario
    inst = sc.instance()
    prof = gap_profile(inst)
    ck = sc.resolved_checkpoints()
    t1 = [[theorem1_bound(prof, sc.sigma, n) for n in ck]]
    t2 = [[theorem2_bound(prof, sc.sigma, inst.m, n) for n in ck]]
    nan = [[float("nan")] * len(ck)]
    report = ExperimentReport([f"m={inst.m} p={inst.p}"], ck, nan, nan, t1, t2)
    _write_report(report, args, "Regret bounds")


def cmd_concentration(args) -> None:
    config = _resolve(args)
    c = config.concentration
    res = concentration_check(
        int(c["sample_count"]), float(c["mu"]), float(c["sigma"]), float(c["epsilon"]), int(c["trials"]),
        RngStream(config.scenario.seed, 0), family=c["family"],
    )
    record = {
        "family": str(c["family"]),
        "sample_count": int(c["sample_count"]),
        "mu": float(c["mu"]),
        "sigma": float(c["sigma"]),
        "epsilon": float(c["epsilon"]),
        "trials": res.trials,
        "observed": res.observed,
        "bound": res.bound,
    }
    if args.format == "json":
        text = json.dumps(record, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(record.keys())
        w.writerow([repr(v) if isinstance(v, float) else v for v in record.values()])
        text = buf.getvalue()
    _emit(text, args.out)


HANDLERS = {
    "simulate": cmd_simulate,
    "gap-sweep": cmd_gap_sweep,
    "scale-sweep": cmd_scale_sweep,
    "bounds": cmd_bounds,
    "concentration": cmd_concentration,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        HANDLERS[args.command](args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
