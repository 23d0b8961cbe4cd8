"""Command line entry point: simulate, analytic, segradius, metrics, sweep."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import analytic
from .auction import write_transactions_csv
from .config import SimulationConfig, load_config
from .engine import city_for, run, summarize
from .metrics import UndefinedIndex, gini, rank_order_index
from .population import write_occupancy_csv
from .scenarios import (aggregate, foreigner_presets, income_presets, policy_grid, sweep,
                        write_sweep_csv)

log = logging.getLogger("housing_abm")


def _config(path) -> SimulationConfig:
    return load_config(path) if path else SimulationConfig()


def _f(x) -> str:
    return repr(float(x))


def cmd_simulate(args) -> int:
    cfg = _config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = city_for(cfg)
    rec = run(cfg, seed, grid=grid)
    s = summarize(rec, grid)

    cols = cfg.K + (1 if cfg.foreigners else 0)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        head = ["ring", "r", "mean_price"] + [f"share_k{k + 1}" for k in range(cfg.K)]
        if cfg.foreigners:
            head.append("share_foreign")
        w.writerow(head)
        for i, key in enumerate(grid.ring_keys):
            w.writerow([int(key), _f(s.ring_r[i]), _f(s.ring_mean_price[i])]
                       + [_f(v) for v in s.ring_shares[i, :cols]])

    write_transactions_csv(out / "transactions.csv", rec.transactions, grid.xy)

    with open(out / "prices_by_step.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "price"])
        for t in range(rec.horizon):
            for loc in range(grid.n_locations):
                w.writerow([t, int(grid.xy[loc, 0]), int(grid.xy[loc, 1]), _f(rec.prices[t, loc])])

    write_occupancy_csv(out / "occupancy.csv", rec.state, grid.xy, grid.r)
    print(f"seed {seed}: global mean price {s.global_mean_price:.4f}, H^R {s.HR_mean:.4f}")
    return 0


def cmd_analytic(args) -> int:
    cfg = _config(args.config)
    params = analytic.AnalyticParams.from_config(cfg, beta=args.beta)
    if args.beta == 1.0:
        r = np.linspace(0.0, params.R_max, args.points)
        P, clamped = analytic.steady_price_beta1(r, params)
    else:
        sol = analytic.solve_general_beta(params, grid_size=args.points)
        if not sol.converged:
            log.warning("fixed point on Z* did not converge after %d iterations", sol.iterations)
        r, P, clamped = sol.r, sol.P, sol.clamped
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "P_star", "clamped_flag"])
        for ri, pi, ci in zip(r, P, clamped):
            w.writerow([_f(ri), _f(pi), int(ci)])
    return 0


def _with_param(params: analytic.AnalyticParams, name: str, value: float):
    if name == "stickiness":
        return params.replace(lam=value ** params.tau)
    if name not in analytic.AnalyticParams.__dataclass_fields__:
        raise SystemExit(f"unknown parameter {name!r}")
    return params.replace(**{name: value})


def cmd_segradius(args) -> int:
    params = analytic.AnalyticParams.from_config(_config(args.config))
    rows = []
    if args.sweep:
        try:
            name, lo, hi, steps = args.sweep.split(":")
            values = np.linspace(float(lo), float(hi), int(steps))
        except ValueError:
            raise SystemExit("--sweep expects param:lo:hi:steps")
        rows.append(["param_value", "r_s", "flag"])
        for v in values:
            res = analytic.segregation_radius(_with_param(params, name, float(v)))
            rows.append([_f(v), _f(res.r_s), res.flag])
    else:
        res = analytic.segregation_radius(params)
        rows += [["r_s", "flag"], [_f(res.r_s), res.flag]]
    if args.out is None:
        csv.writer(sys.stdout).writerows(rows)
    else:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
    return 0


def _occupancy_counts(path, grid, n_categories):
    counts = np.zeros((grid.n_locations, n_categories), dtype=np.int64)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            cat = int(row["category"])
            if cat < 1:
                continue  # initial occupant of unknown income
            counts[grid.index_of(int(row["x"]), int(row["y"])), cat - 1] += 1
    return counts


def cmd_metrics(args) -> int:
    cfg = _config(args.config)
    grid = city_for(cfg)
    G = gini(cfg.income_distribution())
    w = csv.writer(sys.stdout)
    w.writerow(["file", "G", "HR"])
    for path in args.occupancy:
        counts = _occupancy_counts(path, grid, cfg.K + 1)
        try:
            hr = rank_order_index(counts).HR
        except UndefinedIndex:
            hr = math.nan
        w.writerow([path, _f(G), _f(hr)])
    return 0


def cmd_sweep(args) -> int:
    base = _config(args.config)
    if args.experiment == "inequality":
        presets = income_presets()
    elif args.experiment == "policy":
        presets = policy_grid()
    else:
        presets = foreigner_presets()
    rows = sweep(presets, base, replications=args.replications, base_seed=args.seed,
                 workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out / f"{args.experiment}.csv", rows)
    write_sweep_csv(out / f"{args.experiment}_summary.csv", aggregate(rows))
    failed = [r for r in rows if r.get("error")]
    if failed:
        log.warning("%d of %d runs failed", len(failed), len(rows))
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="housing-abm", description="Spatial housing market model.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one simulation and write CSV outputs")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("analytic", help="steady-state price curve")
    s.add_argument("--config")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--points", type=int, default=10000)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_analytic)

    s = sub.add_parser("segradius", help="segregation radius, optionally over a parameter sweep")
    s.add_argument("--config")
    s.add_argument("--sweep", help="param:lo:hi:steps (param may be 'stickiness')")
    s.add_argument("--out")
    s.set_defaults(func=cmd_segradius)

    s = sub.add_parser("metrics", help="Gini and H^R from occupancy CSV files")
    s.add_argument("occupancy", nargs="+")
    s.add_argument("--config")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("sweep", help="preset experiments over seeds")
    s.add_argument("--experiment", choices=("inequality", "policy", "foreigners"), required=True)
    s.add_argument("--replications", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
