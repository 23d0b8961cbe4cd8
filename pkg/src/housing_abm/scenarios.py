"""Preset experiments: income distributions, policies, foreign buyers, sweeps."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .choice import PolicyVector
from .config import PAPER_SHARES, SimulationConfig
from .engine import run, summarize
from .metrics import gini

logger = logging.getLogger(__name__)

# (Y1, delta, reported Gini), most equal first
INCOME_TABLE = (
    (30.0, 11.86, 0.26),
    (28.0, 12.65, 0.28),
    (26.0, 13.44, 0.30),
    (23.5, 14.43, 0.32),
    (21.0, 15.41, 0.34),
    (19.0, 16.21, 0.36),
    (16.5, 17.19, 0.38),
    (14.0, 18.18, 0.40),
    (12.0, 18.97, 0.42),
    (10.0, 19.76, 0.44),
    (7.5, 20.75, 0.46),
    (5.0, 21.74, 0.48),
)

POLICIES = {
    "none": (0.0,) * 10,
    "S": (-0.20, -0.15, -0.10, -0.05, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    "T": (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.05, 0.10, 0.15, 0.20),
}
POLICIES["ST"] = tuple(s + t for s, t in zip(POLICIES["S"], POLICIES["T"]))


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    changes: dict = field(default_factory=dict)
    replications: int = 5
    # presets sharing a key get the same seeds (common random numbers)
    crn_key: str = ""

    def apply(self, base: SimulationConfig) -> SimulationConfig:
        return base.replace(**self.changes)


def income_presets(replications: int = 5) -> list[ScenarioPreset]:
    out = []
    for y1, delta, g in INCOME_TABLE:
        name = f"G{g:.2f}"
        out.append(ScenarioPreset(name, {"Y1": y1, "delta": delta, "shares": PAPER_SHARES},
                                  replications, crn_key=name))
    return out


def policy_presets() -> dict[str, PolicyVector]:
    return {k: PolicyVector(v) for k, v in POLICIES.items()}


def policy_grid(incomes: list[ScenarioPreset] | None = None,
                policies: dict[str, PolicyVector] | None = None) -> list[ScenarioPreset]:
    incomes = incomes if incomes is not None else income_presets()
    policies = policies if policies is not None else policy_presets()
    out = []
    for inc in incomes:
        for pname, xi in policies.items():
            out.append(ScenarioPreset(f"{inc.name}/{pname}", {**inc.changes, "xi": xi.xi},
                                      inc.replications, crn_key=inc.crn_key))
    return out


def foreigner_presets(replications: int = 5) -> list[ScenarioPreset]:
    eq = income_presets(replications)[0]
    return [
        ScenarioPreset(f"{eq.name}/baseline", dict(eq.changes), replications, eq.crn_key),
        ScenarioPreset(f"{eq.name}/foreigners", {**eq.changes, "foreigners": True}, replications, eq.crn_key),
    ]


def derive_seed(base_seed: int, key: str, replication: int) -> int:
    """Seed for one run; depends on the CRN key, not on the preset's position."""
    words = [int(base_seed) & 0xFFFFFFFF, int(base_seed) >> 32, replication]
    words += list(key.encode())
    return int(np.random.SeedSequence(words).generate_state(1, dtype=np.uint64)[0] >> 1)


def _one(job):
    preset_name, cfg, replication, seed = job
    row = {"preset": preset_name, "replication": replication, "seed": seed}
    try:
        rec = run(cfg, seed)
        s = summarize(rec)
        row.update(gini=gini(cfg.income_distribution()), HR=s.HR_mean, HR_min=s.HR_min,
                   HR_max=s.HR_max, global_mean_price=s.global_mean_price, error="")
        for key, p in zip(rec_ring_keys(cfg), s.ring_mean_price):
            row[f"price_r2_{key}"] = float(p)
        row["_summary"] = s
    except Exception as exc:  # a failed run is reported on its row
        logger.warning("run %s/%d failed: %s", preset_name, replication, exc)
        row.update(error=f"{type(exc).__name__}: {exc}")
    return row


def rec_ring_keys(cfg: SimulationConfig) -> list[int]:
    from .engine import city_for

    return [int(k) for k in city_for(cfg).ring_keys]


def sweep(presets: list[ScenarioPreset], base: SimulationConfig | None = None,
          replications: int | None = None, base_seed: int = 0, workers: int = 1,
          keep_summaries: bool = False) -> list[dict]:
    """Run every preset x replication; one row per run, sorted by (preset order, replication)."""
    base = base or SimulationConfig()
    jobs = []
    for preset in presets:
        reps = replications if replications is not None else preset.replications
        if reps < 1:
            raise ValueError("replications must be >= 1")
        cfg = preset.apply(base)
        for rep in range(reps):
            jobs.append((preset.name, cfg, rep, derive_seed(base_seed, preset.crn_key or preset.name, rep)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_one, jobs))
    else:
        rows = [_one(j) for j in jobs]
    order = {p.name: i for i, p in enumerate(presets)}
    rows.sort(key=lambda r: (order[r["preset"]], r["replication"]))
    if not keep_summaries:
        for r in rows:
            r.pop("_summary", None)
    return rows


def write_sweep_csv(path, rows: list[dict]) -> None:
    cols: list[str] = []
    for r in rows:
        for c in r:
            if c not in cols and not c.startswith("_"):
                cols.append(c)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, restval="")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()
                        if not k.startswith("_")})


def median_by_preset(rows: list[dict], column: str) -> dict[str, float]:
    out: dict[str, list[float]] = {}
    for r in rows:
        if not r.get("error"):
            out.setdefault(r["preset"], []).append(r[column])
    return {k: float(np.median(v)) for k, v in out.items()}


def aggregate(rows: list[dict], columns=("HR", "global_mean_price")) -> list[dict]:
    """Per-preset min / median / max over replications, in first-seen preset order."""
    out: dict[str, dict] = {}
    for r in rows:
        agg = out.setdefault(r["preset"], {"preset": r["preset"], "runs": 0, "failed": 0, "_v": {}})
        agg["runs"] += 1
        if r.get("error"):
            agg["failed"] += 1
            continue
        for c in columns:
            agg["_v"].setdefault(c, []).append(r[c])
    table = []
    for agg in out.values():
        vals = agg.pop("_v")
        for c in columns:
            v = np.asarray(vals.get(c, []), dtype=float)
            agg[f"{c}_min"] = float(v.min()) if v.size else float("nan")
            agg[f"{c}_median"] = float(np.median(v)) if v.size else float("nan")
            agg[f"{c}_max"] = float(v.max()) if v.size else float("nan")
        table.append(agg)
    return table
