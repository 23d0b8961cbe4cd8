"""Simulation configuration and the flat ``key = value`` config file format.

Config files are TOML-compatible: one ``key = value`` per line, arrays in
brackets, strings quoted. Keys follow the model symbols::

    alpha = 0.1
    lambda = 0.95
    shares = [0.25, 0.20, 0.15, 0.10, 0.08, 0.07, 0.06, 0.04, 0.03, 0.02]
    foreigners = true
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .choice import PolicyVector
from .population import IncomeDistribution

PAPER_SHARES = (0.25, 0.20, 0.15, 0.10, 0.08, 0.07, 0.06, 0.04, 0.03, 0.02)

# file key -> dataclass field
_ALIASES = {"lambda": "lam", "gamma": "gamma_total", "Gamma": "gamma_total", "Delta": "delta"}


@dataclass(frozen=True)
class SimulationConfig:
    # model parameters (defaults: baseline table)
    N: int = 100
    L: int = 11
    a: float = 1.0
    R: float = 3.0
    K: int = 10
    Y1: float = 15.0
    delta: float = 5.0
    beta: float = 0.5
    alpha: float = 0.1
    mu: float = 0.1
    lam: float = 0.95
    tau: int = 2
    nu: float = 0.1
    gamma_total: int = 1000
    zeta: float = 1.0
    shares: tuple[float, ...] = PAPER_SHARES
    xi: tuple[float, ...] | None = None

    # scenario switches
    foreigners: bool = False
    foreigners_taxed: bool = False
    foreigner_radius2: float = 9.0

    # mechanics
    cutoff: bool = False
    clearing: str = "batch"
    strict_crossing: bool = False
    initial_price: float | None = None  # None: nu * mean arrival income
    initial_occupants: str = "sentinel"  # or "arrivals"

    # run protocol
    seed: int = 0
    T: int = 150
    burn_in: int = 50
    window: int = 100

    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        shares = tuple(float(s) for s in self.shares)
        object.__setattr__(self, "shares", shares)
        if self.K != len(shares):
            raise ValueError(f"K={self.K} but {len(shares)} shares given")
        if self.xi is not None:
            xi = tuple(float(v) for v in self.xi)
            if len(xi) != self.K:
                raise ValueError("policy vector length must equal K")
            object.__setattr__(self, "xi", xi)
        if self.clearing not in ("batch", "arrival"):
            raise ValueError(f"clearing must be 'batch' or 'arrival', got {self.clearing!r}")
        if self.initial_occupants not in ("sentinel", "arrivals"):
            raise ValueError("initial_occupants must be 'sentinel' or 'arrivals'")
        if not 0 <= self.alpha <= 1 or not 0 <= self.nu <= 1 or not 0 <= self.beta <= 1:
            raise ValueError("alpha, nu, beta must lie in [0, 1]")
        if self.N < 1 or self.T < 0:
            raise ValueError("N must be positive and T nonnegative")
        # validates Y1, delta, shares, gamma
        self.income_distribution()
        self.policy()

    def income_distribution(self) -> IncomeDistribution:
        return IncomeDistribution(Y1=self.Y1, delta=self.delta, shares=self.shares,
                                  gamma=self.gamma_total)

    def policy(self) -> PolicyVector:
        return PolicyVector(self.xi) if self.xi is not None else PolicyVector.none(self.K)

    def replace(self, **changes) -> "SimulationConfig":
        if "K" in changes and "shares" not in changes:
            changes["shares"] = default_shares(changes["K"])
        if "shares" in changes and "K" not in changes:
            changes["K"] = len(changes["shares"])
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("extra")
        return d


def default_shares(K: int) -> tuple[float, ...]:
    return PAPER_SHARES if K == len(PAPER_SHARES) else tuple([1.0 / K] * K)


def parse_config_text(text: str) -> dict:
    raw = tomllib.loads(text)
    out = {}
    for key, value in raw.items():
        name = _ALIASES.get(key, key)
        if isinstance(value, list):
            value = tuple(value)
        out[name] = value
    return out


def config_from_mapping(values: dict, base: SimulationConfig | None = None) -> SimulationConfig:
    base = base or SimulationConfig()
    names = {f.name for f in dataclasses.fields(SimulationConfig)} - {"extra"}
    known = {k: v for k, v in values.items() if k in names}
    extra = {k: v for k, v in values.items() if k not in names}
    cfg = base.replace(**known)
    if extra:
        object.__setattr__(cfg, "extra", dict(extra))
    return cfg


def load_config(path) -> SimulationConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_mapping(parse_config_text(fh.read()))


def dump_config(cfg: SimulationConfig) -> str:
    """Inverse of :func:`load_config` for the fields it knows."""
    file_names = {v: k for k, v in _ALIASES.items() if k in ("lambda",)}
    lines = []
    for key, value in cfg.to_dict().items():
        if value is None:
            continue
        name = file_names.get(key, key)
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, str):
            text = f'"{value}"'
        elif isinstance(value, (tuple, list)):
            text = "[" + ", ".join(repr(float(v)) for v in value) + "]"
        else:
            text = repr(value)
        lines.append(f"{name} = {text}")
    return "\n".join(lines) + "\n"
