"""Income categories, arrival cohorts and per-dwelling occupancy state."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

SENTINEL = -1  # category of the initial, income-unknown occupants


@dataclass(frozen=True)
class IncomeDistribution:
    """K income levels Y_k = Y1 + (k-1)*delta arriving with fixed shares.

    ``gamma`` is the number of arrivals per step.
    """

    Y1: float = 15.0
    delta: float = 5.0
    shares: tuple[float, ...] = (0.1,) * 10
    gamma: int = 1000

    def __post_init__(self):
        shares = tuple(float(s) for s in self.shares)
        object.__setattr__(self, "shares", shares)
        if not shares:
            raise ValueError("need at least one income category")
        if self.Y1 <= 0:
            raise ValueError("Y1 must be positive")
        if len(shares) > 1 and self.delta <= 0:
            raise ValueError("delta must be positive")
        if any(s < 0 for s in shares):
            raise ValueError("shares must be nonnegative")
        if abs(sum(shares) - 1.0) > 1e-12:
            raise ValueError(f"shares sum to {sum(shares)!r}, expected 1")
        if self.gamma < 0 or int(self.gamma) != self.gamma:
            raise ValueError("gamma must be a nonnegative integer")

    @property
    def K(self) -> int:
        return len(self.shares)

    @property
    def incomes(self) -> np.ndarray:
        return self.Y1 + self.delta * np.arange(self.K)

    @property
    def mean_income(self) -> float:
        """Total arrival income per arriving household, M / Gamma."""
        return float(np.dot(self.incomes, self.shares))


def arrival_counts(dist: IncomeDistribution, rng=None) -> np.ndarray:
    """Per-category arrivals, Gamma*shares rounded by largest remainder.

    The total is exactly ``dist.gamma`` every step. ``rng`` is accepted for
    interface symmetry and ignored: the inflow is deterministic.
    """
    raw = np.asarray(dist.shares) * dist.gamma
    counts = np.floor(raw + 1e-9).astype(np.int64)
    short = int(dist.gamma - counts.sum())
    if short > 0:
        frac = raw - counts
        # stable: ties go to the lower category index
        order = np.argsort(-frac, kind="stable")
        counts[order[:short]] += 1
    elif short < 0:
        frac = raw - counts
        order = np.argsort(frac, kind="stable")
        order = order[counts[order] > 0]
        counts[order[:-short]] -= 1
    return counts


class Status(Enum):
    HOUSED = "housed"
    ON_MARKET = "on_market"


@dataclass(frozen=True)
class Dwelling:
    location: tuple[int, int]
    occupant_category: int  # 1-based; SENTINEL for initial occupants
    status: Status
    listing_time: int | None
    listing_base_price: float | None


@dataclass
class MarketState:
    """Mutable market state for one simulation run.

    Dwellings are stored column-wise; dwelling ``d`` sits at location
    ``d // N``. ``list_time[d] < 0`` means the dwelling is not on sale.
    Categories are 0-based internally (``k - 1``).
    """

    t: int
    prices: np.ndarray
    category: np.ndarray
    list_time: np.ndarray
    list_base: np.ndarray
    N: int

    @classmethod
    def initial(cls, n_locations: int, N: int, initial_price, category=None) -> "MarketState":
        D = n_locations * N
        prices = np.broadcast_to(np.asarray(initial_price, dtype=float), (n_locations,)).copy()
        if category is None:
            category = np.full(D, SENTINEL, dtype=np.int64)
        return cls(
            t=0,
            prices=prices,
            category=np.asarray(category, dtype=np.int64).copy(),
            list_time=np.full(D, -1, dtype=np.int64),
            list_base=np.full(D, np.nan),
            N=N,
        )

    @property
    def n_dwellings(self) -> int:
        return len(self.category)

    @property
    def location(self) -> np.ndarray:
        return np.arange(self.n_dwellings) // self.N

    @property
    def on_market(self) -> np.ndarray:
        return self.list_time >= 0

    def listing_age(self) -> np.ndarray:
        return np.where(self.on_market, self.t - self.list_time, -1)

    def on_market_counts(self) -> np.ndarray:
        return np.bincount(self.location[self.on_market], minlength=len(self.prices))

    def occupancy(self, n_categories: int) -> np.ndarray:
        """(n_locations, n_categories) counts of known-category occupants."""
        known = self.category >= 0
        n_loc = len(self.prices)
        idx = self.location[known] * n_categories + self.category[known]
        return np.bincount(idx, minlength=n_loc * n_categories).reshape(n_loc, n_categories)

    def dwelling(self, d: int, xy: np.ndarray) -> Dwelling:
        cat = int(self.category[d])
        listed = self.list_time[d] >= 0
        return Dwelling(
            location=tuple(int(v) for v in xy[d // self.N]),
            occupant_category=cat + 1 if cat >= 0 else SENTINEL,
            status=Status.ON_MARKET if listed else Status.HOUSED,
            listing_time=int(self.list_time[d]) if listed else None,
            listing_base_price=float(self.list_base[d]) if listed else None,
        )

    def copy(self) -> "MarketState":
        return MarketState(self.t, self.prices.copy(), self.category.copy(),
                           self.list_time.copy(), self.list_base.copy(), self.N)


def spawn_listings(state: MarketState, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Put each housed dwelling on sale with probability ``alpha``.

    Mutates ``state`` in place and returns the indices of the new listings.
    Existing listings keep their original listing time and base price.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    housed = np.flatnonzero(state.list_time < 0)
    draws = rng.random(len(housed))
    new = housed[draws < alpha]
    state.list_time[new] = state.t
    state.list_base[new] = state.prices[new // state.N]
    return new


def write_occupancy_csv(path, state: MarketState, xy: np.ndarray, r: np.ndarray) -> None:
    import csv

    ages = state.listing_age()
    loc = state.location
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "r", "category", "status", "listing_age"])
        for d in range(state.n_dwellings):
            cat = int(state.category[d])
            listed = state.list_time[d] >= 0
            w.writerow([
                int(xy[loc[d], 0]), int(xy[loc[d], 1]), repr(float(r[loc[d]])),
                cat + 1 if cat >= 0 else SENTINEL,
                Status.ON_MARKET.value if listed else Status.HOUSED.value,
                int(ages[d]) if listed else "",
            ])
