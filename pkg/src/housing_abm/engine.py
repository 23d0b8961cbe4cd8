"""Time stepping, full runs and window summaries."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import auction
from .choice import choice_probabilities, reservation_bid, sample_buyer_locations
from .config import SimulationConfig
from .geometry import AttractivenessSpec, CityGrid, build_city
from .listing import Ask, reservation_offer
from .metrics import UndefinedIndex, global_mean_price, rank_order_index
from .population import MarketState, arrival_counts, spawn_listings

logger = logging.getLogger(__name__)

_LOG_FIELDS = ("t", "loc", "k", "dwelling", "bid", "ask", "price")


def city_for(config: SimulationConfig) -> CityGrid:
    spec = AttractivenessSpec.from_lattice(config.L, config.a, config.R, config.cutoff)
    return build_city(config.L, config.a, spec)


def n_categories(config: SimulationConfig) -> int:
    """Occupancy columns: the K income categories plus one for foreigners."""
    return config.K + 1


def initial_state(config: SimulationConfig, grid: CityGrid, rng: np.random.Generator) -> MarketState:
    dist = config.income_distribution()
    p0 = config.initial_price if config.initial_price is not None else config.nu * dist.mean_income
    category = None
    if config.initial_occupants == "arrivals":
        category = rng.choice(config.K, size=grid.n_locations * config.N, p=np.asarray(config.shares))
    return MarketState.initial(grid.n_locations, config.N, p0, category)


@dataclass
class StepResult:
    """What happened during one step; arrays indexed by transaction."""

    loc: np.ndarray
    k: np.ndarray
    dwelling: np.ndarray
    bid: np.ndarray
    ask: np.ndarray
    price: np.ndarray
    n_bids: np.ndarray  # per location
    n_asks: np.ndarray  # per location
    priced_out: np.ndarray  # per category, buyers who found nothing affordable


def _demand(config: SimulationConfig, grid: CityGrid, state: MarketState, rng):
    dist = config.income_distribution()
    Y = dist.incomes
    xi = config.policy().as_array()
    counts = arrival_counts(dist)
    locs, cats, vals = [], [], []
    priced_out = np.zeros(config.K, dtype=np.int64)
    n_loc = grid.n_locations
    for k in range(config.K):
        if counts[k] == 0:
            continue
        pi = choice_probabilities(Y[k], xi[k], state.prices, grid.A, config.beta)
        if pi.size == 0:
            priced_out[k] = counts[k]
            continue
        per_loc = sample_buyer_locations(int(counts[k]), pi, rng, n_loc)
        locs.append(np.repeat(np.arange(n_loc), per_loc))
        cats.append(np.full(counts[k], k))
        vals.append(np.full(counts[k], reservation_bid(Y[k], config.zeta, xi[k])))

    if config.foreigners:
        n_f = config.gamma_total // 10
        disc = np.flatnonzero(grid.disc_mask(config.foreigner_radius2))
        if n_f > 0 and disc.size:
            per = rng.multinomial(n_f, np.full(disc.size, 1.0 / disc.size))
            locs.append(np.repeat(disc, per))
            cats.append(np.full(n_f, config.K))
            rate = xi[-1] if config.foreigners_taxed else 0.0
            vals.append(np.full(n_f, reservation_bid(Y[-1] + config.delta, config.zeta, rate)))

    if locs:
        return (np.concatenate(locs), np.concatenate(cats), np.concatenate(vals), priced_out)
    e = np.empty(0, dtype=np.int64)
    return e, e, np.empty(0), priced_out


def step(state: MarketState, config: SimulationConfig, rng: np.random.Generator,
         grid: CityGrid | None = None) -> StepResult:
    """Advance ``state`` by one time step in place.

    Order: buyers arrive and choose locations, housed owners list, bids and
    asks are formed, every location is cleared, then ownership and market
    prices are updated. Unmatched buyers leave; unmatched listings age.
    """
    grid = grid or city_for(config)
    n_loc = grid.n_locations

    b_loc, b_cat, b_val, priced_out = _demand(config, grid, state, rng)
    spawn_listings(state, config.alpha, rng)

    on = np.flatnonzero(state.list_time >= 0)
    a_loc = on // state.N
    a_age = state.t - state.list_time[on]
    a_val = reservation_offer(state.list_base[on], a_age, config.mu, config.lam, config.tau)
    a_val = np.atleast_1d(a_val)

    if config.clearing == auction.BATCH:
        bi, ai = auction.clear_book(b_loc, b_val, b_cat, a_loc, a_val, a_age, n_loc,
                                    strict=config.strict_crossing)
    else:
        bi, ai = _clear_arrival(b_loc, b_val, b_cat, a_loc, a_val, a_age, on, n_loc, config, rng)

    dw = on[ai]
    price = auction.transaction_price(b_val[bi], a_val[ai], config.nu)
    state.category[dw] = b_cat[bi]
    state.list_time[dw] = -1
    state.list_base[dw] = np.nan
    tx_loc = a_loc[ai]
    state.prices = auction.update_market_prices(tx_loc, price, state.prices)
    state.t += 1
    return StepResult(loc=tx_loc, k=b_cat[bi], dwelling=dw, bid=b_val[bi], ask=a_val[ai],
                      price=np.asarray(price, dtype=float),
                      n_bids=np.bincount(b_loc, minlength=n_loc),
                      n_asks=np.bincount(a_loc, minlength=n_loc),
                      priced_out=priced_out)


def _clear_arrival(b_loc, b_val, b_cat, a_loc, a_val, a_age, on, n_loc, config, rng):
    b_by_loc = np.argsort(b_loc, kind="stable")
    a_by_loc = np.argsort(a_loc, kind="stable")
    b_split = np.split(b_by_loc, np.cumsum(np.bincount(b_loc, minlength=n_loc))[:-1])
    a_split = np.split(a_by_loc, np.cumsum(np.bincount(a_loc, minlength=n_loc))[:-1])
    bi_out, ai_out = [], []
    for x in range(n_loc):
        bidx, aidx = b_split[x], a_split[x]
        if bidx.size == 0 or aidx.size == 0:
            continue
        bids = list(zip(b_cat[bidx].tolist(), b_val[bidx].tolist()))
        asks = [Ask(int(d), float(v), int(g)) for d, v, g in zip(on[aidx], a_val[aidx], a_age[aidx])]
        for i, j in auction.match_pairs(bids, asks, auction.ARRIVAL, rng, config.strict_crossing):
            bi_out.append(bidx[i])
            ai_out.append(aidx[j])
    return np.asarray(bi_out, dtype=np.int64), np.asarray(ai_out, dtype=np.int64)


@dataclass
class SimulationRecord:
    config: SimulationConfig
    seed: int
    prices: np.ndarray  # (T, n_loc), after each step
    occupancy: np.ndarray  # (T, n_loc, K+1)
    n_bids: np.ndarray  # (T, n_loc)
    n_asks: np.ndarray  # (T, n_loc)
    priced_out: np.ndarray  # (T, K)
    transactions: dict  # column arrays, see _LOG_FIELDS
    state: MarketState | None = None  # after the last step

    @property
    def horizon(self) -> int:
        return self.prices.shape[0]


def run(config: SimulationConfig, seed: int | None = None, grid: CityGrid | None = None,
        state: MarketState | None = None) -> SimulationRecord:
    """Run ``config.T`` steps; fully determined by (config, seed)."""
    seed = config.seed if seed is None else seed
    grid = grid or city_for(config)
    rng = np.random.default_rng(seed)
    state = state if state is not None else initial_state(config, grid, rng)
    T, n_loc, C = config.T, grid.n_locations, n_categories(config)

    prices = np.empty((T, n_loc))
    occupancy = np.empty((T, n_loc, C), dtype=np.int32)
    n_bids = np.empty((T, n_loc), dtype=np.int32)
    n_asks = np.empty((T, n_loc), dtype=np.int32)
    priced_out = np.empty((T, config.K), dtype=np.int64)
    log: dict[str, list] = {f: [] for f in _LOG_FIELDS}
    for t in range(T):
        res = step(state, config, rng, grid)
        prices[t] = state.prices
        occupancy[t] = state.occupancy(C)
        n_bids[t], n_asks[t], priced_out[t] = res.n_bids, res.n_asks, res.priced_out
        log["t"].append(np.full(len(res.price), t))
        log["loc"].append(res.loc)
        log["k"].append(res.k)
        log["dwelling"].append(res.dwelling)
        log["bid"].append(res.bid)
        log["ask"].append(res.ask)
        log["price"].append(res.price)
    dtypes = {"t": np.int64, "loc": np.int64, "k": np.int64, "dwelling": np.int64}
    tx = {f: (np.concatenate(v) if v else np.empty(0)).astype(dtypes.get(f, float)) for f, v in log.items()}
    return SimulationRecord(config=config, seed=seed, prices=prices, occupancy=occupancy,
                            n_bids=n_bids, n_asks=n_asks, priced_out=priced_out, transactions=tx,
                            state=state)


class InsufficientHorizon(ValueError):
    pass


@dataclass
class Summary:
    ring_r: np.ndarray
    ring_mean_price: np.ndarray
    ring_shares: np.ndarray  # (n_rings, K+1); rows sum to 1 where occupied
    ring_population: np.ndarray  # mean known-category occupants per ring
    ring_transactions: np.ndarray
    global_mean_price: float
    HR_mean: float
    HR_min: float
    HR_max: float
    HR_std: float
    HR_series: np.ndarray
    location_mean_price: np.ndarray
    occupancy_mean: np.ndarray  # (n_loc, K+1) window-averaged counts


def summarize(record: SimulationRecord, grid: CityGrid | None = None,
              burn_in: int | None = None, window: int | None = None) -> Summary:
    """Averages over steps [burn_in, burn_in + window)."""
    cfg = record.config
    grid = grid or city_for(cfg)
    burn_in = cfg.burn_in if burn_in is None else burn_in
    window = cfg.window if window is None else window
    if window < 1 or record.horizon < burn_in + window:
        raise InsufficientHorizon(
            f"horizon {record.horizon} < burn_in {burn_in} + window {window}")
    w = slice(burn_in, burn_in + window)

    loc_price = record.prices[w].mean(axis=0)
    ring_price = grid.ring_average(loc_price)

    occ = record.occupancy[w].astype(float)
    occ_mean = occ.mean(axis=0)
    ring_counts = np.zeros((grid.n_rings, occ_mean.shape[1]))
    np.add.at(ring_counts, grid.ring_index, occ_mean)
    ring_pop = ring_counts.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        shares = np.where(ring_pop[:, None] > 0, ring_counts / ring_pop[:, None], 0.0)

    tx = record.transactions
    in_w = (tx["t"] >= burn_in) & (tx["t"] < burn_in + window)
    ring_tx = np.bincount(grid.ring_index[tx["loc"][in_w]], minlength=grid.n_rings).astype(float)
    gmp = global_mean_price(ring_price, ring_tx) if ring_tx.sum() > 0 else float("nan")

    hr = []
    for snap in occ:
        try:
            hr.append(rank_order_index(snap).HR)
        except UndefinedIndex:
            pass
    hr = np.asarray(hr)
    stats = (hr.mean(), hr.min(), hr.max(), hr.std()) if hr.size else (np.nan,) * 4
    return Summary(ring_r=grid.ring_radius, ring_mean_price=ring_price, ring_shares=shares,
                   ring_population=ring_pop, ring_transactions=ring_tx, global_mean_price=gmp,
                   HR_mean=float(stats[0]), HR_min=float(stats[1]), HR_max=float(stats[2]),
                   HR_std=float(stats[3]), HR_series=hr, location_mean_price=loc_price,
                   occupancy_mean=occ_mean)
