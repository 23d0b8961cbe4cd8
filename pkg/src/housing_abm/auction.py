"""Per-location double auction: matching bids with asks and price formation.

Two clearing modes are available. ``batch`` sorts the book once and pairs
the highest remaining bid with the lowest remaining ask while they cross.
``arrival`` feeds orders into a limit order book in random sequence; each
arriving order trades against the best resting opposite order if it can.
"""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass, field

import numpy as np

BATCH = "batch"
ARRIVAL = "arrival"


@dataclass(frozen=True)
class Transaction:
    location: int
    k: int  # buyer category, 0-based
    dwelling: int
    bid: float
    ask: float
    price: float


@dataclass
class ClearingResult:
    transactions: list[Transaction] = field(default_factory=list)
    unmatched_bids: list[int] = field(default_factory=list)  # positions in the input
    unmatched_asks: list[int] = field(default_factory=list)


def transaction_price(bid, ask, nu: float):
    if not 0.0 <= nu <= 1.0:
        raise ValueError("nu must lie in [0, 1]")
    return nu * bid + (1.0 - nu) * ask


def _crosses(bid: float, ask: float, strict: bool) -> bool:
    return bid > ask if strict else bid >= ask


def clear_location(bids, asks, nu: float, mode: str = BATCH, rng=None,
                   strict: bool = False, location: int = 0) -> ClearingResult:
    """Clear one location's book.

    ``bids`` is a sequence of ``(category, bid)`` pairs; ``asks`` a sequence
    of objects with ``dwelling``, ``reservation_price`` and ``listing_age``
    (see :class:`housing_abm.listing.Ask`). Unmatched orders are reported by
    their position in the input sequences.
    """
    bids = list(bids)
    asks = list(asks)
    pairs = match_pairs(bids, asks, mode, rng, strict)
    res = ClearingResult()
    for i, j in pairs:
        k, b = bids[i]
        a = asks[j]
        res.transactions.append(Transaction(location, int(k), int(a.dwelling), float(b),
                                            float(a.reservation_price),
                                            float(transaction_price(b, a.reservation_price, nu))))
    mb = {i for i, _ in pairs}
    ma = {j for _, j in pairs}
    res.unmatched_bids = [i for i in range(len(bids)) if i not in mb]
    res.unmatched_asks = [j for j in range(len(asks)) if j not in ma]
    return res


def match_pairs(bids, asks, mode: str = BATCH, rng=None, strict: bool = False) -> list[tuple[int, int]]:
    """Matched (bid position, ask position) pairs in execution order."""
    if mode == BATCH:
        return _batch_pairs(bids, asks, strict)
    if mode == ARRIVAL:
        if rng is None:
            raise ValueError("arrival mode needs an rng")
        return _arrival_pairs(bids, asks, strict, rng)
    raise ValueError(f"unknown clearing mode {mode!r}")


def _batch_pairs(bids, asks, strict):
    bid_order = sorted(range(len(bids)), key=lambda i: (-bids[i][1], bids[i][0], i))
    ask_order = sorted(range(len(asks)),
                       key=lambda j: (asks[j].reservation_price, -asks[j].listing_age, j))
    pairs = []
    for i, j in zip(bid_order, ask_order):
        if not _crosses(bids[i][1], asks[j].reservation_price, strict):
            break
        pairs.append((i, j))
    return pairs


def _arrival_pairs(bids, asks, strict, rng):
    seq = [("b", i) for i in range(len(bids))] + [("a", j) for j in range(len(asks))]
    perm = rng.permutation(len(seq))
    resting_bids: list = []  # (-price, arrival, index)
    resting_asks: list = []  # (price, arrival, index)
    pairs = []
    for n, p in enumerate(perm):
        side, idx = seq[p]
        if side == "b":
            price = bids[idx][1]
            if resting_asks and _crosses(price, resting_asks[0][0], strict):
                _, _, j = heapq.heappop(resting_asks)
                pairs.append((idx, j))
            else:
                heapq.heappush(resting_bids, (-price, n, idx))
        else:
            price = asks[idx].reservation_price
            if resting_bids and _crosses(-resting_bids[0][0], price, strict):
                _, _, i = heapq.heappop(resting_bids)
                pairs.append((i, idx))
            else:
                heapq.heappush(resting_asks, (price, n, idx))
    return pairs


def clear_book(bid_loc, bid_val, bid_cat, ask_loc, ask_val, ask_age, n_locations: int,
               strict: bool = False):
    """Batch-clear every location at once.

    Returns ``(bid_idx, ask_idx)``: matched pairs as indices into the input
    arrays. Within a location the j-th highest bid meets the j-th lowest ask;
    since bids fall and asks rise along j, the crossing pairs form a prefix.
    Same tie-breaking as :func:`clear_location` in batch mode.
    """
    bid_loc = np.asarray(bid_loc, dtype=np.int64)
    ask_loc = np.asarray(ask_loc, dtype=np.int64)
    bid_val = np.asarray(bid_val, dtype=float)
    ask_val = np.asarray(ask_val, dtype=float)
    b_ord = np.lexsort((np.arange(len(bid_loc)), np.asarray(bid_cat), -bid_val, bid_loc))
    a_ord = np.lexsort((np.arange(len(ask_loc)), -np.asarray(ask_age), ask_val, ask_loc))
    nb = np.bincount(bid_loc, minlength=n_locations)
    na = np.bincount(ask_loc, minlength=n_locations)
    b_start = np.concatenate(([0], np.cumsum(nb)[:-1]))
    a_start = np.concatenate(([0], np.cumsum(na)[:-1]))
    m = np.minimum(nb, na)
    total = int(m.sum())
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    locs = np.repeat(np.arange(n_locations), m)
    offs = np.concatenate(([0], np.cumsum(m)[:-1]))
    j = np.arange(total) - np.repeat(offs, m)
    bi = b_ord[b_start[locs] + j]
    ai = a_ord[a_start[locs] + j]
    ok = bid_val[bi] > ask_val[ai] if strict else bid_val[bi] >= ask_val[ai]
    return bi[ok], ai[ok]


def update_market_price(transaction_prices, previous: float) -> float:
    """Mean of this step's transaction prices, or ``previous`` if none."""
    p = np.asarray(transaction_prices, dtype=float)
    return float(p.mean()) if p.size else float(previous)


def update_market_prices(tx_loc, tx_price, previous: np.ndarray) -> np.ndarray:
    n = len(previous)
    cnt = np.bincount(tx_loc, minlength=n)
    tot = np.bincount(tx_loc, weights=tx_price, minlength=n)
    out = previous.astype(float).copy()
    hit = cnt > 0
    out[hit] = tot[hit] / cnt[hit]
    return out


def write_transactions_csv(path, log, xy) -> None:
    """``log`` is a dict of equal-length arrays: t, loc, k, bid, ask, price."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "k", "bid", "ask", "price"])
        xy = np.asarray(xy)
        for t, loc, k, b, a, p in zip(log["t"].tolist(), log["loc"].tolist(), log["k"].tolist(),
                                       log["bid"].tolist(), log["ask"].tolist(), log["price"].tolist()):
            w.writerow([t, int(xy[loc, 0]), int(xy[loc, 1]), k + 1, repr(b), repr(a), repr(p)])
