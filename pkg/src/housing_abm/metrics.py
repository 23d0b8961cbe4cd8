"""Inequality and segregation measures.

The segregation index is the rank-order information theory index: for
every income percentile p the city is split into households below and
above p, the Theil entropy index H(p) of that split is computed, and the
entropy-weighted average 2 ln2 * integral of E(p) H(p) dp is reported.
With discrete income categories H is only defined at the cumulative shares
of the categories; between those thresholds it is taken from the nearest
one, which makes the integral a finite sum of closed-form pieces.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .population import IncomeDistribution

LN2 = math.log(2.0)


class UndefinedIndex(ValueError):
    """Fewer than two income categories are present."""


def gini(dist: IncomeDistribution) -> float:
    """Half the relative absolute mean difference of arrival incomes."""
    s = np.asarray(dist.shares)
    k = np.arange(dist.K)
    diff = np.abs(k[:, None] - k[None, :]) * dist.delta
    return float(s @ diff @ s / (2.0 * dist.mean_income))


def binary_entropy(p):
    """-p log2 p - (1-p) log2 (1-p), zero at p in {0, 1}."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        e = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    e = np.where((p <= 0) | (p >= 1), 0.0, e)
    return float(e) if e.ndim == 0 else e


def entropy_integral(p):
    """Antiderivative of :func:`binary_entropy`, zero at p = 0."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p > 0, p * p * np.log(p), 0.0)
        b = np.where(q > 0, q * q * np.log(q), 0.0)
    out = (-0.5 * a + 0.25 * p * p + 0.5 * b - 0.25 * q * q + 0.25) / LN2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SegregationResult:
    HR: float
    thresholds: np.ndarray  # p_j, cumulative category shares
    E: np.ndarray  # E(p_j)
    H: np.ndarray  # H(p_j)
    boundaries: np.ndarray  # segment edges in p, len(thresholds) + 1

    def table(self) -> list[tuple[float, float, float]]:
        return list(zip(self.thresholds.tolist(), self.E.tolist(), self.H.tolist()))

    def H_of_p(self, p):
        """Piecewise-constant H at arbitrary percentiles."""
        idx = np.searchsorted(self.boundaries[1:-1], np.asarray(p, dtype=float), side="right")
        return self.H[idx]


def rank_order_index(counts) -> SegregationResult:
    """Rank-order information theory index of an occupancy snapshot.

    ``counts`` has shape (n_locations, n_categories) with categories in
    increasing income order. Every location enters the location average,
    empty ones with zero entropy.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 2:
        raise ValueError("counts must be 2-D (locations x categories)")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    tot = counts.sum(axis=0)
    counts = counts[:, tot > 0]
    tot = tot[tot > 0]
    if len(tot) < 2:
        raise UndefinedIndex("need at least two income categories present")
    n_loc = counts.shape[0]
    T = tot.sum()
    p = np.cumsum(tot)[:-1] / T
    E = binary_entropy(p)

    pop = counts.sum(axis=1)
    below = np.cumsum(counts, axis=1)[:, :-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        share = np.where(pop[:, None] > 0, below / pop[:, None], 0.0)
    E_X = binary_entropy(share)
    H = 1.0 - E_X.sum(axis=0) / (n_loc * E)

    mids = 0.5 * (p[1:] + p[:-1])
    edges = np.concatenate(([0.0], mids, [1.0]))
    pieces = np.diff(entropy_integral(edges))
    HR = float(2.0 * LN2 * np.dot(H, pieces))
    return SegregationResult(HR=HR, thresholds=p, E=np.atleast_1d(E), H=np.atleast_1d(H),
                             boundaries=edges)


def global_mean_price(prices, weights) -> float:
    """Weighted mean of (ring or location) prices, weights = transaction counts."""
    prices = np.asarray(prices, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if weights.sum() <= 0:
        raise ValueError("no transactions in the measurement window")
    return float(np.dot(prices, weights) / weights.sum())
