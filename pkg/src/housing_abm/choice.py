"""Demand side: indirect utility, location choice and reservation bids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PricedOut(Exception):
    """Every location has zero utility for this category."""


@dataclass(frozen=True)
class PolicyVector:
    """Ad-valorem rate per income category; negative is a subsidy."""

    xi: tuple[float, ...]

    def __post_init__(self):
        xi = tuple(float(v) for v in self.xi)
        object.__setattr__(self, "xi", xi)
        if any(1.0 + v <= 0.0 for v in xi):
            raise ValueError("policy rates must satisfy 1 + xi_k > 0")

    @classmethod
    def none(cls, K: int) -> "PolicyVector":
        return cls((0.0,) * K)

    def __len__(self):
        return len(self.xi)

    def __getitem__(self, k):
        return self.xi[k]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.xi, dtype=float)


def indirect_utility(Y, xi, P, A, beta):
    """(Y - (1+xi) P)^(1-beta) * A^beta where affordable, else 0.

    Broadcasts over array arguments.
    """
    z = np.asarray(Y, dtype=float) - (1.0 + np.asarray(xi, dtype=float)) * np.asarray(P, dtype=float)
    A = np.asarray(A, dtype=float)
    affordable = z > 0
    zpos = np.where(affordable, z, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.power(zpos, 1.0 - beta) * np.power(A, beta)
    u = np.where(affordable, u, 0.0)
    if u.ndim == 0:
        return float(u)
    return u


def normalize(utilities) -> np.ndarray:
    """Utilities to choice probabilities; raises PricedOut on an all-zero field."""
    u = np.asarray(utilities, dtype=float)
    if not np.all(np.isfinite(u)) or np.any(u < 0):
        raise FloatingPointError("utilities must be finite and nonnegative")
    total = u.sum()
    if total <= 0:
        raise PricedOut
    return u / total


def choice_probabilities(Y, xi, prices, A, beta) -> np.ndarray:
    """Probability of picking each location, proportional to utility.

    Returns an empty array when the category is priced out everywhere.
    """
    try:
        return normalize(indirect_utility(Y, xi, prices, A, beta))
    except PricedOut:
        return np.empty(0)


def sample_buyer_locations(count: int, pi, rng: np.random.Generator, n_locations: int | None = None) -> np.ndarray:
    """Multinomial draw of ``count`` buyers over locations.

    An empty ``pi`` (priced out) yields all zeros; those buyers leave.
    """
    pi = np.asarray(pi, dtype=float)
    if pi.size == 0:
        return np.zeros(n_locations or 0, dtype=np.int64)
    if count == 0:
        return np.zeros(len(pi), dtype=np.int64)
    return rng.multinomial(int(count), pi)


def reservation_bid(Y, zeta: float = 1.0, xi=0.0):
    """Maximum bid, zeta * Y / (1 + xi)."""
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    out = zeta * np.asarray(Y, dtype=float) / (1.0 + np.asarray(xi, dtype=float))
    return float(out) if out.ndim == 0 else out


def write_choice_csv(path, xy, utilities_by_k, probs_by_k) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "k", "U", "pi"])
        for k, (u, p) in enumerate(zip(utilities_by_k, probs_by_k), start=1):
            p = p if len(p) else np.zeros(len(u))
            for (x, y), uu, pp in zip(np.asarray(xy).tolist(), u, p):
                w.writerow([x, y, k, repr(float(uu)), repr(float(pp))])
