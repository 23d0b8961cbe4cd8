"""Supply side: aspiration-level reservation offer prices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Ask:
    dwelling: int
    reservation_price: float
    listing_age: int


def reservation_offer(base_price, listing_age, mu: float, lam: float, tau: int):
    """(1 + mu) * base * lam^floor(age / tau).

    The discount is a staircase: it drops by ``lam`` once every ``tau``
    steps on the market. Vectorized over ``base_price`` and ``listing_age``.
    """
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]")
    if int(tau) != tau or tau < 1:
        raise ValueError("tau must be a positive integer")
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    age = np.asarray(listing_age)
    if np.any(age < 0):
        raise ValueError("listing age must be nonnegative")
    m = age // int(tau)
    out = (1.0 + mu) * np.asarray(base_price, dtype=float) * np.power(lam, m)
    return float(out) if out.ndim == 0 else out
