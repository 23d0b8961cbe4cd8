"""Continuum steady-state solutions used as an independent oracle.

All densities are per unit area. For a single income category with all
buyers valuing attractiveness only, the steady-state price has a closed
form in the local buyer density b = Gamma * A(r) / Z. For a general
utility weight the same closed form holds with A/Z replaced by U*/Z*, where
U* depends on the price itself; that case is solved by an outer fixed-point
iteration on Z* and an inner bisection per radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .geometry import AttractivenessSpec, attractiveness


@dataclass(frozen=True)
class AnalyticParams:
    n: float = 100.0  # dwellings per unit area, N / a^2
    gamma: float = 1000.0
    alpha: float = 0.1
    mu: float = 0.1
    nu: float = 0.1
    lam: float = 0.95
    tau: float = 2.0
    Y: float = 15.0
    beta: float = 1.0
    R: float = 3.0
    R_max: float = 11.0 / math.sqrt(math.pi)
    # two-category setting
    Y1: float = 15.0
    delta: float = 5.0
    gamma2: float = 500.0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0 <= self.nu <= 1:
            raise ValueError("nu must lie in [0, 1]")
        if self.n <= 0:
            raise ValueError("n must be positive")
        if not 0 <= self.beta <= 1:
            raise ValueError("beta must lie in [0, 1]")

    @property
    def stickiness(self) -> float:
        """Per-step discount factor lam^(1/tau)."""
        return self.lam ** (1.0 / self.tau)

    @property
    def attractiveness_spec(self) -> AttractivenessSpec:
        return AttractivenessSpec(R=self.R, R_max=self.R_max, cutoff_enabled=True)

    def replace(self, **kw) -> "AnalyticParams":
        return replace(self, **kw)

    @classmethod
    def from_config(cls, cfg, **kw) -> "AnalyticParams":
        """Parameters matching a :class:`SimulationConfig` (first category income)."""
        base = dict(n=cfg.N / cfg.a**2, gamma=cfg.gamma_total, alpha=cfg.alpha, mu=cfg.mu,
                    nu=cfg.nu, lam=cfg.lam, tau=cfg.tau, Y=cfg.Y1, beta=cfg.beta, R=cfg.R,
                    R_max=cfg.L * cfg.a / math.sqrt(math.pi), Y1=cfg.Y1, delta=cfg.delta,
                    gamma2=cfg.gamma_total / 2)
        base.update(kw)
        return cls(**base)


def normalization_Z(params: AnalyticParams, A=None) -> float:
    """2 pi * integral_0^R_max of r A(r) dr.

    Closed form for the Gaussian; any other callable ``A`` is integrated
    adaptively.
    """
    if params.R_max <= 0:
        return 0.0
    if A is None:
        return math.pi * params.R**2 * -math.expm1(-params.R_max**2 / params.R**2)
    val, _ = integrate.quad(lambda r: r * A(r), 0.0, params.R_max, epsrel=1e-10, epsabs=0.0, limit=200)
    return 2.0 * math.pi * val


@dataclass(frozen=True)
class Densities:
    n_b: np.ndarray
    n_s: np.ndarray
    q: np.ndarray
    valid: np.ndarray  # 0 <= q < 1 with positive seller density


def _densities_from_buyers(n_b, params: AnalyticParams) -> Densities:
    n_b = np.asarray(n_b, dtype=float)
    n_s = params.n - (1.0 - params.alpha) / params.alpha * n_b
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(n_s > 0, n_b / n_s, np.inf)
    valid = (n_s > 0) & (q >= 0) & (q < 1)
    return Densities(n_b=n_b, n_s=n_s, q=q, valid=valid)


def densities(r, params: AnalyticParams) -> Densities:
    """Steady-state buyer and seller densities and market tightness at r."""
    A = attractiveness(r, params.attractiveness_spec)
    return _densities_from_buyers(params.gamma * np.asarray(A) / normalization_Z(params), params)


def expected_discount(q, lam: float, tau: float):
    """E[lam^(k/tau)] for a geometric time on market with sale probability q."""
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0) or np.any(q > 1):
        raise ValueError("sale probability must lie in (0, 1]; q = 0 means an infinite wait")
    out = q / (1.0 - lam ** (1.0 / tau) * (1.0 - q))
    return float(out) if out.ndim == 0 else out


def steady_price_from_ratio(ratio, params: AnalyticParams, Y: float | None = None,
                            gamma: float | None = None):
    """Closed-form steady price given the choice density ratio (A/Z or U*/Z*).

    Returns ``(price, clamped)``. The price is pinned at the income ``Y``
    wherever the closed form exceeds it or the tightness leaves [0, 1).
    """
    Y = params.Y if Y is None else Y
    gamma = params.gamma if gamma is None else gamma
    b = gamma * np.asarray(ratio, dtype=float)
    s = params.stickiness
    a, n = params.alpha, params.n
    D = n - (1.0 - a) / a * b - s * (n - b / a)
    denom = D - (1.0 - params.nu) * (1.0 + params.mu) * b
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = params.nu * Y * D / denom
    dens = _densities_from_buyers(b, params)
    clamped = ~dens.valid | (denom <= 0) | ~(raw <= Y)
    price = np.where(clamped, Y, raw)
    if price.ndim == 0:
        return float(price), bool(clamped)
    return price, clamped


def steady_price_beta1(r, params: AnalyticParams, Y: float | None = None, gamma: float | None = None):
    """Steady price at distance r when only attractiveness enters utility."""
    A = attractiveness(r, params.attractiveness_spec)
    return steady_price_from_ratio(np.asarray(A) / normalization_Z(params), params, Y, gamma)


@dataclass
class GeneralBetaSolution:
    r: np.ndarray
    P: np.ndarray
    clamped: np.ndarray
    Z_star: float
    iterations: int
    converged: bool
    history: list

    def unclamped_range(self) -> float:
        p = self.P[~self.clamped]
        return float(p.max() - p.min()) if p.size else 0.0


def _utility(P, A, Y, beta):
    return np.power(np.maximum(Y - P, 0.0), 1.0 - beta) * np.power(A, beta)


def _solve_prices(A, Z_star, params: AnalyticParams, ptol: float):
    """Bisection on P in [0, Y] for P = closed_form(gamma * U(P) / Z*) at every point."""
    Y, beta = params.Y, params.beta
    lo = np.zeros_like(A)
    hi = np.full_like(A, Y)
    while np.max(hi - lo) > ptol:
        mid = 0.5 * (lo + hi)
        target, _ = steady_price_from_ratio(_utility(mid, A, Y, beta) / Z_star, params)
        below = mid < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    _, clamped = steady_price_from_ratio(_utility(lo, A, Y, beta) / Z_star, params)
    P = 0.5 * (lo + hi)
    P = np.where(clamped, Y, P)
    return P, clamped


def solve_general_beta(params: AnalyticParams, grid_size: int = 10000, tol: float = 1e-8,
                       max_iter: int = 500, Z0: float | None = None, ptol: float = 1e-10) -> GeneralBetaSolution:
    """Steady price curve for a general attractiveness weight beta.

    Starts from the closed-form Z (or ``Z0``), solves the pointwise price
    equation, recomputes Z* with the trapezoidal rule on the radial grid and
    repeats until the relative change in Z* drops below ``tol``.
    """
    r = np.linspace(0.0, params.R_max, grid_size)
    A = np.asarray(attractiveness(r, params.attractiveness_spec))
    Z = normalization_Z(params) if Z0 is None else Z0
    history = [Z]
    converged = False
    it = 0
    P = clamped = None
    for it in range(1, max_iter + 1):
        P, clamped = _solve_prices(A, Z, params, ptol)
        U = _utility(P, A, params.Y, params.beta)
        Z_new = 2.0 * math.pi * integrate.trapezoid(r * U, r)
        history.append(Z_new)
        if Z_new <= 0:
            break
        done = abs(Z_new - Z) / Z_new < tol
        Z = Z_new
        if done:
            converged = True
            break
    if converged:
        P, clamped = _solve_prices(A, Z, params, ptol)
    return GeneralBetaSolution(r=r, P=P, clamped=clamped, Z_star=Z, iterations=it,
                               converged=converged, history=history)


@dataclass(frozen=True)
class SegregationRadius:
    r_s: float  # clipped to [0, R_max]
    raw: float  # unclipped value (nan when no segregated region exists)
    flag: str  # "ok", "none" or "whole_city"


def segregation_radius(params: AnalyticParams) -> SegregationRadius:
    """Radius of the central disc where only the richer of two categories can buy.

    Solves P*(r_s) = Y1 for the single-category steady price with income
    Y1 + delta and arrivals gamma2, under Gaussian attractiveness.
    """
    s = params.stickiness
    a, nu, mu = params.alpha, params.nu, params.mu
    rho = params.delta / params.Y1
    afford = 1.0 - nu - nu * rho
    bracket = (1.0 - nu) * (1.0 + mu) + (1.0 - a - s) * afford / a
    num = params.gamma2 * bracket
    den = normalization_Z(params) * params.n * (1.0 - s) * afford
    if afford <= 0 or den <= 0 or num <= 0 or num / den <= 1.0:
        return SegregationRadius(0.0, float("nan"), "none")
    raw = params.R * math.sqrt(math.log(num / den))
    if raw > params.R_max:
        return SegregationRadius(params.R_max, raw, "whole_city")
    return SegregationRadius(raw, raw, "ok")

