"""City lattice, attractiveness field and distance-ring bookkeeping."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class AttractivenessSpec:
    """Gaussian monocentric attractiveness.

    ``R`` is the steepness, ``R_max`` the city radius. With ``cutoff_enabled``
    every location farther than ``R_max`` from the center gets zero.
    """

    R: float = 3.0
    R_max: float = 11.0 / math.sqrt(math.pi)
    cutoff_enabled: bool = False

    def __post_init__(self):
        if self.R <= 0 or self.R_max <= 0:
            raise ValueError("R and R_max must be positive")

    @classmethod
    def from_lattice(cls, L: int, a: float = 1.0, R: float = 3.0, cutoff_enabled: bool = False):
        # pi * R_max^2 equals the lattice area (L a)^2
        return cls(R=R, R_max=L * a / math.sqrt(math.pi), cutoff_enabled=cutoff_enabled)


def attractiveness(r, spec: AttractivenessSpec):
    """exp(-r^2/R^2), zeroed beyond ``R_max`` when the cutoff is on.

    Accepts a scalar or an array of distances.
    """
    r_arr = np.asarray(r, dtype=float)
    out = np.exp(-(r_arr**2) / spec.R**2)
    if spec.cutoff_enabled:
        out = np.where(r_arr > spec.R_max, 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class CityGrid:
    L: int
    a: float
    spec: AttractivenessSpec
    xy: np.ndarray  # (L*L, 2) integer coordinates
    r2: np.ndarray  # squared lattice distance x^2 + y^2
    r: np.ndarray  # Euclidean distance a * sqrt(x^2 + y^2)
    A: np.ndarray  # attractiveness per location
    ring_keys: np.ndarray  # sorted distinct values of r2
    ring_index: np.ndarray  # per location, index into ring_keys

    @property
    def n_locations(self) -> int:
        return self.L * self.L

    @property
    def n_rings(self) -> int:
        return len(self.ring_keys)

    @property
    def ring_radius(self) -> np.ndarray:
        return self.a * np.sqrt(self.ring_keys)

    @property
    def ring_sizes(self) -> np.ndarray:
        return np.bincount(self.ring_index, minlength=self.n_rings)

    @property
    def rings(self) -> dict[int, list[tuple[int, int]]]:
        out: dict[int, list[tuple[int, int]]] = {}
        for (x, y), k in zip(self.xy.tolist(), self.r2.tolist()):
            out.setdefault(int(k), []).append((x, y))
        return out

    @property
    def locations(self) -> list[tuple[int, int]]:
        return [tuple(p) for p in self.xy.tolist()]

    def index_of(self, x: int, y: int) -> int:
        h = (self.L - 1) // 2
        if abs(x) > h or abs(y) > h:
            raise KeyError((x, y))
        return (x + h) * self.L + (y + h)

    def attractiveness_at(self, x: int, y: int) -> float:
        return float(self.A[self.index_of(x, y)])

    def ring_average(self, values: np.ndarray) -> np.ndarray:
        """Average a per-location array (last axis) over each ring."""
        values = np.asarray(values, dtype=float)
        onehot = np.zeros((self.n_locations, self.n_rings))
        onehot[np.arange(self.n_locations), self.ring_index] = 1.0
        return values @ onehot / self.ring_sizes

    def disc_mask(self, radius2: float) -> np.ndarray:
        """Locations with x^2 + y^2 <= radius2 (lattice units)."""
        return self.r2 <= radius2

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "r", "A"])
            for (x, y), r, A in zip(self.xy.tolist(), self.r.tolist(), self.A.tolist()):
                w.writerow([x, y, repr(r), repr(A)])


def build_city(L: int = 11, a: float = 1.0, spec: AttractivenessSpec | None = None) -> CityGrid:
    if int(L) != L or L < 3 or L % 2 == 0:
        raise ValueError(f"L must be an odd integer >= 3, got {L}")
    if a <= 0:
        raise ValueError("lattice spacing a must be positive")
    L = int(L)
    if spec is None:
        spec = AttractivenessSpec.from_lattice(L, a)
    h = (L - 1) // 2
    coords = np.arange(-h, h + 1)
    gx, gy = np.meshgrid(coords, coords, indexing="ij")
    xy = np.column_stack([gx.ravel(), gy.ravel()]).astype(int)
    r2 = (xy**2).sum(axis=1)
    r = a * np.sqrt(r2)
    A = np.asarray(attractiveness(r, spec), dtype=float)
    ring_keys, ring_index = np.unique(r2, return_inverse=True)
    return CityGrid(L=L, a=a, spec=spec, xy=xy, r2=r2, r=r, A=A,
                    ring_keys=ring_keys, ring_index=ring_index.ravel())
