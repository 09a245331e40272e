"""Generalized Beurling densities of one measure against another.

The true densities are limits of sup/inf ball-mass ratios over all centers
as the radius grows.  Here centers run over a finite grid in a box and radii
over a finite schedule, so the output is a finite-scale surrogate; the
schedule travels with the estimate so that every reported number is scoped.
For periodic point sets the center box can be one fundamental cell, where
the grid sup/inf equals the global one by periodicity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .space import Ball, CountingMeasure, Lattice, LebesgueMeasure, PointSet

__all__ = ["DensitySchedule", "DensityEstimate", "density", "classical_density", "lattice_schedule"]

DEFAULT_RADII = (4.0, 8.0, 16.0, 32.0, 64.0, 128.0)


@dataclass(frozen=True)
class DensitySchedule:
    """Radii schedule plus a center grid specification."""

    radii: tuple
    center_box: tuple  # (lo, hi) arrays
    center_spacing: float

    def __post_init__(self):
        r = tuple(float(x) for x in self.radii)
        if len(r) == 0 or any(b <= a for a, b in zip(r, r[1:])) or r[0] <= 0:
            raise ValueError("radii must be a strictly increasing positive sequence")
        object.__setattr__(self, "radii", r)
        if self.center_spacing <= 0:
            raise ValueError("center spacing must be positive")
        lo = np.asarray(self.center_box[0], dtype=float)
        hi = np.asarray(self.center_box[1], dtype=float)
        if lo.shape != hi.shape or np.any(hi < lo):
            raise ValueError("center box is empty or malformed")
        object.__setattr__(self, "center_box", (lo, hi))

    def centers(self) -> np.ndarray:
        lo, hi = self.center_box
        axes = []
        for a, b in zip(lo, hi):
            n = max(1, int(math.floor((b - a) / self.center_spacing)) + 1)
            axes.append(a + self.center_spacing * np.arange(n))
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


@dataclass(frozen=True)
class DensityEstimate:
    per_radius: tuple  # rows (r, sup_ratio, inf_ratio)
    upper: float
    lower: float
    converged: bool
    trend: float  # |ratio(r_max) - ratio(r_max/2)|, the convergence diagnostic

    def row(self, r: float):
        for row in self.per_radius:
            if row[0] == r:
                return row
        raise KeyError(f"radius {r} not in the schedule")


def default_schedule(dim: int, r_max: float = 128.0, box_half: float = 16.0, spacing: float = 1.0) -> DensitySchedule:
    radii = tuple(r for r in DEFAULT_RADII if r <= r_max)
    lo = -box_half * np.ones(dim)
    hi = box_half * np.ones(dim)
    return DensitySchedule(radii, (lo, hi), spacing)


def lattice_schedule(scale: float, dim: int, r_max: float = 128.0) -> DensitySchedule:
    """Periodic-cell schedule: centers cover one fundamental cell of the lattice."""
    radii = tuple(r for r in DEFAULT_RADII if r <= r_max)
    spacing = min(1.0, scale / 2.0)
    lo = np.zeros(dim)
    hi = np.full(dim, scale * (1.0 - 1e-9))  # half-open cell
    return DensitySchedule(radii, (lo, hi), spacing)


def density(mu, nu, sched: DensitySchedule, quad_cfg=None, trend_tol: float = 0.05) -> DensityEstimate:
    """Sup/inf ball-mass ratios mu(B)/nu(B) over the schedule.

    Requires nu(B(a, r_min)) > 0 at every sampled center, mirroring the
    standing assumption on the reference measure.
    """
    centers = sched.centers()
    rows = []
    ratios_by_radius = {}
    for r in sched.radii:
        sup_ratio = -math.inf
        inf_ratio = math.inf
        for a in centers:
            b = Ball(a, r)
            nub = nu.ball_mass(b, quad_cfg=quad_cfg)
            if nub <= 0:
                raise ValueError("reference measure vanishes on a ball")
            ratio = mu.ball_mass(b, quad_cfg=quad_cfg) / nub
            sup_ratio = max(sup_ratio, ratio)
            inf_ratio = min(inf_ratio, ratio)
        rows.append((r, sup_ratio, inf_ratio))
        ratios_by_radius[r] = (sup_ratio, inf_ratio)

    r_max = sched.radii[-1]
    upper, lower = ratios_by_radius[r_max]
    half = r_max / 2.0
    if half in ratios_by_radius:
        prev = ratios_by_radius[half]
        trend = max(abs(upper - prev[0]), abs(lower - prev[1]))
    elif len(sched.radii) > 1:
        prev = ratios_by_radius[sched.radii[-2]]
        trend = max(abs(upper - prev[0]), abs(lower - prev[1]))
    else:
        trend = math.inf
    scale = max(abs(upper), abs(lower), 1e-12)
    return DensityEstimate(
        per_radius=tuple(rows),
        upper=upper,
        lower=lower,
        converged=bool(trend <= trend_tol * scale),
        trend=trend,
    )


def classical_density(lambda_set, d: int, sched: DensitySchedule, quad_cfg=None) -> DensityEstimate:
    """Classical Beurling densities: counting measure of a set against Lebesgue."""
    if isinstance(lambda_set, (PointSet, Lattice)):
        mu = CountingMeasure(lambda_set)
    elif isinstance(lambda_set, CountingMeasure):
        mu = lambda_set
    else:
        mu = CountingMeasure(PointSet(lambda_set))
    if mu.dim != d:
        raise ValueError("point set dimension does not match d")
    return density(mu, LebesgueMeasure(d), sched, quad_cfg=quad_cfg)
