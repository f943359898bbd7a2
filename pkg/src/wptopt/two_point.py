"""Two-mass-point transmit-power laws over sampled utility curves.

Maximizing E{f(nu)} over distributions of a scalar power nu with a mean
constraint E{nu} <= budget always admits an optimal law with at most two
mass points. This module finds that law for a non-decreasing curve sampled
on a uniform power grid: a min-max search over chord slopes picks the two
grid points, and the mean constraint fixes the masses. The same engine
serves the single-rectenna, multi-rectenna and multi-antenna solvers, which
only differ in how the curve is built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridSpec",
    "PowerCurve",
    "TwoPointDistribution",
    "slope",
    "grid_search",
    "check_tangent_condition",
    "two_point_upper_bound",
    "law_objective",
]

_FLAT_RTOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Uniform power grid rho_j = j * step for j = 0..n_steps."""

    step: float = 0.1
    n_steps: int = 1000

    def __post_init__(self):
        if self.step <= 0.0 or self.n_steps < 1:
            raise ValueError("GridSpec needs step > 0 and n_steps >= 1")

    @property
    def top(self) -> float:
        return self.step * self.n_steps

    def points(self) -> np.ndarray:
        return self.step * np.arange(self.n_steps + 1, dtype=float)

    @classmethod
    def covering(cls, target: float, step: float = 0.1, n_steps: int = 1000) -> "GridSpec":
        """Grid that covers and resolves a saturation/budget target.

        Keeps the default step when the target sits comfortably inside the
        default range; otherwise rescales the step so the target lands at
        ~98% of the grid span (the grid is sized to the problem, the point
        count stays fixed).
        """
        if target <= 0.0:
            raise ValueError("target must be positive")
        span = step * n_steps
        if target <= span / 1.02 and target >= span / n_steps * 100:
            return cls(step=step, n_steps=n_steps)
        return cls(step=1.02 * target / n_steps, n_steps=n_steps)


@dataclass(frozen=True)
class PowerCurve:
    """Sampled map nu -> Phi(nu) on a uniform, strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("grid and values must be equal-length 1-D arrays")
        steps = np.diff(grid)
        if np.any(steps <= 0.0):
            raise ValueError("grid must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValueError("grid step must be constant")
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must be finite")
        tol = _FLAT_RTOL * max(abs(float(values.max())), 1e-300)
        if np.any(np.diff(values) < -tol):
            raise ValueError("curve values must be non-decreasing")

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @classmethod
    def from_function(cls, fn, spec: GridSpec) -> "PowerCurve":
        grid = spec.points()
        return cls(grid, np.asarray(fn(grid), dtype=float))

    def interpolate(self, nu) -> float:
        return float(np.interp(nu, self.grid, self.values))

    def save_text(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# power-curve v1: nu_w phi_w\n")
            for nu, val in zip(self.grid, self.values):
                fh.write(f"{nu:.17g} {val:.17g}\n")

    @classmethod
    def load_text(cls, path) -> "PowerCurve":
        nus, vals = [], []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                a, b = line.split()
                nus.append(float(a))
                vals.append(float(b))
        return cls(np.asarray(nus), np.asarray(vals))


@dataclass(frozen=True)
class TwoPointDistribution:
    """Discrete transmit-power law with at most two mass points.

    The degenerate single-point law is encoded as nu_1 == nu_2 with all
    mass on the first point.
    """

    nu_1: float
    nu_2: float
    weight_1: float
    weight_2: float

    def __post_init__(self):
        if not (0.0 <= self.nu_1 <= self.nu_2):
            raise ValueError("mass points must satisfy 0 <= nu_1 <= nu_2")
        if self.weight_1 < -1e-12 or self.weight_2 < -1e-12:
            raise ValueError("weights must be non-negative")
        if abs(self.weight_1 + self.weight_2 - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")
        if self.nu_1 == self.nu_2 and self.weight_1 != 1.0:
            raise ValueError("degenerate law must carry all mass on nu_1")

    @classmethod
    def single(cls, nu: float) -> "TwoPointDistribution":
        return cls(nu, nu, 1.0, 0.0)

    @property
    def is_degenerate(self) -> bool:
        return self.nu_1 == self.nu_2

    @property
    def mean(self) -> float:
        return self.weight_1 * self.nu_1 + self.weight_2 * self.nu_2

    def expectation(self, fn) -> float:
        if self.is_degenerate:
            return float(fn(self.nu_1))
        return self.weight_1 * float(fn(self.nu_1)) + self.weight_2 * float(fn(self.nu_2))


def slope(nu_1: float, nu_2: float, curve: PowerCurve) -> float:
    """Slope of the chord connecting (nu_1, Phi(nu_1)) and (nu_2, Phi(nu_2))."""
    if nu_2 <= nu_1:
        raise ValueError("slope requires nu_2 > nu_1")
    return (curve.interpolate(nu_2) - curve.interpolate(nu_1)) / (nu_2 - nu_1)


def _snap_index(curve: PowerCurve, budget: float) -> int:
    """Smallest grid index n with rho_n >= budget."""
    return int(np.searchsorted(curve.grid, budget, side="left"))


def check_tangent_condition(curve: PowerCurve, budget: float) -> bool:
    """Tangent majorization at the budget.

    True iff the tangent at the budget (central-difference derivative on
    the grid) lies on or above the curve at every grid point, within
    1e-9 * max value. When it holds, a single mass point at the budget is
    already optimal.
    """
    grid, vals = curve.grid, curve.values
    n = _snap_index(curve, budget)
    if n < 1 or n >= grid.size - 1:
        raise ValueError("budget must lie strictly inside the grid")
    deriv = (vals[n + 1] - vals[n - 1]) / (grid[n + 1] - grid[n - 1])
    tol = _FLAT_RTOL * max(abs(float(vals.max())), 1e-300)
    lhs = deriv * (grid[n] - grid)
    rhs = vals[n] - vals
    return bool(np.all(lhs <= rhs + tol))


def grid_search(curve: PowerCurve, budget: float) -> TwoPointDistribution:
    """Two-point law maximizing the expected curve value at a mean budget.

    Builds the chord-slope matrix over all grid pairs straddling the
    budget, takes the min-max pair, and places masses so the mean equals
    the budget. Collapses to a single mass point when the tangent
    condition holds, or to the cheapest saturating power when the curve
    is already flat at the budget.
    """
    grid, vals = curve.grid, curve.values
    if budget <= 0.0:
        raise ValueError("budget must be positive")
    if budget > grid[-1]:
        raise ValueError("budget exceeds the grid range")
    n = _snap_index(curve, budget)

    # Flat at and beyond the budget: full saturation is affordable, put a
    # single mass on the smallest power that already attains the maximum.
    vmax = float(vals[-1])
    tol = _FLAT_RTOL * max(abs(vmax), 1e-300)
    if vals[n] >= vmax - tol:
        first = int(np.argmax(vals >= vmax - tol))
        return TwoPointDistribution.single(float(grid[first]))

    if 1 <= n <= grid.size - 2 and check_tangent_condition(curve, budget):
        return TwoPointDistribution.single(float(budget))

    # Chord-slope matrix S[i, j] over rho_i < budget <= rho_j'.
    lo_g, lo_v = grid[:n, None], vals[:n, None]
    hi_g, hi_v = grid[None, n:], vals[None, n:]
    sigma = (hi_v - lo_v) / (hi_g - lo_g)
    gamma = sigma.max(axis=1)
    i_star = int(np.argmin(gamma))  # first index wins on ties
    j_star = int(np.argmax(sigma[i_star]))
    nu_1 = float(grid[i_star])
    nu_2 = float(grid[n + j_star])
    w2 = (budget - nu_1) / (nu_2 - nu_1)
    return TwoPointDistribution(nu_1, nu_2, 1.0 - w2, w2)


def law_objective(curve: PowerCurve, law: TwoPointDistribution) -> float:
    """Expected curve value under a two-point law (grid interpolation)."""
    return law.expectation(curve.interpolate)


def two_point_upper_bound(curve: PowerCurve, mean: float) -> float:
    """Best achievable E{Phi(nu)} over laws with E{nu} = mean."""
    return law_objective(curve, grid_search(curve, mean))
