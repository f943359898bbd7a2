"""Single-antenna transmitter, multi-rectenna harvesting nodes.

The transmit symbol is scalar, so only its power matters: the weighted
aggregate curve sums each rectenna's harvest at its own received power and
the two-point engine on that curve yields the optimal amplitude law. With
two rectennas the law lands on the saturation thresholds of the strong and
weak channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eh_model import HarvestCurve
from .two_point import GridSpec, PowerCurve, TwoPointDistribution, grid_search

__all__ = ["SimoCurveSpec", "simo_effective_curve", "solve_simo"]


@dataclass(frozen=True)
class SimoCurveSpec:
    """Per-rectenna squared channel gains with node weights, plus the model.

    ``gains`` holds (|g|^2, weight) pairs, one per rectenna; the weight is
    the owning node's objective weight.
    """

    gains: tuple[tuple[float, float], ...]
    curve: HarvestCurve

    def __post_init__(self):
        gains = tuple((float(g), float(w)) for g, w in self.gains)
        object.__setattr__(self, "gains", gains)
        if not gains:
            raise ValueError("at least one rectenna gain is required")
        for g, w in gains:
            if g < 0.0 or w < 0.0:
                raise ValueError("gains and weights must be non-negative")

    @property
    def gain_array(self) -> np.ndarray:
        return np.array([g for g, _ in self.gains], dtype=float)

    @property
    def weight_array(self) -> np.ndarray:
        return np.array([w for _, w in self.gains], dtype=float)

    def saturating_power(self) -> float:
        """Power at which the weakest (non-zero) rectenna saturates."""
        gains = self.gain_array
        gains = gains[gains > 0.0]
        if gains.size == 0:
            raise ValueError("all rectenna gains are zero")
        return self.curve.a_s_sq / float(gains.min())


def simo_effective_curve(spec: SimoCurveSpec, grid: GridSpec) -> PowerCurve:
    """Weighted aggregate harvest sum(w_p * phi(nu * |g_p|^2))."""
    points = grid.points()
    gains = spec.gain_array
    weights = spec.weight_array
    values = np.zeros_like(points)
    for g, w in zip(gains, weights):
        values += w * np.asarray(spec.curve(points * g))
    return PowerCurve(points, values)


def solve_simo(spec: SimoCurveSpec, budget: float,
               grid: GridSpec | None = None) -> TwoPointDistribution:
    """Two-point transmit-power law for the aggregate curve."""
    if budget <= 0.0:
        raise ValueError("budget must be positive")
    if grid is None:
        grid = GridSpec.covering(max(spec.saturating_power(), budget))
    eff = simo_effective_curve(spec, grid)
    return grid_search(eff, budget)
