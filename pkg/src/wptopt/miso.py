"""Single-node, single-rectenna transmit strategy.

With one harvesting antenna the best beam direction is maximum ratio
transmission, which turns the vector problem into a scalar one: the
received power at transmit power nu is nu * ||g||^2, so the amplitude law
comes straight from the two-point engine on that effective curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eh_model import HarvestCurve
from .two_point import GridSpec, PowerCurve, TwoPointDistribution, grid_search

__all__ = ["MisoStrategy", "mrt_beam", "miso_effective_curve", "solve_miso"]


@dataclass(frozen=True)
class MisoStrategy:
    """Unit-norm beam plus a two-point law over transmit power nu = r^2."""

    beam: np.ndarray
    amplitude_law: TwoPointDistribution

    def __post_init__(self):
        object.__setattr__(self, "beam", np.asarray(self.beam, dtype=complex))
        if abs(np.linalg.norm(self.beam) - 1.0) > 1e-12:
            raise ValueError("beam must be unit norm")


def mrt_beam(g) -> np.ndarray:
    """Maximum ratio transmission beam g^H / ||g||."""
    g = np.asarray(g, dtype=complex).reshape(-1)
    norm = np.linalg.norm(g)
    if norm == 0.0:
        raise ValueError("cannot beamform on a zero channel")
    return g.conj() / norm


def saturating_power(g, curve: HarvestCurve) -> float:
    """Transmit power that drives the rectenna into saturation under MRT."""
    g = np.asarray(g, dtype=complex).reshape(-1)
    gain = float(np.vdot(g, g).real)
    if gain == 0.0:
        raise ValueError("cannot beamform on a zero channel")
    return curve.a_s_sq / gain


def miso_effective_curve(g, curve: HarvestCurve, grid: GridSpec) -> PowerCurve:
    """Best harvested power vs transmit power: phi(nu * ||g||^2)."""
    g = np.asarray(g, dtype=complex).reshape(-1)
    gain = float(np.vdot(g, g).real)
    points = grid.points()
    return PowerCurve(points, curve(points * gain))


def solve_miso(g, curve: HarvestCurve, budget: float,
               grid: GridSpec | None = None) -> MisoStrategy:
    """MRT beam plus the grid-search amplitude law for a given power budget.

    Under the saturating convex harvest model this reproduces the closed
    form: a single mass at the saturating power when the budget affords it,
    otherwise ON-OFF signaling between zero and the saturating power with
    the ON mass fixed by the mean constraint.
    """
    if budget <= 0.0:
        raise ValueError("budget must be positive")
    if grid is None:
        grid = GridSpec.covering(max(saturating_power(g, curve), budget))
    eff = miso_effective_curve(g, curve, grid)
    law = grid_search(eff, budget)
    return MisoStrategy(mrt_beam(g), law)
