"""Non-linear rectenna harvest model.

Maps received signal power |z|^2 (watt) at a rectenna to harvested DC power
(watt) through a diode-based curve with hard saturation: inputs at or above
the saturation level ``a_s_sq`` produce a constant output. Below saturation
the curve is smooth, convex and grows slower than quadratically; the checks
at the bottom of this module verify those structural properties by dense
sampling so that the optimizers built on top can rely on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special

__all__ = [
    "RectennaParams",
    "HarvestCurve",
    "DEFAULT_RECTENNA",
    "lambert_w0",
    "bessel_i0",
    "harvested_power",
    "check_assumption_convexity",
    "check_assumption_quadratic",
]

_NEG_INV_E = -1.0 / math.e


def lambert_w0(x):
    """Principal branch of the Lambert-W function.

    Accepts a scalar or array with every element >= -1/e and returns w such
    that w * exp(w) = x. Raises ValueError outside the real domain.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < _NEG_INV_E):
        raise ValueError("lambert_w0 requires x >= -1/e")
    w = np.real(special.lambertw(arr, k=0))
    if arr.ndim == 0:
        return float(w)
    return w


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Defined here for x >= 0. Raises OverflowError once the value exceeds
    the double range (x beyond roughly 713).
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("bessel_i0 requires x >= 0")
    out = special.i0(arr)
    if np.any(np.isinf(out)):
        raise OverflowError("bessel_i0 overflow for large argument")
    if arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class RectennaParams:
    """Circuit constants of the harvest curve.

    a        composite diode constant (dimensionless)
    b        input scaling (1/sqrt(watt))
    i_s      saturation current (ampere)
    r_l      load resistance (ohm)
    a_s_sq   input power at which the output saturates (watt)
    """

    a: float
    b: float
    i_s: float
    r_l: float
    a_s_sq: float

    def __post_init__(self):
        for name in ("a", "b", "i_s", "r_l", "a_s_sq"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"RectennaParams.{name} must be positive")


# Measured rectifier constants used throughout the experiment defaults.
DEFAULT_RECTENNA = RectennaParams(a=1.29, b=1.55e3, i_s=5e-6, r_l=1e4, a_s_sq=25e-6)


class HarvestCurve:
    """Evaluates harvested power as a function of received signal power.

    The unclamped branch is
        phi(x) = [ W0(a * e^a * I0(b * sqrt(2x))) / a - 1 ]^2 * i_s^2 * r_l
    and the curve returned by ``__call__`` is min{phi(x), phi(a_s_sq)}.
    Since phi is strictly increasing below the I0 overflow range, inputs at
    or above ``a_s_sq`` are evaluated as the saturation constant directly,
    which keeps arbitrarily large inputs finite.
    """

    def __init__(self, params: RectennaParams):
        self.params = params

    @property
    def a_s_sq(self) -> float:
        return self.params.a_s_sq

    @cached_property
    def saturation_value(self) -> float:
        return self._unclamped(np.asarray(self.params.a_s_sq))

    def _unclamped(self, x):
        p = self.params
        s = p.b * np.sqrt(2.0 * x)
        v = p.a * math.exp(p.a) * bessel_i0(s)
        w = lambert_w0(v)
        return (w / p.a - 1.0) ** 2 * p.i_s**2 * p.r_l

    def __call__(self, input_power):
        x = np.asarray(input_power, dtype=float)
        if np.any(x < 0.0):
            raise ValueError("input power must be non-negative")
        sat = self.saturation_value
        below = np.minimum(x, self.params.a_s_sq)
        out = np.minimum(self._unclamped(below), sat)
        out = np.where(x >= self.params.a_s_sq, sat, out)
        if x.ndim == 0:
            return float(out)
        return out

    def derivative(self, input_power):
        """d(harvested)/d(input power); zero in the saturated region.

        Uses W0'(v) = W0(v) / (v * (1 + W0(v))) and I0' = I1, with the
        I1(s)/s -> 1/2 limit handled so the value at zero input is finite.
        """
        x = np.asarray(input_power, dtype=float)
        if np.any(x < 0.0):
            raise ValueError("input power must be non-negative")
        p = self.params
        xx = np.minimum(x, p.a_s_sq)
        s = p.b * np.sqrt(2.0 * xx)
        aea = p.a * math.exp(p.a)
        v = aea * special.i0(s)
        w = np.real(special.lambertw(v, k=0))
        i1_over_s = np.where(s > 1e-8, special.i1(np.maximum(s, 1e-300)) / np.maximum(s, 1e-300), 0.5)
        du_dx = w / (v * (1.0 + w)) * aea * i1_over_s * p.b**2
        dphi = 2.0 * (w / p.a - 1.0) * (1.0 / p.a) * du_dx * p.i_s**2 * p.r_l
        out = np.where(x >= p.a_s_sq, 0.0, dphi)
        if x.ndim == 0:
            return float(out)
        return out


def harvested_power(curve: HarvestCurve, input_power):
    """Harvested power min{phi(input), phi(a_s_sq)} for the given curve."""
    return curve(input_power)


def _check_grid(curve, samples: int):
    x = np.linspace(0.0, curve.a_s_sq, samples)
    return x, np.asarray(curve(x), dtype=float)


def check_assumption_convexity(curve, samples: int) -> bool:
    """Discrete midpoint convexity of the curve on [0, a_s_sq].

    True iff f(x-h) + f(x+h) - 2 f(x) >= -tol on a uniform grid of
    ``samples`` points, with tol = 1e-12 * saturation value.
    """
    if samples < 3:
        raise ValueError("convexity check needs at least 3 samples")
    _, vals = _check_grid(curve, samples)
    tol = 1e-12 * float(curve(curve.a_s_sq))
    second = vals[:-2] + vals[2:] - 2.0 * vals[1:-1]
    return bool(np.all(second >= -tol))


def check_assumption_quadratic(curve, samples: int) -> bool:
    """Sub-quadratic growth: f(x) >= sat * (x / a_s_sq)^2 on [0, a_s_sq]."""
    if samples < 2:
        raise ValueError("quadratic-growth check needs at least 2 samples")
    x, vals = _check_grid(curve, samples)
    sat = float(curve(curve.a_s_sq))
    tol = 1e-12 * sat
    bound = sat * (x / curve.a_s_sq) ** 2
    return bool(np.all(vals >= bound - tol))
