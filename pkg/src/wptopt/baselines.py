"""Comparison schemes: linear-model energy beamforming and one fixed beam.

Baseline 1 ignores the harvester non-linearity and points the whole budget
along the dominant eigenvector of the weighted received-power Gram matrix,
which is optimal when harvested power is proportional to received power.
Baseline 2 keeps the non-linear objective but restricts the transmitter to
a single deterministic beam, solved by either Phi engine at the full
budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eh_model import HarvestCurve
from .mimo import phi_optimal, phi_suboptimal

__all__ = ["BaselineStrategy", "baseline_energy_beam", "baseline_single_beam"]


@dataclass(frozen=True)
class BaselineStrategy:
    beam: np.ndarray
    label: str

    def __post_init__(self):
        object.__setattr__(self, "beam", np.asarray(self.beam, dtype=complex))

    @property
    def power(self) -> float:
        return float(np.linalg.norm(self.beam) ** 2)


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate so the first non-negligible component is real positive."""
    mags = np.abs(vec)
    idx = int(np.argmax(mags > 1e-12 * mags.max()))
    phase = vec[idx] / abs(vec[idx])
    return vec / phase


def baseline_energy_beam(channels, budget: float) -> BaselineStrategy:
    """Scheme 1: scaled dominant eigenvector of the weighted Gram matrix."""
    if budget <= 0.0:
        raise ValueError("budget must be positive")
    rows = channels.rows
    xi = channels.row_weights
    gram = (rows.conj().T * xi) @ rows
    _, vecs = np.linalg.eigh(gram)
    beam = _fix_phase(vecs[:, -1]) * np.sqrt(budget)
    return BaselineStrategy(beam, "energy-beam")


def baseline_single_beam(channels, curve: HarvestCurve, budget: float,
                         engine: str = "suboptimal") -> BaselineStrategy:
    """Scheme 2: the Phi engine's achieving beam at the full budget."""
    if budget <= 0.0:
        raise ValueError("budget must be positive")
    if engine == "optimal":
        res = phi_optimal(channels, curve, budget)
    elif engine == "suboptimal":
        res = phi_suboptimal(channels, curve, budget)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return BaselineStrategy(res.beam, f"single-beam-{engine}")
