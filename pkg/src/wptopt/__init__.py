"""Transmit-strategy optimization for multi-user MIMO wireless power
transfer with saturating non-linear energy harvesters."""

__version__ = "0.1.0"

from .channel import NodeConfig, SystemConfig, draw_channels, path_loss_db
from .eh_model import DEFAULT_RECTENNA, HarvestCurve, RectennaParams
from .mimo import MimoStrategy, phi_optimal, phi_suboptimal, solve_mimo
from .miso import MisoStrategy, mrt_beam, solve_miso
from .simo import SimoCurveSpec, solve_simo
from .two_point import GridSpec, PowerCurve, TwoPointDistribution, grid_search

__all__ = [
    "__version__",
    "DEFAULT_RECTENNA",
    "GridSpec",
    "HarvestCurve",
    "MimoStrategy",
    "MisoStrategy",
    "NodeConfig",
    "PowerCurve",
    "RectennaParams",
    "SimoCurveSpec",
    "SystemConfig",
    "TwoPointDistribution",
    "draw_channels",
    "grid_search",
    "mrt_beam",
    "path_loss_db",
    "phi_optimal",
    "phi_suboptimal",
    "solve_mimo",
    "solve_miso",
    "solve_simo",
]
