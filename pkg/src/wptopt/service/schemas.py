"""Pydantic request/response models for the solver service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..channel import NodeConfig, SystemConfig
from ..eh_model import DEFAULT_RECTENNA, RectennaParams
from ..harness import ExperimentSpec, ResultRow


class NodeModel(BaseModel):
    n_e: int = Field(ge=1)
    distance_m: float = Field(gt=0.0)
    weight: float = Field(ge=0.0)


class SystemModel(BaseModel):
    n_t: int = Field(ge=1)
    nodes: list[NodeModel]
    rician_factor: float = Field(default=1.0, ge=0.0)
    seed: int = 0

    def to_config(self) -> SystemConfig:
        return SystemConfig(
            n_t=self.n_t,
            nodes=tuple(NodeConfig(n.n_e, n.distance_m, n.weight) for n in self.nodes),
            rician_factor=self.rician_factor,
            seed=self.seed,
        )


class RectennaModel(BaseModel):
    a: float = DEFAULT_RECTENNA.a
    b: float = DEFAULT_RECTENNA.b
    i_s: float = DEFAULT_RECTENNA.i_s
    r_l: float = DEFAULT_RECTENNA.r_l
    a_s_sq: float = DEFAULT_RECTENNA.a_s_sq

    def to_params(self) -> RectennaParams:
        return RectennaParams(self.a, self.b, self.i_s, self.r_l, self.a_s_sq)


class SweepRequest(BaseModel):
    geometry: Literal["miso", "simo", "mimo"]
    system: SystemModel
    budgets_w: list[float]
    experiment_id: str = "sweep"
    weight_sweep: Optional[list[list[float]]] = None
    engine: Literal["optimal", "suboptimal"] = "suboptimal"
    realizations: int = Field(default=50, ge=1)
    rectenna: RectennaModel = RectennaModel()
    grid_step: float = Field(default=0.1, gt=0.0)
    grid_steps: int = Field(default=1000, ge=1)
    strategy_grid_points: int = Field(default=200, ge=2)
    tol: float = Field(default=1e-3, gt=0.0)

    def to_spec(self) -> ExperimentSpec:
        sweep = None
        if self.weight_sweep is not None:
            sweep = tuple(tuple(ws) for ws in self.weight_sweep)
        return ExperimentSpec(
            geometry=self.geometry,
            config=self.system.to_config(),
            budgets=tuple(self.budgets_w),
            experiment_id=self.experiment_id,
            weight_sweep=sweep,
            engine=self.engine,
            realizations=self.realizations,
            rectenna=self.rectenna.to_params(),
            grid_step=self.grid_step,
            grid_steps=self.grid_steps,
            strategy_grid_points=self.strategy_grid_points,
            tol=self.tol,
        )


class ResultRowModel(BaseModel):
    experiment_id: str
    realization: int
    budget_w: float
    weights: list[float]
    node_powers_w: list[float]
    objective_w: Optional[float]  # None when the cell solve failed
    engine: str
    wall_time_s: float
    error: Optional[str] = None

    @classmethod
    def from_row(cls, row: ResultRow) -> "ResultRowModel":
        objective = row.objective_w
        return cls(
            experiment_id=row.experiment_id,
            realization=row.realization,
            budget_w=row.budget_w,
            weights=list(row.weights),
            node_powers_w=list(row.node_powers_w),
            objective_w=None if objective != objective else objective,
            engine=row.engine,
            wall_time_s=row.wall_time_s,
            error=row.error,
        )


class SweepResponse(BaseModel):
    rows: list[ResultRowModel]


class SolveRequest(BaseModel):
    geometry: Literal["miso", "simo", "mimo"]
    system: SystemModel
    budget_w: float = Field(gt=0.0)
    realization: int = Field(default=0, ge=0)
    engine: Literal["optimal", "suboptimal"] = "suboptimal"
    rectenna: RectennaModel = RectennaModel()
    grid_step: float = Field(default=0.1, gt=0.0)
    grid_steps: int = Field(default=1000, ge=1)
    strategy_grid_points: int = Field(default=200, ge=2)
    tol: float = Field(default=1e-3, gt=0.0)


class ComplexPair(BaseModel):
    re: float
    im: float


class SolveResponse(BaseModel):
    geometry: str
    power_levels_w: list[float]
    masses: list[float]
    beams: list[list[ComplexPair]]
    objective_w: float
    node_powers_w: list[float]


class CurveRequest(BaseModel):
    geometry: Literal["miso", "simo", "mimo"]
    system: SystemModel
    budgets_w: list[float] = [10.0]
    realization: int = Field(default=0, ge=0)
    engine: Literal["optimal", "suboptimal"] = "suboptimal"
    rectenna: RectennaModel = RectennaModel()
    grid_step: float = Field(default=0.1, gt=0.0)
    grid_steps: int = Field(default=1000, ge=1)
    strategy_grid_points: int = Field(default=200, ge=2)
    tol: float = Field(default=1e-3, gt=0.0)


class CurveResponse(BaseModel):
    nu_w: list[float]
    phi_w: list[float]


class CheckModel(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class SelftestResponse(BaseModel):
    passed: bool
    checks: list[CheckModel]


class HealthResponse(BaseModel):
    status: str
    service: str
    version: str
