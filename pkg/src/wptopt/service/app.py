"""FastAPI service exposing the transmit-strategy solvers.

All endpoints are synchronous and stateless: requests carry the full
system description and seeds, so identical requests return identical
payloads. The CLI mounts this app in-process by default; `wptopt serve`
runs it under uvicorn for remote clients.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..channel import draw_channels
from ..eh_model import HarvestCurve
from ..harness import ExperimentSpec, run_sweep, selftest, spec_from_mapping
from ..mimo import node_powers as mimo_node_powers
from ..mimo import solve_mimo
from ..miso import saturating_power, solve_miso
from ..simo import SimoCurveSpec, solve_simo
from ..two_point import GridSpec
from . import schemas

import numpy as np

app = FastAPI(
    title="wptopt",
    description="Transmit-strategy optimization for wireless power transfer "
                "with saturating non-linear harvesters",
    version=__version__,
)


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", service="wptopt", version=__version__)


@app.post("/api/sweep", response_model=schemas.SweepResponse)
def sweep(request: schemas.SweepRequest) -> schemas.SweepResponse:
    try:
        spec = request.to_spec()
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    rows = run_sweep(spec)
    return schemas.SweepResponse(rows=[schemas.ResultRowModel.from_row(r) for r in rows])


def _beam_pairs(beam) -> list[schemas.ComplexPair]:
    return [schemas.ComplexPair(re=float(e.real), im=float(e.imag)) for e in beam]


@app.post("/api/solve", response_model=schemas.SolveResponse)
def solve(request: schemas.SolveRequest) -> schemas.SolveResponse:
    curve = HarvestCurve(request.rectenna.to_params())
    try:
        config = request.system.to_config()
        channels = draw_channels(config, request.realization)
        budget = request.budget_w
        if request.geometry == "miso":
            if config.n_nodes != 1 or config.nodes[0].n_e != 1:
                raise ValueError("miso geometry needs one node with one rectenna")
            g = channels.rows[0]
            gain = float(np.vdot(g, g).real)
            grid = GridSpec.covering(max(saturating_power(g, curve), budget),
                                     request.grid_step, request.grid_steps)
            strategy = solve_miso(g, curve, budget, grid)
            law = strategy.amplitude_law
            levels = [law.nu_1] if law.is_degenerate else [law.nu_1, law.nu_2]
            masses = [1.0] if law.is_degenerate else [law.weight_1, law.weight_2]
            beams = [_beam_pairs(strategy.beam * math.sqrt(nu)) for nu in levels]
            node = law.expectation(lambda nu: curve(nu * gain))
            return schemas.SolveResponse(
                geometry="miso", power_levels_w=levels, masses=masses,
                beams=beams, objective_w=float(node), node_powers_w=[float(node)])
        if request.geometry == "simo":
            if config.n_t != 1:
                raise ValueError("simo geometry needs a single transmit antenna")
            gains = np.abs(channels.rows[:, 0]) ** 2
            simo_spec = SimoCurveSpec(tuple(zip(gains, channels.row_weights)), curve)
            grid = GridSpec.covering(max(simo_spec.saturating_power(), budget),
                                     request.grid_step, request.grid_steps)
            law = solve_simo(simo_spec, budget, grid)
            levels = [law.nu_1] if law.is_degenerate else [law.nu_1, law.nu_2]
            masses = [1.0] if law.is_degenerate else [law.weight_1, law.weight_2]
            beams = [[schemas.ComplexPair(re=math.sqrt(nu), im=0.0)] for nu in levels]
            node = []
            for m in range(config.n_nodes):
                node_gains = np.abs(channels.node_rows(m)[:, 0]) ** 2
                node.append(law.expectation(
                    lambda nu: float(np.sum(np.asarray(curve(nu * node_gains))))))
            objective = float(np.dot(channels.weights, node))
            return schemas.SolveResponse(
                geometry="simo", power_levels_w=levels, masses=masses,
                beams=beams, objective_w=objective,
                node_powers_w=[float(p) for p in node])
        strategy = solve_mimo(channels, curve, budget, mode=request.engine,
                              tol=request.tol,
                              grid_points=request.strategy_grid_points)
        node = mimo_node_powers(strategy, channels, curve)
        return schemas.SolveResponse(
            geometry="mimo",
            power_levels_w=list(strategy.power_levels),
            masses=list(strategy.probabilities),
            beams=[_beam_pairs(b) for b in strategy.beams],
            objective_w=float(np.dot(channels.weights, node)),
            node_powers_w=[float(p) for p in node])
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.post("/api/curve", response_model=schemas.CurveResponse)
def curve_samples(request: schemas.CurveRequest) -> schemas.CurveResponse:
    mapping = {}
    spec_kwargs = dict(
        geometry=request.geometry,
        n_t=request.system.n_t,
        node_n_e=";".join(str(n.n_e) for n in request.system.nodes),
        node_distance_m=";".join(repr(n.distance_m) for n in request.system.nodes),
        node_weight=";".join(repr(n.weight) for n in request.system.nodes),
        rician_factor=request.system.rician_factor,
        seed=request.system.seed,
        budgets_w=";".join(repr(b) for b in request.budgets_w),
        engine=request.engine,
        realizations=1,
        grid_step=request.grid_step,
        grid_steps=request.grid_steps,
        strategy_grid_points=request.strategy_grid_points,
        tol=request.tol,
        rectenna_a=request.rectenna.a,
        rectenna_b=request.rectenna.b,
        rectenna_i_s=request.rectenna.i_s,
        rectenna_r_l=request.rectenna.r_l,
        rectenna_a_s_sq=request.rectenna.a_s_sq,
    )
    try:
        spec = spec_from_mapping(mapping, **spec_kwargs)
        from ..harness import effective_curve
        pc = effective_curve(spec, request.realization)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return schemas.CurveResponse(nu_w=[float(x) for x in pc.grid],
                                 phi_w=[float(v) for v in pc.values])


@app.post("/api/selftest", response_model=schemas.SelftestResponse)
def run_selftest() -> schemas.SelftestResponse:
    checks = selftest()
    return schemas.SelftestResponse(
        passed=all(c.passed for c in checks),
        checks=[schemas.CheckModel(name=c.name, passed=c.passed, detail=c.detail)
                for c in checks],
    )
