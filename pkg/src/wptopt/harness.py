"""Batch experiment driver: Monte-Carlo sweeps, persistence, selftests.

A sweep walks (realization, weight vector, budget) cells, draws the
channels for each realization from its own PRNG substream, solves the
configured geometry, and records per-node average harvested powers. Cells
are independent; a failed solve is recorded in its row and the sweep
continues. Re-running a spec with the same seed reproduces the result
files byte for byte (wall times are zeroed at write time unless timing is
explicitly requested, since they are the one column that cannot be
reproducible).
"""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import baseline_energy_beam, baseline_single_beam
from .channel import ChannelSet, NodeConfig, SystemConfig, draw_channels, path_loss_db
from .convex_engine import prefix_pattern, solve_feasibility, solve_linearized_step
from .eh_model import (
    DEFAULT_RECTENNA,
    HarvestCurve,
    RectennaParams,
    bessel_i0,
    check_assumption_convexity,
    check_assumption_quadratic,
    lambert_w0,
)
from .mimo import node_powers as mimo_node_powers
from .mimo import solve_mimo, weighted_sum_objective
from .miso import saturating_power, solve_miso
from .simo import SimoCurveSpec, solve_simo
from .two_point import GridSpec, PowerCurve, grid_search, law_objective

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "SummaryRow",
    "run_sweep",
    "summarize",
    "write_csv",
    "write_json",
    "region_weights",
    "parse_config_text",
    "spec_from_mapping",
    "effective_curve",
    "selftest",
]

CSV_COLUMNS = ("experiment_id", "realization", "budget_w", "weights",
               "node_powers_w", "objective_w", "engine", "wall_time_s")

GEOMETRIES = ("miso", "simo", "mimo")


@dataclass(frozen=True)
class ExperimentSpec:
    geometry: str
    config: SystemConfig
    budgets: tuple[float, ...]
    experiment_id: str = "sweep"
    weight_sweep: tuple[tuple[float, ...], ...] | None = None
    engine: str = "suboptimal"
    realizations: int = 50
    rectenna: RectennaParams = DEFAULT_RECTENNA
    grid_step: float = 0.1
    grid_steps: int = 1000
    strategy_grid_points: int = 200
    tol: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "budgets", tuple(float(b) for b in self.budgets))
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"geometry must be one of {GEOMETRIES}")
        if self.engine not in ("optimal", "suboptimal"):
            raise ValueError("engine must be 'optimal' or 'suboptimal'")
        if self.realizations < 1:
            raise ValueError("at least one realization is required")
        if not self.budgets or any(b <= 0.0 for b in self.budgets):
            raise ValueError("budgets must be a non-empty list of positive watts")
        if self.weight_sweep is not None:
            sweep = tuple(tuple(float(w) for w in ws) for ws in self.weight_sweep)
            if not sweep:
                raise ValueError("weight sweep must not be empty")
            object.__setattr__(self, "weight_sweep", sweep)
        if self.geometry == "miso":
            if self.config.n_nodes != 1 or self.config.nodes[0].n_e != 1:
                raise ValueError("miso geometry needs one node with one rectenna")
        if self.geometry == "simo" and self.config.n_t != 1:
            raise ValueError("simo geometry needs a single transmit antenna")


@dataclass(frozen=True)
class ResultRow:
    experiment_id: str
    realization: int
    budget_w: float
    weights: tuple[float, ...]
    node_powers_w: tuple[float, ...]
    objective_w: float
    engine: str
    wall_time_s: float
    error: str | None = None


@dataclass(frozen=True)
class SummaryRow:
    budget_w: float
    weights: tuple[float, ...]
    n: int
    mean_objective_w: float
    stderr_objective_w: float
    mean_node_powers_w: tuple[float, ...]
    stderr_node_powers_w: tuple[float, ...]


def _simo_spec(channels: ChannelSet, curve: HarvestCurve) -> SimoCurveSpec:
    gains = np.abs(channels.rows[:, 0]) ** 2
    return SimoCurveSpec(tuple(zip(gains, channels.row_weights)), curve)


def _solve_cell(spec: ExperimentSpec, channels: ChannelSet, budget: float,
                curve: HarvestCurve):
    """Solve one (channels, budget) cell; returns (node_powers, engine label)."""
    if spec.geometry == "miso":
        g = channels.rows[0]
        gain = float(np.vdot(g, g).real)
        grid = GridSpec.covering(max(saturating_power(g, curve), budget),
                                 spec.grid_step, spec.grid_steps)
        strategy = solve_miso(g, curve, budget, grid)
        power = strategy.amplitude_law.expectation(lambda nu: curve(nu * gain))
        return (power,), "grid-search"

    if spec.geometry == "simo":
        simo_spec = _simo_spec(channels, curve)
        grid = GridSpec.covering(max(simo_spec.saturating_power(), budget),
                                 spec.grid_step, spec.grid_steps)
        law = solve_simo(simo_spec, budget, grid)
        powers = []
        for m in range(channels.config.n_nodes):
            gains = np.abs(channels.node_rows(m)[:, 0]) ** 2
            powers.append(law.expectation(
                lambda nu: float(np.sum(np.asarray(curve(nu * gains))))))
        return tuple(powers), "grid-search"

    strategy = solve_mimo(channels, curve, budget, mode=spec.engine,
                          tol=spec.tol, grid_points=spec.strategy_grid_points)
    return tuple(mimo_node_powers(strategy, channels, curve)), spec.engine


def run_sweep(spec: ExperimentSpec) -> list[ResultRow]:
    """Run the full (realization x weights x budget) sweep."""
    curve = HarvestCurve(spec.rectenna)
    sweeps = spec.weight_sweep or (tuple(spec.config.weights),)
    rows: list[ResultRow] = []
    for realization in range(spec.realizations):
        base = draw_channels(spec.config, realization)
        for weights in sweeps:
            channels = base if weights == tuple(spec.config.weights) \
                else base.with_weights(weights)
            for budget in spec.budgets:
                start = time.perf_counter()
                try:
                    powers, engine = _solve_cell(spec, channels, budget, curve)
                    objective = float(np.dot(channels.weights, powers))
                    error = None
                except Exception as exc:  # noqa: BLE001 - recorded, sweep continues
                    powers, engine = (), spec.engine
                    objective = math.nan
                    error = f"{type(exc).__name__}: {exc}"
                rows.append(ResultRow(
                    experiment_id=spec.experiment_id,
                    realization=realization,
                    budget_w=float(budget),
                    weights=tuple(weights),
                    node_powers_w=tuple(float(p) for p in powers),
                    objective_w=objective,
                    engine=engine,
                    wall_time_s=time.perf_counter() - start,
                    error=error,
                ))
    return rows


def summarize(rows: list[ResultRow]) -> list[SummaryRow]:
    """Mean and standard error per (budget, weights) cell across realizations."""
    if not rows:
        raise ValueError("no rows to summarize")
    cells: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        if row.error is not None:
            continue
        cells.setdefault((row.budget_w, row.weights), []).append(row)
    out = []
    for (budget, weights), group in cells.items():
        objs = np.array([r.objective_w for r in group])
        node = np.array([r.node_powers_w for r in group])
        n = len(group)
        stderr = lambda a: (a.std(axis=0, ddof=1) / math.sqrt(n)) if n > 1 else np.zeros(a.shape[1:])
        out.append(SummaryRow(
            budget_w=budget, weights=weights, n=n,
            mean_objective_w=float(objs.mean()),
            stderr_objective_w=float(stderr(objs)),
            mean_node_powers_w=tuple(node.mean(axis=0)),
            stderr_node_powers_w=tuple(np.atleast_1d(stderr(node))),
        ))
    out.sort(key=lambda s: (s.budget_w, s.weights))
    return out


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    return repr(float(x))


def _row_record(row: ResultRow, timing: bool) -> dict:
    wall = row.wall_time_s if timing else 0.0
    return {
        "experiment_id": row.experiment_id,
        "realization": row.realization,
        "budget_w": row.budget_w,
        "weights": list(row.weights),
        "node_powers_w": list(row.node_powers_w),
        "objective_w": None if math.isnan(row.objective_w) else row.objective_w,
        "engine": row.engine,
        "wall_time_s": wall,
        "error": row.error,
    }


def csv_text(rows: list[ResultRow], timing: bool = False) -> str:
    """Render rows as CSV (fixed column order, '.' decimals, UTF-8)."""
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        wall = row.wall_time_s if timing else 0.0
        buf.write(",".join([
            row.experiment_id,
            str(row.realization),
            _fmt(row.budget_w),
            ";".join(_fmt(w) for w in row.weights),
            ";".join(_fmt(p) for p in row.node_powers_w),
            _fmt(row.objective_w),
            row.engine,
            f"{wall:.6f}",
        ]) + "\n")
    return buf.getvalue()


def write_csv(rows: list[ResultRow], path, timing: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text(rows, timing))


def write_json(rows: list[ResultRow], path, timing: bool = False) -> None:
    records = [_row_record(r, timing) for r in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")


def region_weights(points: int = 11) -> tuple[tuple[float, float], ...]:
    """Two-node weight vectors tracing xi_1 from 0 to 1."""
    if points < 2:
        raise ValueError("need at least two weight points")
    xs = np.linspace(0.0, 1.0, points)
    return tuple((float(x), float(1.0 - x)) for x in xs)


# ---------------------------------------------------------------------------
# Flat key-value configuration.


def parse_config_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def _floats(text: str, sep: str = ";") -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(sep) if part.strip())


def spec_from_mapping(mapping: dict[str, str], **overrides) -> ExperimentSpec:
    """Build an ExperimentSpec from flat config keys plus overrides.

    Recognized keys mirror the spec fields: geometry, n_t, node_n_e,
    node_distance_m, node_weight (semicolon-joined per node), rician_factor,
    seed, budgets_w, weight_sweep (vectors comma-joined, semicolon-
    separated), engine, realizations, grid_step, grid_steps,
    strategy_grid_points, tol, experiment_id and rectenna_{a,b,i_s,r_l,a_s_sq}.
    """
    get = lambda key, default=None: overrides.get(key, mapping.get(key, default))

    n_e = [int(x) for x in str(get("node_n_e", "1")).split(";") if str(x).strip()]
    dists = _floats(str(get("node_distance_m", "10")))
    weights = _floats(str(get("node_weight", "1")))
    if not (len(n_e) == len(dists) == len(weights)):
        raise ValueError("node_n_e, node_distance_m and node_weight must align")
    nodes = tuple(NodeConfig(e, d, w) for e, d, w in zip(n_e, dists, weights))
    config = SystemConfig(
        n_t=int(get("n_t", 1)),
        nodes=nodes,
        rician_factor=float(get("rician_factor", 1.0)),
        seed=int(get("seed", 0)),
    )
    rectenna = RectennaParams(
        a=float(get("rectenna_a", DEFAULT_RECTENNA.a)),
        b=float(get("rectenna_b", DEFAULT_RECTENNA.b)),
        i_s=float(get("rectenna_i_s", DEFAULT_RECTENNA.i_s)),
        r_l=float(get("rectenna_r_l", DEFAULT_RECTENNA.r_l)),
        a_s_sq=float(get("rectenna_a_s_sq", DEFAULT_RECTENNA.a_s_sq)),
    )
    sweep_text = get("weight_sweep")
    weight_sweep = None
    if sweep_text:
        weight_sweep = tuple(_floats(vec, sep=",") for vec in str(sweep_text).split(";"))
    return ExperimentSpec(
        geometry=str(get("geometry", "mimo")),
        config=config,
        budgets=_floats(str(get("budgets_w", "10"))),
        experiment_id=str(get("experiment_id", "sweep")),
        weight_sweep=weight_sweep,
        engine=str(get("engine", "suboptimal")),
        realizations=int(get("realizations", 50)),
        rectenna=rectenna,
        grid_step=float(get("grid_step", 0.1)),
        grid_steps=int(get("grid_steps", 1000)),
        strategy_grid_points=int(get("strategy_grid_points", 200)),
        tol=float(get("tol", 1e-3)),
    )


def effective_curve(spec: ExperimentSpec, realization: int = 0) -> PowerCurve:
    """The Phi(nu) samples the configured geometry would optimize over."""
    curve = HarvestCurve(spec.rectenna)
    channels = draw_channels(spec.config, realization)
    top = max(spec.budgets)
    if spec.geometry == "miso":
        g = channels.rows[0]
        grid = GridSpec.covering(max(saturating_power(g, curve), top),
                                 spec.grid_step, spec.grid_steps)
        from .miso import miso_effective_curve
        return miso_effective_curve(g, curve, grid)
    if spec.geometry == "simo":
        simo_spec = _simo_spec(channels, curve)
        grid = GridSpec.covering(max(simo_spec.saturating_power(), top),
                                 spec.grid_step, spec.grid_steps)
        from .simo import simo_effective_curve
        return simo_effective_curve(simo_spec, grid)
    from .mimo import all_saturation_power, sample_phi_curve
    sat_all = all_saturation_power(channels, curve)
    curve_top = 1.02 * max(sat_all, top)
    phi_curve, _ = sample_phi_curve(channels, curve, curve_top,
                                    n_steps=spec.strategy_grid_points,
                                    mode=spec.engine, tol=spec.tol)
    return phi_curve


# ---------------------------------------------------------------------------
# Invariant selftest.


@dataclass(frozen=True)
class SelfCheck:
    name: str
    passed: bool
    detail: str = ""


def _brute_force_best_pair(grid, values, budget):
    """Max mean-matched expectation over all straddling grid pairs."""
    best = (-math.inf, 0.0, 0.0)
    for i in range(len(grid)):
        if grid[i] >= budget:
            break
        for j in range(i + 1, len(grid)):
            if grid[j] < budget:
                continue
            w2 = (budget - grid[i]) / (grid[j] - grid[i])
            val = (1.0 - w2) * values[i] + w2 * values[j]
            if val > best[0] + 1e-15:
                best = (val, grid[i], grid[j])
    return best


def selftest() -> list[SelfCheck]:
    """Fast invariant suite across all modules (a few seconds)."""
    checks: list[SelfCheck] = []
    curve = HarvestCurve(DEFAULT_RECTENNA)
    sat = curve.a_s_sq

    xs = np.linspace(0.0, sat, 2001)
    vals = np.asarray(curve(xs))
    mono = bool(np.all(np.diff(vals) >= -1e-12 * vals.max()))
    flat = bool(np.allclose(curve(np.linspace(sat, 4 * sat, 64)),
                            curve.saturation_value, rtol=0, atol=0))
    checks.append(SelfCheck("harvest-curve-monotone-saturating", mono and flat))

    checks.append(SelfCheck(
        "harvest-curve-structural-assumptions",
        check_assumption_convexity(curve, 10_000) and
        check_assumption_quadratic(curve, 10_000)))

    ws = np.linspace(0.0, 20.0, 257)
    back = np.array([lambert_w0(w * math.exp(w)) for w in ws])
    checks.append(SelfCheck(
        "lambert-w-round-trip",
        bool(np.all(np.abs(back - ws) <= 1e-10 * (1.0 + ws)))))

    series = sum((1.5 / 2.0) ** (2 * k) / math.factorial(k) ** 2 for k in range(40))
    checks.append(SelfCheck(
        "bessel-i0-series-agreement",
        abs(bessel_i0(1.5) - series) <= 1e-12 * series))

    checks.append(SelfCheck(
        "path-loss-reference-points",
        abs(path_loss_db(1.0) - 35.3) < 1e-12 and
        abs(path_loss_db(10.0) - 72.9) < 1e-12 and
        abs(path_loss_db(100.0) - 110.5) < 1e-12))

    cfg = SystemConfig(n_t=2, nodes=(NodeConfig(2, 10.0, 1.0),), seed=123)
    same = np.array_equal(draw_channels(cfg, 5).rows, draw_channels(cfg, 5).rows)
    differ = not np.array_equal(draw_channels(cfg, 5).rows, draw_channels(cfg, 6).rows)
    checks.append(SelfCheck("channel-draws-deterministic", same and differ))

    rng = np.random.default_rng(2024)
    ok = True
    for _ in range(3):
        values = np.cumsum(rng.uniform(0.0, 1.0, 121))
        values[90:] = values[90]
        grid = 0.05 * np.arange(121)
        pc = PowerCurve(grid, values)
        budget = float(grid[int(rng.integers(10, 80))])
        law = grid_search(pc, budget)
        got = law_objective(pc, law)
        want = _brute_force_best_pair(grid, values, budget)[0]
        ok = ok and abs(got - want) <= 1e-9 * abs(want)
    checks.append(SelfCheck("grid-search-matches-pair-oracle", ok))

    g = (rng.standard_normal(3) + 1j * rng.standard_normal(3)) * 2e-3
    gain = float(np.vdot(g, g).real)
    pmax = sat / gain
    grid_spec = GridSpec(step=pmax / 400, n_steps=900)
    law = solve_miso(g, curve, 0.25 * pmax, grid_spec).amplitude_law
    miso_ok = (abs(law.nu_1) <= grid_spec.step and
               abs(law.nu_2 - pmax) <= grid_spec.step and
               abs(law.weight_2 - 0.25 * pmax / law.nu_2) <= 1e-6)
    law_hi = solve_miso(g, curve, 2.0 * pmax, grid_spec).amplitude_law
    miso_ok = miso_ok and law_hi.is_degenerate and abs(law_hi.nu_1 - pmax) <= grid_spec.step
    checks.append(SelfCheck("miso-on-off-closed-form", miso_ok))

    g1, g2 = 2.0e-7, 1.0e-7
    spec2 = SimoCurveSpec(((g1, 1.0), (g2, 1.0)), curve)
    rho_min, rho_max = sat / g1, sat / g2
    step = rho_max / 400
    grid2 = GridSpec(step=step, n_steps=900)
    low = solve_simo(spec2, 0.5 * rho_min, grid2)
    mid = solve_simo(spec2, 0.5 * (rho_min + rho_max), grid2)
    high = solve_simo(spec2, 2.0 * rho_max, grid2)
    simo_ok = (abs(low.nu_1) <= step and abs(low.nu_2 - rho_min) <= step and
               abs(mid.nu_1 - rho_min) <= step and abs(mid.nu_2 - rho_max) <= step and
               high.is_degenerate and abs(high.nu_1 - rho_max) <= step)
    checks.append(SelfCheck("simo-two-rectifier-closed-form", simo_ok))

    row = ((rng.standard_normal(2) + 1j * rng.standard_normal(2)) * 1e-3)[None, :]
    thr = sat / float(np.vdot(row[0], row[0]).real)
    pat = prefix_pattern([0], 1, sat)
    feas_ok = (not solve_feasibility(row, pat, 0.99 * thr, sat).feasible and
               solve_feasibility(row, pat, 1.01 * thr, sat).feasible)
    c_mat = np.array([[2.0, 0.3 + 0.1j], [0.3 - 0.1j, 1.0]])
    w_mat = solve_linearized_step(row * 1e-6, prefix_pattern([0], 0, sat),
                                  1.0, c_mat, sat)
    lam = float(np.linalg.eigvalsh(c_mat)[-1])
    dual_ok = abs(float(np.trace(c_mat @ w_mat).real) - lam) <= 1e-8 * lam
    checks.append(SelfCheck("convex-engine-oracle-agreement", feas_ok and dual_ok))

    return checks
