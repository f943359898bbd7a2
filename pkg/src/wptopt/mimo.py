"""Multi-antenna transmit strategies for multi-rectenna harvesting nodes.

The scalar engine needs the curve Phi(nu) = max over beams of norm-squared
nu of the weighted harvested power Psi(w). Two engines compute it:

* ``phi_optimal`` - global polyblock outer approximation. The search runs
  in the non-negative orthant of per-antenna magnitudes (where the
  objective, maximized over the relative phases, is monotone and the
  feasible set is normal); each candidate magnitude vector is scored after
  a coarse-to-fine alignment of the relative phases. Exponential in the
  antenna count, so capped.
* ``phi_suboptimal`` - lift to W = w w^H, pick the largest prefix of
  norm-sorted rectennas that can be driven into saturation, then ascend
  the linearized objective over that region until the value stalls and
  read the beam off the dominant eigenvector. Polynomial and, in practice,
  nearly as good.

``solve_mimo`` samples Phi on a power grid with either engine, applies the
two-point law search, and returns the at-most-two-beamformer strategy.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .convex_engine import (
    extract_rank_one,
    prefix_pattern,
    solve_feasibility,
    solve_linearized_step,
)
from .eh_model import HarvestCurve
from .two_point import PowerCurve, TwoPointDistribution, grid_search

__all__ = [
    "PhiResult",
    "MimoStrategy",
    "ScaMonotonicityError",
    "weighted_sum_objective",
    "phi_optimal",
    "phi_suboptimal",
    "all_saturation_power",
    "sample_phi_curve",
    "solve_mimo",
    "node_powers",
    "save_strategy",
]


class ScaMonotonicityError(RuntimeError):
    """The surrogate ascent decreased, which the theory forbids."""


@dataclass
class PhiResult:
    """Achieved objective value and beam for one Phi(nu) evaluation."""

    value: float
    beam: np.ndarray
    k_star: int | None = None
    rank_residual: float | None = None
    history: tuple[float, ...] = ()
    iterations: int = 0
    gap: float | None = None
    bounds: tuple[tuple[float, float], ...] = ()


def weighted_sum_objective(channels, curve: HarvestCurve, w) -> float:
    """Weighted harvested power Psi(w) = sum_m xi_m sum_p phi(|g_p^m w|^2)."""
    w = np.asarray(w, dtype=complex).reshape(-1)
    z = channels.rows @ w
    return float(channels.row_weights @ np.asarray(curve(np.abs(z) ** 2)))


def _objective_batch(rows, xi, curve, beams) -> np.ndarray:
    """Psi for a batch of beams stacked as columns."""
    power = np.abs(rows @ beams) ** 2
    return xi @ np.asarray(curve(power))


def _aligned_objective(rows, xi, curve, magnitudes, rounds: int = 2):
    """Max of Psi over relative phases for fixed per-antenna magnitudes.

    Grid search over the free phases (component 0 pinned to phase zero),
    refined ``rounds`` times around the best candidate.
    """
    m = np.asarray(magnitudes, dtype=float)
    n = m.size
    if n == 1:
        beam = m.astype(complex)
        return float(_objective_batch(rows, xi, curve, beam[:, None])[0]), beam
    d = n - 1
    coarse = 48 if d == 1 else 16
    centers = np.zeros(d)
    span = np.pi  # phases searched in [center - span, center + span)

    best_val, best_theta = -np.inf, centers
    for _ in range(rounds + 1):
        axes = [centers[i] + np.linspace(-span, span, coarse, endpoint=False)
                for i in range(d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        thetas = np.stack([ax.ravel() for ax in mesh], axis=0)  # (d, C)
        beams = np.empty((n, thetas.shape[1]), dtype=complex)
        beams[0] = m[0]
        beams[1:] = m[1:, None] * np.exp(1j * thetas)
        vals = _objective_batch(rows, xi, curve, beams)
        idx = int(np.argmax(vals))
        if vals[idx] > best_val:
            best_val = float(vals[idx])
            best_theta = thetas[:, idx]
        centers = best_theta
        span = 2.0 * span / coarse
        coarse = 9 if d == 1 else 7
    beam = np.empty(n, dtype=complex)
    beam[0] = m[0]
    beam[1:] = m[1:] * np.exp(1j * best_theta)
    return best_val, beam


def _box_bound(abs_rows, xi, curve, cs_power, y) -> float:
    """Upper bound on the objective over the box [0, y] within the ball.

    Each rectenna's received power is capped by its fully phase-aligned
    value at the box corner and by the Cauchy-Schwarz ceiling ||g||^2 nu
    on the ball; the harvest curve is monotone, so pushing both caps
    through it bounds the weighted sum.
    """
    corner = (abs_rows @ y) ** 2
    return float(xi @ np.asarray(curve(np.minimum(corner, cs_power))))


def phi_optimal(channels, curve: HarvestCurve, nu: float, tol: float = 1e-3,
                max_antennas: int = 3, max_iterations: int = 200000,
                max_vertices: int = 100000) -> PhiResult:
    """Global Phi(nu) by polyblock outer approximation in magnitude space.

    Vertices enclose the magnitude ball ||m||^2 <= nu from above; the
    vertex with the best box bound is projected onto the sphere, the
    incumbent keeps the best feasible projection, and the vertex is split
    into one child per antenna. Terminates when the selected vertex is
    within ``tol`` relative distance of its projection, or as soon as the
    best remaining box bound certifies the incumbent as tol-optimal.
    Raises on the antenna cap and the iteration limit.
    """
    if nu <= 0.0:
        raise ValueError("nu must be positive")
    rows, xi = channels.rows, channels.row_weights
    n_t = rows.shape[1]
    if n_t > max_antennas:
        raise ValueError(
            f"polyblock engine capped at {max_antennas} antennas, got {n_t}")
    root = math.sqrt(nu)
    if n_t == 1:
        beam = np.array([root], dtype=complex)
        val = float(_objective_batch(rows, xi, curve, beam[:, None])[0])
        return PhiResult(val, beam, gap=0.0)

    abs_rows = np.abs(rows)
    cs_power = np.sum(abs_rows**2, axis=1) * nu

    y0 = np.full(n_t, root)
    heap = [(-_box_bound(abs_rows, xi, curve, cs_power, y0), 0, y0)]
    counter = 1
    best_val, best_beam = -np.inf, None
    bounds: list[tuple[float, float]] = []
    gap = np.inf
    iterations = 0

    while heap:
        iterations += 1
        if iterations > max_iterations:
            raise RuntimeError("polyblock iteration limit exceeded")
        neg_b, _, y = heapq.heappop(heap)
        b_y = -neg_b
        if best_val > 0.0 and b_y <= best_val * (1.0 + tol):
            gap = max(b_y / best_val - 1.0, 0.0)
            break
        chi = y * (root / np.linalg.norm(y))
        f_chi, beam = _aligned_objective(rows, xi, curve, chi)
        if f_chi > best_val:
            best_val, best_beam = f_chi, beam
        bounds.append((b_y, best_val))
        gap = float(np.linalg.norm(y - chi) / np.linalg.norm(y))
        if gap <= tol:
            break
        for k in range(n_t):
            child = y.copy()
            child[k] = chi[k]
            b_child = _box_bound(abs_rows, xi, curve, cs_power, child)
            if b_child > best_val:
                heapq.heappush(heap, (-b_child, counter, child))
                counter += 1
        if len(heap) > max_vertices:
            heap = heapq.nsmallest(max_vertices, heap)
            heapq.heapify(heap)

    # Final phase polish on the incumbent magnitudes.
    mags = np.abs(best_beam)
    val, beam = _aligned_objective(rows, xi, curve, mags, rounds=4)
    if val < best_val:
        val, beam = best_val, best_beam
    norm = np.linalg.norm(beam)
    if norm > 0.0:
        beam = beam * (root / norm)
    return PhiResult(float(val), beam, iterations=iterations, gap=gap,
                     bounds=tuple(bounds))


def _row_powers(rows, w_mat) -> np.ndarray:
    """Received powers g_p W g_p^H for a Hermitian transmit covariance."""
    return np.real(np.einsum("pi,ij,pj->p", rows, w_mat, rows.conj()))


def _psi_hat(rows, xi, curve, w_mat) -> float:
    """Objective on the lifted matrix: sum xi phi(g W g^H)."""
    powers = _row_powers(rows, w_mat)
    return float(xi @ np.asarray(curve(np.maximum(powers, 0.0))))


def phi_suboptimal(channels, curve: HarvestCurve, nu: float, tol: float = 1e-3,
                   max_iterations: int = 60, k_floor: int = 0,
                   warm_start: np.ndarray | None = None) -> PhiResult:
    """Suboptimal Phi(nu) via saturation-set selection plus linearized ascent.

    Rectennas are sorted by channel norm; the largest feasible count k* of
    top rectennas is driven into saturation and the weighted objective is
    maximized over that region by iterating its tangent linearization to a
    stationary point (relative stall <= tol). The beam is the dominant
    eigenvector of the final matrix, rescaled to transmit power nu.

    ``k_floor`` asserts that saturating that many top rectennas is already
    known to be feasible at this budget (feasibility is monotone in nu, so
    ascending sweeps can pass the previous k*). ``warm_start`` replaces the
    default scaled-identity linearization point.
    """
    if nu <= 0.0:
        raise ValueError("nu must be positive")
    rows, xi = channels.rows, channels.row_weights
    n_t = rows.shape[1]
    sat = curve.a_s_sq
    if n_t == 1:
        beam = np.array([math.sqrt(nu)], dtype=complex)
        val = float(_objective_batch(rows, xi, curve, beam[:, None])[0])
        return PhiResult(val, beam, k_star=None)

    norms = np.linalg.norm(rows, axis=1)
    order = np.argsort(-norms, kind="stable")
    k_total = rows.shape[0]

    k_star = k_floor
    for k in range(k_total, k_floor, -1):
        if solve_feasibility(rows, prefix_pattern(order, k, sat), nu, sat).feasible:
            k_star = k
            break
    pattern = prefix_pattern(order, k_star, sat)

    w_mat = warm_start if warm_start is not None else (nu / n_t) * np.eye(n_t)
    h_prev = 0.0
    history = [0.0]
    sat_list = list(pattern.saturated)
    # Evaluate slopes at powers clamped to the below-saturation cap: the
    # constraints pin unsaturated rectennas there, and solver noise around
    # the boundary must not flip their slope to the flat region's zero.
    cap = sat - pattern.margin
    for step in range(max_iterations):
        powers = _row_powers(rows, w_mat)
        grad_powers = np.clip(powers, 0.0, cap)
        weights = xi * np.asarray(curve.derivative(grad_powers))
        # Rectennas constrained into saturation sit in the flat clamp
        # region by construction; zeroing them keeps the linearization an
        # under-estimator even when the solver parks their power exactly
        # on the boundary.
        weights[sat_list] = 0.0
        if not np.any(weights > 0.0):
            if step == 0:
                # Everything is already saturated at the linearization
                # point; one received-power step keeps the result rank one.
                weights = xi.astype(float)
            else:
                break
        grad = (rows.conj().T * weights) @ rows
        w_next = solve_linearized_step(rows, pattern, nu, grad, sat)
        h = _psi_hat(rows, xi, curve, w_next)
        if h < h_prev:
            # Ties at the fixed point resolve within solver accuracy; keep
            # the better iterate and stop. A drop beyond the stall
            # tolerance would mean the surrogate is not an under-estimator.
            if h >= h_prev - tol * max(abs(h_prev), 1e-300):
                break
            raise ScaMonotonicityError(
                f"ascent value dropped from {h_prev} to {h}")
        w_mat = w_next
        history.append(h)
        if abs(h - h_prev) <= tol * max(abs(h), 1e-300):
            break
        h_prev = h

    vec, residual = extract_rank_one(w_mat)
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        beam = vec * (math.sqrt(nu) / norm)
    else:
        beam = np.zeros(n_t, dtype=complex)
    val = float(_objective_batch(rows, xi, curve, beam[:, None])[0])
    return PhiResult(val, beam, k_star=k_star, rank_residual=residual,
                     history=tuple(history), iterations=len(history) - 1)


def all_saturation_power(channels, curve: HarvestCurve,
                         rel_tol: float = 1e-3) -> float:
    """Smallest transmit power that can saturate every rectenna (bisection)."""
    rows = _rows_of(channels)
    sat = curve.a_s_sq
    gains = np.sum(np.abs(rows) ** 2, axis=1)
    if np.any(gains == 0.0):
        raise ValueError("a zero channel row can never be saturated")
    n_t = rows.shape[1]
    k_total = rows.shape[0]
    lo = sat / float(gains.min())
    if k_total == 1:
        return lo
    hi = n_t * lo  # a scaled identity saturates everything at this power
    order = np.argsort(-np.linalg.norm(rows, axis=1), kind="stable")
    pattern = prefix_pattern(order, k_total, sat)
    if solve_feasibility(rows, pattern, lo, sat).feasible:
        return lo
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if solve_feasibility(rows, pattern, mid, sat).feasible:
            hi = mid
        else:
            lo = mid
    return hi


def _rows_of(channels) -> np.ndarray:
    rows = getattr(channels, "rows", channels)
    return np.asarray(rows, dtype=complex)


def _engine(channels, curve, nu, mode, tol, k_floor=0, warm_start=None) -> PhiResult:
    if mode == "optimal":
        return phi_optimal(channels, curve, nu, tol)
    if mode == "suboptimal":
        return phi_suboptimal(channels, curve, nu, tol,
                              k_floor=k_floor, warm_start=warm_start)
    raise ValueError(f"unknown engine mode {mode!r}")


def sample_phi_curve(channels, curve: HarvestCurve, top: float,
                     n_steps: int = 200, mode: str = "suboptimal",
                     tol: float = 1e-3):
    """Sample Phi on a uniform grid [0, top], returning curve and beams.

    The sweep ascends in power, warm-starting each sample from the
    previous beam and flooring every value with the rescaled previous beam
    (a feasible candidate, since Phi is non-decreasing); the sampled curve
    is therefore monotone with a matching achieving beam per point.
    """
    n_t = _rows_of(channels).shape[1]
    grid = np.linspace(0.0, top, n_steps + 1)
    values = np.zeros(n_steps + 1)
    beams = [np.zeros(n_t, dtype=complex)]
    ceiling = float(channels.row_weights.sum()) * curve.saturation_value
    k_floor = 0
    prev_beam = beams[0]
    prev_val = 0.0
    for i in range(1, n_steps + 1):
        nu = float(grid[i])
        scaled = prev_beam * math.sqrt(nu / grid[i - 1]) if grid[i - 1] > 0 else prev_beam
        if prev_val >= ceiling * (1.0 - 1e-12) and np.any(scaled != 0.0):
            floor_val = weighted_sum_objective(channels, curve, scaled)
            val, beam = floor_val, scaled
        else:
            warm = np.outer(scaled, scaled.conj()) if np.any(scaled != 0.0) else None
            res = _engine(channels, curve, nu, mode, tol,
                          k_floor=k_floor, warm_start=warm)
            val, beam = res.value, res.beam
            if mode == "suboptimal" and res.k_star is not None:
                k_floor = res.k_star
            if np.any(scaled != 0.0):
                floor_val = weighted_sum_objective(channels, curve, scaled)
                if floor_val > val:
                    val, beam = floor_val, scaled
        values[i] = val
        beams.append(beam)
        prev_beam, prev_val = beam, val
    return PowerCurve(grid, values), beams


@dataclass(frozen=True)
class MimoStrategy:
    """At most two beamforming vectors with probabilities.

    ``power_levels[i]`` is the squared norm of ``beams[i]``; the reported
    objective is the probability mix of the per-beam weighted harvested
    powers.
    """

    beams: tuple[np.ndarray, ...]
    probabilities: tuple[float, ...]
    power_levels: tuple[float, ...]
    objective: float
    law: TwoPointDistribution
    engine: str

    def __post_init__(self):
        if len(self.beams) not in (1, 2):
            raise ValueError("strategy must hold one or two beams")
        if not (len(self.beams) == len(self.probabilities) == len(self.power_levels)):
            raise ValueError("beams, probabilities and levels must align")
        if abs(sum(self.probabilities) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to one")
        for beam, level in zip(self.beams, self.power_levels):
            got = float(np.linalg.norm(beam) ** 2)
            if abs(got - level) > 1e-6 * max(level, 1e-300):
                raise ValueError("beam norm does not match its power level")

    @property
    def mean_power(self) -> float:
        return float(sum(p * lv for p, lv in zip(self.probabilities,
                                                 self.power_levels)))


def solve_mimo(channels, curve: HarvestCurve, budget: float,
               mode: str = "suboptimal", tol: float = 1e-3,
               grid_points: int = 200) -> MimoStrategy:
    """At-most-two-beamformer strategy for a transmit power budget.

    Samples Phi(nu) up to the all-saturation power (or the budget if it is
    larger), runs the two-point grid search, and recovers the achieving
    beams at the selected mass points. The degenerate cases follow the
    scalar engine: a single beam at the budget when the tangent condition
    holds, and the cheapest saturating beam when the budget affords full
    saturation. A direct single-beam solve at the exact budget is kept as
    a candidate so the finite grid never loses to the one-point strategy.
    """
    if budget <= 0.0:
        raise ValueError("budget must be positive")
    sat_all = all_saturation_power(channels, curve)
    top = 1.02 * max(sat_all, budget)
    phi_curve, beams = sample_phi_curve(channels, curve, top,
                                        n_steps=grid_points, mode=mode, tol=tol)
    law = grid_search(phi_curve, budget)
    step = phi_curve.step

    def sample_at(nu: float):
        idx = int(round(nu / step))
        if abs(phi_curve.grid[idx] - nu) <= 1e-9 * max(nu, step):
            return float(phi_curve.values[idx]), beams[idx]
        res = _engine(channels, curve, nu, mode, tol)
        return res.value, res.beam

    if law.is_degenerate:
        val, beam = sample_at(law.nu_1)
        return MimoStrategy((beam,), (1.0,), (law.nu_1,), val, law, mode)

    v1, b1 = sample_at(law.nu_1)
    v2, b2 = sample_at(law.nu_2)
    objective = law.weight_1 * v1 + law.weight_2 * v2

    direct = _engine(channels, curve, budget, mode, tol)
    if direct.value > objective:
        single = TwoPointDistribution.single(budget)
        return MimoStrategy((direct.beam,), (1.0,), (budget,),
                            direct.value, single, mode)
    return MimoStrategy((b1, b2), (law.weight_1, law.weight_2),
                        (law.nu_1, law.nu_2), objective, law, mode)


def node_powers(strategy: MimoStrategy, channels, curve: HarvestCurve) -> np.ndarray:
    """Expected harvested power per node under the strategy (unweighted)."""
    n_nodes = int(channels.node_of_row.max()) + 1
    out = np.zeros(n_nodes)
    for prob, beam in zip(strategy.probabilities, strategy.beams):
        z = np.abs(channels.rows @ beam) ** 2
        harvested = np.asarray(curve(z))
        for m in range(n_nodes):
            out[m] += prob * float(harvested[channels.node_of_row == m].sum())
    return out


def save_strategy(strategy: MimoStrategy, path) -> None:
    """Dump mass points, masses, beams (re/im pairs) and the objective."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# mimo-strategy v1\n")
        fh.write(f"# engine={strategy.engine}\n")
        fh.write(f"# objective_w={strategy.objective:.17g}\n")
        for prob, level, beam in zip(strategy.probabilities,
                                     strategy.power_levels, strategy.beams):
            comps = " ".join(f"{e.real:.17g} {e.imag:.17g}" for e in beam)
            fh.write(f"mass {prob:.17g} power {level:.17g} beam {comps}\n")
