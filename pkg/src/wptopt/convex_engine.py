"""Convex matrix subproblems for the multi-antenna solver.

Two small dense problems over complex PSD matrices W of size n_t x n_t:

* saturation feasibility - can a transmit covariance with trace <= nu
  drive a chosen set of rectennas to the saturation input power while
  keeping the rest strictly below it? Decided by maximizing the minimum
  saturation slack, so a feasible verdict comes with a margin certificate.
* linearized ascent step - maximize Tr{C W} over the same region for a
  Hermitian gradient matrix C.

Problems are normalized (V = W / nu, unit channel rows) so the watt-scale
constants do not wreck conditioning. The default backend assembles the
real symmetric embedding of the Hermitian problem (see below) and hands it
to the Clarabel interior-point solver directly; a cvxpy backend with the
same contract is kept for cross-validation.

Real embedding convention (fixed, so fixtures transfer):
  V = X + iY maps to M = [[X, -Y], [Y, X]] of size 2n x 2n; M is PSD iff V
  is. The variable vector stacks diag(V) (n reals) followed by
  (Re V_ij, Im V_ij) for i < j in row-major order. The PSD cone receives
  the upper triangle of M scanned column-wise with off-diagonal entries
  scaled by sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass

import clarabel
import numpy as np
from scipy import sparse

__all__ = [
    "SaturationPattern",
    "FeasibilityResult",
    "ConvexSolverError",
    "prefix_pattern",
    "solve_feasibility",
    "solve_linearized_step",
    "extract_rank_one",
    "check_constraints",
    "dump_solve_trace",
]

# Normalized slack below which a max-slack optimum counts as infeasible.
_FEAS_TOL = 1e-7

_OK_STATUSES = ("Solved", "AlmostSolved")


class ConvexSolverError(RuntimeError):
    """Solver failed to converge (distinct from a clean infeasible verdict)."""


@dataclass(frozen=True)
class SaturationPattern:
    """Partition of rectenna indices into saturated / unsaturated lists.

    ``margin`` closes the strict below-saturation inequalities: unsaturated
    rectennas are constrained to at most sat_power - margin.
    """

    saturated: tuple[int, ...]
    unsaturated: tuple[int, ...]
    margin: float

    def __post_init__(self):
        object.__setattr__(self, "saturated", tuple(self.saturated))
        object.__setattr__(self, "unsaturated", tuple(self.unsaturated))
        overlap = set(self.saturated) & set(self.unsaturated)
        if overlap:
            raise ValueError(f"indices in both lists: {sorted(overlap)}")
        if self.margin < 0.0:
            raise ValueError("margin must be non-negative")


def prefix_pattern(order, k: int, sat_power: float,
                   margin_frac: float = 1e-9) -> SaturationPattern:
    """Pattern saturating the first k indices of a (sorted) rectenna order."""
    order = [int(i) for i in order]
    return SaturationPattern(tuple(order[:k]), tuple(order[k:]),
                             margin_frac * sat_power)


@dataclass
class FeasibilityResult:
    feasible: bool
    matrix: np.ndarray | None
    slack: float  # normalized minimum saturation slack (>= 0 iff feasible)


def _coerce_rows(channels) -> np.ndarray:
    rows = getattr(channels, "rows", channels)
    rows = np.asarray(rows, dtype=complex)
    if rows.ndim == 1:
        rows = rows[None, :]
    return rows


def _normalize(rows, pattern: SaturationPattern, nu: float, sat_power: float):
    """Unit-row outer products and normalized thresholds for V = W / nu.

    In normalized units every quadratic form obeys tr(A V) <= tr(V) <= 1,
    so unsaturation bounds at or above 1 can never bind and are dropped,
    while a saturation threshold above 1 is infeasible outright (the
    Rayleigh-quotient power ceiling). This keeps all retained constraints
    O(1) for the solver.
    """
    sat_a, sat_c = [], []
    unsat_a, unsat_c = [], []
    margin_ratio = pattern.margin / sat_power
    for idx in pattern.saturated:
        g = rows[idx]
        gain = float(np.vdot(g, g).real)
        if gain == 0.0:
            return None  # a zero channel can never be saturated
        u = g / np.sqrt(gain)
        sat_a.append(np.outer(u.conj(), u))
        sat_c.append(sat_power / (gain * nu))
    for idx in pattern.unsaturated:
        g = rows[idx]
        gain = float(np.vdot(g, g).real)
        if gain == 0.0:
            continue  # zero channel is trivially below saturation
        c = sat_power / (gain * nu) * (1.0 - margin_ratio)
        if c >= 1.0:
            continue  # unreachable under the trace budget
        u = g / np.sqrt(gain)
        unsat_a.append(np.outer(u.conj(), u))
        unsat_c.append(c)
    return sat_a, sat_c, unsat_a, unsat_c


# ---------------------------------------------------------------------------
# Direct Clarabel backend on the real symmetric embedding.


def _offdiag_pairs(n: int):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _trace_coeffs(a: np.ndarray) -> np.ndarray:
    """tr(A V) as a linear form over the packed Hermitian variable."""
    n = a.shape[0]
    coeffs = np.empty(n * n)
    coeffs[:n] = np.real(np.diag(a))
    for t, (i, j) in enumerate(_offdiag_pairs(n)):
        coeffs[n + 2 * t] = 2.0 * a[i, j].real
        coeffs[n + 2 * t + 1] = 2.0 * a[i, j].imag
    return coeffs


def _psd_embedding_rows(n: int):
    """COO triplets mapping the packed variable to svec(M), M = [[X,-Y],[Y,X]]."""
    pairs = _offdiag_pairs(n)
    col_of_re = {p: n + 2 * t for t, p in enumerate(pairs)}
    col_of_im = {p: n + 2 * t + 1 for t, p in enumerate(pairs)}
    sq2 = np.sqrt(2.0)
    rows_idx, cols_idx, vals = [], [], []
    r = 0
    for b in range(2 * n):
        for a in range(b + 1):
            scale = 1.0 if a == b else sq2
            if b < n:  # X block
                i, j = a, b
                col = i if i == j else col_of_re[(i, j)]
                rows_idx.append(r), cols_idx.append(col), vals.append(scale)
            elif a < n:  # -Y block entry M[a, b] = -Y[a, b-n]
                i, j = a, b - n
                if i < j:
                    rows_idx.append(r), cols_idx.append(col_of_im[(i, j)])
                    vals.append(-scale)
                elif i > j:
                    rows_idx.append(r), cols_idx.append(col_of_im[(j, i)])
                    vals.append(scale)
                # i == j: Y diagonal is zero, no entry
            else:  # X block again
                i, j = a - n, b - n
                col = i if i == j else col_of_re[(i, j)]
                rows_idx.append(r), cols_idx.append(col), vals.append(scale)
            r += 1
    return rows_idx, cols_idx, vals, r


_embedding_cache: dict[int, tuple] = {}


def _embedding(n: int):
    cached = _embedding_cache.get(n)
    if cached is None:
        cached = _psd_embedding_rows(n)
        _embedding_cache[n] = cached
    return cached


# Tolerance ladder: retry with progressively looser targets when the
# interior point stalls short of the strict ones.
_TOL_LADDER = (1e-11, 1e-9, 1e-7)


def _settings(tol: float) -> "clarabel.DefaultSettings":
    s = clarabel.DefaultSettings()
    s.verbose = False
    s.tol_gap_abs = tol
    s.tol_gap_rel = tol
    s.tol_feas = tol
    return s


def _unpack(x: np.ndarray, n: int) -> np.ndarray:
    v = np.zeros((n, n), dtype=complex)
    v[np.diag_indices(n)] = x[:n]
    for t, (i, j) in enumerate(_offdiag_pairs(n)):
        v[i, j] = x[n + 2 * t] + 1j * x[n + 2 * t + 1]
        v[j, i] = v[i, j].conjugate()
    return v


def _solve_cone(n: int, objective: np.ndarray, lin_rows: list[np.ndarray],
                lin_rhs: list[float], extra_var: bool):
    """min objective'z over PSD(V), lin_rows z <= lin_rhs; z = [packed V (, t)]."""
    nvar = n * n + (1 if extra_var else 0)
    prows, pcols, pvals, psd_dim = _embedding(n)

    a_blocks = []
    if lin_rows:
        a_blocks.append(sparse.csc_matrix(np.vstack(lin_rows)))
    psd = sparse.coo_matrix(
        (np.negative(pvals), (prows, pcols)), shape=(psd_dim, n * n)
    ).tocsc()
    if extra_var:
        psd = sparse.hstack([psd, sparse.csc_matrix((psd_dim, 1))]).tocsc()
    a_blocks.append(psd)
    a_mat = sparse.vstack(a_blocks).tocsc()
    b_vec = np.concatenate([np.asarray(lin_rhs, dtype=float), np.zeros(psd_dim)])

    cones = []
    if lin_rows:
        cones.append(clarabel.NonnegativeConeT(len(lin_rhs)))
    cones.append(clarabel.PSDTriangleConeT(2 * n))

    p_mat = sparse.csc_matrix((nvar, nvar))
    status = "unattempted"
    for tol in _TOL_LADDER:
        solver = clarabel.DefaultSolver(p_mat, objective, a_mat, b_vec, cones,
                                        _settings(tol))
        sol = solver.solve()
        status = str(sol.status)
        if status in _OK_STATUSES:
            return np.asarray(sol.x)
    raise ConvexSolverError(f"solver returned status {status}")


def solve_feasibility(channels, pattern: SaturationPattern, nu: float,
                      sat_power: float) -> FeasibilityResult:
    """Max-min-slack saturation feasibility at transmit power budget nu.

    Feasible iff some PSD W with trace <= nu meets the pattern, in which
    case the returned matrix maximizes the smallest saturation slack.
    """
    if nu <= 0.0:
        raise ValueError("nu must be positive")
    rows = _coerce_rows(channels)
    n = rows.shape[1]
    norm = _normalize(rows, pattern, nu, sat_power)
    if norm is None:
        return FeasibilityResult(False, None, -np.inf)
    sat_a, sat_c, unsat_a, unsat_c = norm
    if not sat_a:
        return FeasibilityResult(True, np.zeros((n, n), dtype=complex), np.inf)
    if max(sat_c) > 1.0:
        # Even the whole trace budget on this rectenna cannot reach the
        # saturation power.
        return FeasibilityResult(False, None, 1.0 - max(sat_c))

    trace_row = np.zeros(n * n + 1)
    trace_row[:n] = 1.0
    lin_rows = [trace_row]
    lin_rhs = [1.0]
    for a, c in zip(sat_a, sat_c):  # tr(A V) - t >= c  ->  -tr + t <= -c
        row = np.append(-_trace_coeffs(a), 1.0)
        lin_rows.append(row)
        lin_rhs.append(-c)
    for a, c in zip(unsat_a, unsat_c):
        lin_rows.append(np.append(_trace_coeffs(a), 0.0))
        lin_rhs.append(c)

    objective = np.zeros(n * n + 1)
    objective[-1] = -1.0  # maximize t
    x = _solve_cone(n, objective, lin_rows, lin_rhs, extra_var=True)
    slack = float(x[-1])
    feasible = slack >= -_FEAS_TOL * max(1.0, max(sat_c))
    if not feasible:
        return FeasibilityResult(False, None, slack)
    return FeasibilityResult(True, nu * _unpack(x[:-1], n), slack)


def solve_linearized_step(channels, pattern: SaturationPattern, nu: float,
                          gradient: np.ndarray, sat_power: float) -> np.ndarray:
    """Maximize Tr{gradient W} over the pattern's feasible region.

    The pattern must be feasible at nu (establish with solve_feasibility);
    an infeasible pattern surfaces as a solver error here.
    """
    if nu <= 0.0:
        raise ValueError("nu must be positive")
    rows = _coerce_rows(channels)
    n = rows.shape[1]
    norm = _normalize(rows, pattern, nu, sat_power)
    if norm is None:
        raise ConvexSolverError("pattern saturates a zero channel")
    sat_a, sat_c, unsat_a, unsat_c = norm
    if sat_c and max(sat_c) > 1.0:
        raise ConvexSolverError("pattern is infeasible at this power budget")

    trace_row = np.zeros(n * n)
    trace_row[:n] = 1.0
    lin_rows = [trace_row]
    lin_rhs = [1.0]
    for a, c in zip(sat_a, sat_c):
        lin_rows.append(-_trace_coeffs(a))
        lin_rhs.append(-c)
    for a, c in zip(unsat_a, unsat_c):
        lin_rows.append(_trace_coeffs(a))
        lin_rhs.append(c)

    grad = np.asarray(gradient, dtype=complex)
    grad = 0.5 * (grad + grad.conj().T)
    scale = float(np.abs(grad).max())
    objective = -_trace_coeffs(grad / scale if scale > 0.0 else grad)
    x = _solve_cone(n, objective, lin_rows, lin_rhs, extra_var=False)
    return nu * _unpack(x, n)


def extract_rank_one(W) -> tuple[np.ndarray, float]:
    """Dominant-eigenpair beam sqrt(l1) * u1 and residual 1 - l1/trace."""
    W = np.asarray(W, dtype=complex)
    W = 0.5 * (W + W.conj().T)
    trace = float(np.trace(W).real)
    if trace <= 0.0:
        return np.zeros(W.shape[0], dtype=complex), 0.0
    vals, vecs = np.linalg.eigh(W)
    lead = max(float(vals[-1]), 0.0)
    residual = min(max(1.0 - lead / trace, 0.0), 1.0)
    return np.sqrt(lead) * vecs[:, -1], residual


def check_constraints(W, channels, pattern: SaturationPattern, nu: float,
                      sat_power: float, tol: float = 1e-6) -> dict:
    """Audit a solve result against PSD, trace and pattern constraints.

    Violations are reported relative to the natural scale of each
    constraint; ``ok`` requires all of them below ``tol``.
    """
    rows = _coerce_rows(channels)
    W = np.asarray(W, dtype=complex)
    herm = float(np.abs(W - W.conj().T).max()) / max(float(np.abs(W).max()), 1e-300)
    eigs = np.linalg.eigvalsh(0.5 * (W + W.conj().T))
    trace = float(np.trace(W).real)
    psd = max(0.0, -float(eigs[0])) / max(trace, 1e-300)
    trace_excess = max(0.0, trace - nu) / nu
    sat_viol = 0.0
    for idx in pattern.saturated:
        power = float(np.real(rows[idx] @ W @ rows[idx].conj()))
        sat_viol = max(sat_viol, (sat_power - power) / sat_power)
    unsat_viol = 0.0
    for idx in pattern.unsaturated:
        power = float(np.real(rows[idx] @ W @ rows[idx].conj()))
        unsat_viol = max(unsat_viol, (power - sat_power) / sat_power)
    report = {
        "hermitian": herm,
        "psd": psd,
        "trace": trace_excess,
        "saturated": sat_viol,
        "unsaturated": unsat_viol,
    }
    report["ok"] = all(v <= tol for k, v in report.items() if k != "ok")
    return report


def dump_solve_trace(path, pattern: SaturationPattern, nu: float,
                     iterates) -> None:
    """Write (pattern, nu, matrix iterates) as structured text."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# convex-engine trace v1\n")
        fh.write(f"# nu={nu:.17g}\n")
        fh.write(f"# saturated={','.join(map(str, pattern.saturated))}\n")
        fh.write(f"# unsaturated={','.join(map(str, pattern.unsaturated))}\n")
        fh.write(f"# margin={pattern.margin:.17g}\n")
        for step, w in enumerate(iterates):
            w = np.asarray(w, dtype=complex)
            fh.write(f"# iterate={step} shape={w.shape[0]}\n")
            for row in w:
                fh.write(" ".join(f"{e.real:.17g} {e.imag:.17g}" for e in row))
                fh.write("\n")
