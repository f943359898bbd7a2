import numpy as np
import pytest

from wptopt.two_point import (
    GridSpec,
    PowerCurve,
    TwoPointDistribution,
    check_tangent_condition,
    grid_search,
    law_objective,
    slope,
    two_point_upper_bound,
)

from oracles import best_pair_law


def clamped_convex_curve(step=0.01, n=400, sat_at=2.0, scale=1.0):
    """Convex (quadratic) rise clamped flat at sat_at."""
    grid = step * np.arange(n + 1)
    vals = scale * np.minimum(grid, sat_at) ** 2
    return PowerCurve(grid, vals)


def concave_curve(step=0.01, n=400, scale=1.0):
    grid = step * np.arange(n + 1)
    return PowerCurve(grid, scale * np.sqrt(grid))


def random_monotone_curve(rng, n=240, step=0.05, flat_tail=True):
    incs = rng.uniform(0.0, 1.0, n + 1) * (rng.random(n + 1) > 0.3)
    incs[0] = 0.0
    vals = np.cumsum(incs)
    if flat_tail:
        cut = int(0.8 * n)
        vals[cut:] = vals[cut]
    return PowerCurve(step * np.arange(n + 1), vals)


# --- grid / curve containers ---------------------------------------------


def test_grid_spec_validation_and_covering():
    with pytest.raises(ValueError):
        GridSpec(step=0.0)
    spec = GridSpec.covering(50.0)
    assert spec.step == 0.1 and spec.n_steps == 1000
    wide = GridSpec.covering(500.0)
    assert wide.top >= 500.0 * 1.01
    narrow = GridSpec.covering(1e-4)
    assert narrow.top >= 1e-4 and narrow.step < 1e-5


def test_power_curve_validation():
    with pytest.raises(ValueError):
        PowerCurve(np.array([0.0, 1.0, 1.5]), np.array([0.0, 1.0, 2.0]))
    with pytest.raises(ValueError):
        PowerCurve(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.5]))
    with pytest.raises(ValueError):
        PowerCurve(np.array([0.0, -1.0, -2.0]), np.array([0.0, 1.0, 2.0]))


def test_power_curve_text_round_trip(tmp_path):
    pc = clamped_convex_curve()
    path = tmp_path / "curve.txt"
    pc.save_text(path)
    back = PowerCurve.load_text(path)
    assert np.array_equal(back.grid, pc.grid)
    assert np.array_equal(back.values, pc.values)


def test_two_point_distribution_invariants():
    law = TwoPointDistribution(1.0, 3.0, 0.25, 0.75)
    assert law.mean == pytest.approx(2.5)
    with pytest.raises(ValueError):
        TwoPointDistribution(3.0, 1.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        TwoPointDistribution(1.0, 3.0, 0.6, 0.6)
    with pytest.raises(ValueError):
        TwoPointDistribution(2.0, 2.0, 0.5, 0.5)
    single = TwoPointDistribution.single(2.0)
    assert single.is_degenerate and single.mean == 2.0


# --- slope -----------------------------------------------------------------


def test_slope_affine_constant():
    grid = 0.1 * np.arange(51)
    pc = PowerCurve(grid, 3.0 * grid)
    assert slope(0.4, 2.2, pc) == pytest.approx(3.0)
    assert slope(1.0, 4.9, pc) == pytest.approx(3.0)


def test_slope_rise_over_run():
    pc = PowerCurve(np.array([0.0, 2.0]), np.array([0.0, 4.0]))
    assert slope(0.0, 2.0, pc) == pytest.approx(2.0)


def test_slope_flat_in_saturation():
    pc = clamped_convex_curve()
    assert slope(2.5, 3.5, pc) == 0.0


def test_slope_rejects_reversed_points():
    pc = clamped_convex_curve()
    with pytest.raises(ValueError):
        slope(2.0, 2.0, pc)


# --- tangent condition ------------------------------------------------------


def test_tangent_condition_concave_true():
    assert check_tangent_condition(concave_curve(), 1.7)


def test_tangent_condition_convex_false():
    assert not check_tangent_condition(clamped_convex_curve(), 1.0)


def test_tangent_condition_affine_true():
    grid = 0.01 * np.arange(401)
    pc = PowerCurve(grid, 2.0 * grid)
    assert check_tangent_condition(pc, 1.9)


def test_tangent_condition_needs_interior_budget():
    with pytest.raises(ValueError):
        check_tangent_condition(clamped_convex_curve(), 4.0)


# --- grid search -------------------------------------------------------------


def test_grid_search_on_off_for_convex_clamped():
    pc = clamped_convex_curve()
    budget = 0.5
    law = grid_search(pc, budget)
    assert law.nu_1 == 0.0
    assert law.nu_2 == pytest.approx(2.0, abs=pc.step)
    assert law.weight_2 == pytest.approx(budget / law.nu_2, abs=1e-12)
    assert law.mean == pytest.approx(budget, abs=1e-12)


def test_grid_search_single_point_for_concave():
    law = grid_search(concave_curve(), 1.23)
    assert law.is_degenerate
    assert law.nu_1 == pytest.approx(1.23)


def test_grid_search_three_segment_curve_matches_oracle():
    # two clamped convex pieces with a shallow second stage, so the first
    # threshold stays worth visiting before the second
    step, n = 0.01, 600
    grid = step * np.arange(n + 1)
    rho_a, rho_b = 1.5, 4.5
    piece1 = np.minimum(grid, rho_a) ** 2
    piece2 = 0.1 * np.maximum(np.minimum(grid, rho_b) - rho_a, 0.0) ** 2
    pc = PowerCurve(grid, piece1 + piece2)
    budget = 2.5
    law = grid_search(pc, budget)
    want_val, want_n1, want_n2, tie = best_pair_law(grid, pc.values, budget)
    assert not tie
    assert law.nu_1 == pytest.approx(want_n1)
    assert law.nu_2 == pytest.approx(want_n2)
    assert law_objective(pc, law) == pytest.approx(want_val, rel=1e-12)
    assert law.nu_1 == pytest.approx(rho_a, abs=step)
    assert law.nu_2 == pytest.approx(rho_b, abs=step)


def test_grid_search_rejects_out_of_range_budget():
    pc = clamped_convex_curve()
    with pytest.raises(ValueError):
        grid_search(pc, pc.grid[-1] * 1.5)
    with pytest.raises(ValueError):
        grid_search(pc, 0.0)


def test_grid_search_economy_point_when_saturation_affordable():
    pc = clamped_convex_curve()
    law = grid_search(pc, 3.5)
    assert law.is_degenerate
    assert law.nu_1 == pytest.approx(2.0, abs=pc.step)
    assert law.nu_1 <= 3.5


def test_grid_search_matches_pair_oracle_on_random_curves():
    rng = np.random.default_rng(42)
    for trial in range(30):
        pc = random_monotone_curve(rng)
        budget = float(rng.uniform(pc.grid[3], pc.grid[-4]))
        law = grid_search(pc, budget)
        got = law_objective(pc, law)
        want, n1, n2, tie = best_pair_law(pc.grid, pc.values, budget)
        assert got == pytest.approx(want, rel=1e-9), trial
        if not tie and not law.is_degenerate:
            assert law.nu_1 == pytest.approx(n1)
            assert law.nu_2 == pytest.approx(n2)


# --- upper bound -------------------------------------------------------------


def test_upper_bound_tight_for_affine():
    grid = 0.01 * np.arange(401)
    pc = PowerCurve(grid, 2.0 * grid)
    assert two_point_upper_bound(pc, 1.7) == pytest.approx(2.0 * 1.7, rel=1e-9)


def test_upper_bound_chord_for_convex_clamped():
    pc = clamped_convex_curve()
    sat_val = pc.values[-1]
    assert two_point_upper_bound(pc, 1.0) == pytest.approx(0.5 * sat_val, rel=1e-6)


def test_upper_bound_dominates_random_distributions():
    rng = np.random.default_rng(7)
    pc = random_monotone_curve(rng)
    grid, vals = pc.grid, pc.values
    for _ in range(5):
        mean_idx = int(rng.integers(5, len(grid) - 5))
        mean = float(grid[mean_idx])
        bound = two_point_upper_bound(pc, mean)
        for _ in range(200):
            k = int(rng.integers(2, 7))
            support = rng.choice(len(grid), size=k, replace=False)
            support.sort()
            if grid[support[0]] > mean or grid[support[-1]] < mean:
                continue
            probs = rng.dirichlet(np.ones(k))
            mu = float(probs @ grid[support])
            shift = (mean - mu) / (grid[support[-1]] - grid[support[0]])
            if probs[0] - max(0.0, -shift) < 0 or probs[-1] + min(0.0, shift) < 0:
                continue
            probs[0] -= shift
            probs[-1] += shift
            if probs[0] < 0 or probs[-1] < 0:
                continue
            expect = float(probs @ vals[support])
            assert expect <= bound + 1e-9 * max(bound, 1.0)


def test_achievability_equals_bound_on_grid():
    rng = np.random.default_rng(3)
    pc = random_monotone_curve(rng)
    mean = float(pc.grid[40])
    law = grid_search(pc, mean)
    assert law.mean <= mean + pc.step
    assert law_objective(pc, law) == two_point_upper_bound(pc, mean)
