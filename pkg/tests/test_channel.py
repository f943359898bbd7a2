import numpy as np
import pytest

from wptopt.channel import (
    NodeConfig,
    SystemConfig,
    draw_channels,
    load_channels,
    path_loss_db,
    path_loss_linear,
    save_channels,
)


def two_node_config(seed=11, kappa=1.0):
    return SystemConfig(
        n_t=3,
        nodes=(NodeConfig(2, 10.0, 0.6), NodeConfig(1, 25.0, 0.4)),
        rician_factor=kappa,
        seed=seed,
    )


def test_path_loss_reference_points():
    assert path_loss_db(1.0) == pytest.approx(35.3)
    assert path_loss_db(10.0) == pytest.approx(72.9)
    assert path_loss_db(100.0) == pytest.approx(110.5)


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss_db(0.0)
    with pytest.raises(ValueError):
        path_loss_db(-3.0)


def test_distance_doubling_scales_mean_power_by_closed_form():
    ratio = path_loss_linear(20.0) / path_loss_linear(10.0)
    assert ratio == pytest.approx(10.0 ** (-37.6 * np.log10(2.0) / 10.0), rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        SystemConfig(n_t=0, nodes=(NodeConfig(1, 10.0, 1.0),))
    with pytest.raises(ValueError):
        SystemConfig(n_t=1, nodes=(NodeConfig(0, 10.0, 1.0),))
    with pytest.raises(ValueError):
        SystemConfig(n_t=1, nodes=(NodeConfig(1, -1.0, 1.0),))
    with pytest.raises(ValueError):
        SystemConfig(n_t=1, nodes=(NodeConfig(1, 10.0, 0.5),
                                   NodeConfig(1, 10.0, 0.6)))


def test_draws_are_deterministic_per_seed_and_realization():
    cfg = two_node_config()
    a = draw_channels(cfg, 3)
    b = draw_channels(cfg, 3)
    c = draw_channels(cfg, 4)
    assert np.array_equal(a.rows, b.rows)
    assert not np.array_equal(a.rows, c.rows)
    other = draw_channels(two_node_config(seed=12), 3)
    assert not np.array_equal(a.rows, other.rows)


def test_row_layout_and_weights():
    cs = draw_channels(two_node_config(), 0)
    assert cs.rows.shape == (3, 3)
    assert list(cs.node_of_row) == [0, 0, 1]
    assert np.allclose(cs.row_weights, [0.6, 0.6, 0.4])
    assert cs.node_rows(0).shape == (2, 3)


def test_large_rician_factor_collapses_to_los_magnitude():
    cfg = SystemConfig(n_t=2, nodes=(NodeConfig(1, 10.0, 1.0),),
                       rician_factor=1e12, seed=5)
    cs = draw_channels(cfg, 0)
    want = np.sqrt(path_loss_linear(10.0))
    assert np.all(np.abs(np.abs(cs.rows) - want) <= 1e-5 * want)


def test_mean_power_matches_path_loss_monte_carlo():
    # second moment of each entry is exactly L_m by construction
    cfg = SystemConfig(n_t=1, nodes=(NodeConfig(1, 10.0, 1.0),), seed=77)
    n_draws = 100_000
    acc = 0.0
    for r in range(n_draws):
        acc += float(np.abs(draw_channels(cfg, r).rows[0, 0]) ** 2)
    mean = acc / n_draws
    want = path_loss_linear(10.0)
    assert abs(mean - want) <= 0.02 * want


def test_weight_override_keeps_rows():
    cs = draw_channels(two_node_config(), 0)
    swapped = cs.with_weights((0.4, 0.6))
    assert np.array_equal(swapped.rows, cs.rows)
    assert np.allclose(swapped.weights, [0.4, 0.6])
    with pytest.raises(ValueError):
        cs.with_weights((0.4, 0.7))


def test_save_load_round_trip(tmp_path):
    cs = draw_channels(two_node_config(), 2)
    path = tmp_path / "channels.txt"
    save_channels(cs, path)
    back = load_channels(path)
    assert np.array_equal(back.rows, cs.rows)
    assert back.realization == 2
    assert back.config == cs.config
