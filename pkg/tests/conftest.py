import numpy as np
import pytest

from wptopt.channel import ChannelSet, NodeConfig, SystemConfig
from wptopt.eh_model import DEFAULT_RECTENNA, HarvestCurve


@pytest.fixture(scope="session")
def curve():
    return HarvestCurve(DEFAULT_RECTENNA)


def make_channel_set(rows, node_sizes=None, weights=None, seed=0):
    """Wrap raw channel rows in a ChannelSet for solver-level tests."""
    rows = np.asarray(rows, dtype=complex)
    if rows.ndim == 1:
        rows = rows[None, :]
    k, n_t = rows.shape
    if node_sizes is None:
        node_sizes = [k]
    if weights is None:
        weights = [1.0 / len(node_sizes)] * len(node_sizes)
    nodes = tuple(NodeConfig(n_e, 10.0, w) for n_e, w in zip(node_sizes, weights))
    config = SystemConfig(n_t=n_t, nodes=nodes, seed=seed)
    node_of_row = np.repeat(np.arange(len(node_sizes)), node_sizes)
    return ChannelSet(rows, node_of_row, np.asarray(weights, float), config)


def random_rows(rng, k, n_t, scale=1e-3):
    return (rng.standard_normal((k, n_t))
            + 1j * rng.standard_normal((k, n_t))) * scale
