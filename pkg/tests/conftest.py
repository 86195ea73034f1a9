import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from prefattach.model import Params, Snapshot  # noqa: E402
from prefattach.simulate import SimConfig, simulate  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

THETA = Params.basic(0.3, 0.5, 2.0, 1.0)


@pytest.fixture(scope="session")
def theta():
    return THETA


@pytest.fixture(scope="session")
def history_1e4():
    return simulate(SimConfig(THETA, 10_000, Snapshot.empty(1), rng_seed=11))


def history_edges(h):
    """``(seed_nodes, seed_edges, [(src, dst, scenario), ...])`` as plain Python."""
    seed_edges = list(zip(h.seed.src.tolist(), h.seed.dst.tolist()))
    edges = list(zip(h.src.tolist(), h.dst.tolist(), h.scenarios.tolist()))
    return h.seed.node_count, seed_edges, edges


def small_history(p, n, seed, seed_graph=None):
    return simulate(SimConfig(p, n, seed_graph or Snapshot.empty(1), rng_seed=seed))


def random_params(rng, extended=False):
    if extended:
        w = rng.dirichlet(np.ones(5) * 2)
        return Params.extended(*w[:4], rng.uniform(0.2, 4), rng.uniform(0.2, 4))
    w = rng.dirichlet(np.ones(3) * 2)
    return Params.basic(w[0], w[1], rng.uniform(0.2, 4), rng.uniform(0.2, 4))
