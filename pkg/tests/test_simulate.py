import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from prefattach.model import NEW_NODES_BY_TAG, Params, Snapshot
from prefattach.simulate import (SimConfig, inject_broadcast, node_sample, replicate,
                                 replicate_rng, simulate, simulate_replicate)
from reference import selection_probs


def test_same_seed_same_history(theta):
    cfg = SimConfig(theta, 5000, rng_seed=7)
    assert simulate(cfg) == simulate(cfg)
    assert simulate(cfg) != simulate(SimConfig(theta, 5000, rng_seed=8))


def test_replicates_do_not_depend_on_order(theta):
    cfg = SimConfig(theta, 2000, rng_seed=3)
    reps = replicate(cfg, 4)
    assert reps[2] == simulate_replicate(cfg, 2)
    assert replicate(cfg, 4, workers=2) == reps


def test_history_structure(theta):
    h = simulate(SimConfig(theta, 3000, rng_seed=1))
    assert h.n == 3000 and h.n_steps == 3000
    nc = h.node_counts()
    # new nodes always receive the next free id
    for k in range(h.n_steps):
        j = h.scenarios[k]
        if j == 1:
            assert h.src[k] == nc[k] + 1 and h.dst[k] <= nc[k]
        elif j == 2:
            assert h.src[k] <= nc[k] and h.dst[k] <= nc[k]
        elif j == 3:
            assert h.dst[k] == nc[k] + 1 and h.src[k] <= nc[k]
    assert h.timestamps.tolist() == list(range(1, 3001))


def test_seed_graph_is_kept():
    seed = Snapshot(3, np.array([1, 2, 3]), np.array([2, 3, 1]))
    p = Params.extended(0.2, 0.5, 0.2, 0.05, 1.0, 1.0)
    h = simulate(SimConfig(p, 500, seed, rng_seed=2))
    assert h.seed == seed
    assert h.node_counts()[0] == 3
    nc = h.node_counts()
    four = np.flatnonzero(h.scenarios == 4)
    assert np.all(h.src[four] == nc[four] + 1) and np.all(h.dst[four] == nc[four] + 2)
    five = np.flatnonzero(h.scenarios == 5)
    assert np.all(h.src[five] == h.dst[five]) and np.all(h.src[five] == nc[five] + 1)


def test_scenario_frequencies_match_probabilities():
    p = Params.extended(0.2, 0.4, 0.25, 0.1, 1.0, 1.0)
    h = simulate(SimConfig(p, 100_000, rng_seed=4))
    counts = np.bincount(h.scenarios, minlength=6)[1:]
    _, pval = stats.chisquare(counts, np.array(p.probs) * h.n_steps)
    assert pval > 1e-3


@given(st.sampled_from([(0.0, 0.6, 0.4), (0.5, 0.5, 0.0), (0.5, 0.0, 0.5)]),
       st.integers(0, 1000))
def test_zero_probability_scenarios_never_fire(abg, seed):
    p = Params(*abg, 1.0, 1.0)
    h = simulate(SimConfig(p, 300, Snapshot(1, [1], [1]), rng_seed=seed))
    for j, q in zip(range(1, 6), p.probs):
        if q == 0:
            assert not np.any(h.scenarios == j)


def test_node_count_trajectory_matches_labels(theta):
    h = simulate(SimConfig(theta, 2000, rng_seed=9))
    final = h.final_snapshot()
    assert final.node_count == 1 + NEW_NODES_BY_TAG[h.scenarios].sum()
    assert final.in_degrees().sum() == 2000


def test_node_sample_matches_exact_law():
    rng = np.random.default_rng(0)
    p = Params.basic(0.4, 0.4, 0.7, 1.3)
    h = simulate(SimConfig(p, 60, rng_seed=5))
    g = h.final_snapshot()
    t, n_nodes = g.n_edges, g.node_count
    for endpoints, delta in ((g.dst, p.delta_in), (g.src, p.delta_out)):
        draws = node_sample(endpoints, t, n_nodes, delta, rng, size=100_000)
        obs = np.bincount(draws - 1, minlength=n_nodes)
        exp = np.array(selection_probs(endpoints.tolist(), t, n_nodes, delta)) * 100_000
        assert stats.chisquare(obs, exp).pvalue > 1e-3


def test_node_sample_single_draw_in_range():
    rng = replicate_rng(0, 0)
    v = node_sample(np.array([1, 1, 2]), 3, 2, 0.5, rng)
    assert v in (1, 2)
    with pytest.raises(ValueError):
        node_sample(np.array([1]), 3, 2, 0.5, rng)
    with pytest.raises(ValueError):
        node_sample(np.array([1]), 1, 2, 0.0, rng)


def test_simconfig_validation(theta):
    with pytest.raises(ValueError):
        SimConfig(theta, 0)
    with pytest.raises(ValueError):
        SimConfig(theta, 10, Snapshot.empty(0))


def test_inject_broadcast(theta):
    h = simulate(SimConfig(theta, 5000, rng_seed=2))
    b = inject_broadcast(h, 3000, 200, np.random.default_rng(1), source=5)
    assert b.n_steps == 5200
    assert np.all(b.src[3000:3200] == 5)
    assert len(np.unique(b.dst[3000:3200])) == 200
    assert np.all(b.scenarios[3000:3200] == 2)
    assert np.array_equal(b.src[3200:], h.src[3000:])
    assert b.node_count == h.node_count
