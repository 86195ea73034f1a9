"""Linear-time simulation of directed preferential attachment growth.

Every existing-node draw uses the two-branch trick: a single uniform on
``[0, t + N(t) * delta]`` either indexes an endpoint of an existing edge
(degree-proportional part) or a node id directly (uniform part), so each
draw is O(1) and no weight table is ever rebuilt.

Random numbers come from numpy's PCG64 in fixed-size chunks; the numba
kernel only consumes them. Replication ``k`` uses
``SeedSequence(seed, spawn_key=(k,))`` so replicate streams do not depend
on execution order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .model import GrowthHistory, Params, Snapshot

RNG_ALGORITHM = "numpy.PCG64"
_CHUNK = 1 << 18
_TINY = 5e-324


@dataclass(frozen=True)
class SimConfig:
    params: Params
    target_edges: int
    seed_graph: Snapshot = field(default_factory=lambda: Snapshot.empty(1))
    rng_seed: int = 0

    def __post_init__(self):
        if self.seed_graph.node_count < 1:
            raise ValueError("the seed graph needs at least one node")
        if self.target_edges <= self.seed_graph.n_edges:
            raise ValueError("target_edges must exceed the seed graph's edge count")


@numba.njit(cache=True)
def _draw(endpoints, t, n_nodes, delta, u):
    w = u * (t + n_nodes * delta)
    if w <= 0.0:
        w = _TINY
    if w <= t:
        k = int(np.ceil(w))
        if k > t:
            k = t
        return endpoints[k - 1]
    v = int(np.ceil((w - t) / delta))
    if v < 1:
        v = 1
    elif v > n_nodes:
        v = n_nodes
    return v


@numba.njit(cache=True)
def _draw_many(endpoints, t, n_nodes, delta, us):
    out = np.empty(us.shape[0], dtype=np.int64)
    for i in range(us.shape[0]):
        out[i] = _draw(endpoints, t, n_nodes, delta, us[i])
    return out


@numba.njit(cache=True)
def _grow(src, dst, sc, t, stop, n_nodes, cuts, d_in, d_out, us):
    # us has 3 columns per step: scenario, source draw, destination draw
    j = 0
    while t < stop:
        u = us[j, 0]
        if u < cuts[0]:
            s = 1
            src[t] = n_nodes + 1
            dst[t] = _draw(dst, t, n_nodes, d_in, us[j, 2])
            n_nodes += 1
        elif u < cuts[1]:
            s = 2
            src[t] = _draw(src, t, n_nodes, d_out, us[j, 1])
            dst[t] = _draw(dst, t, n_nodes, d_in, us[j, 2])
        elif u < cuts[2]:
            s = 3
            src[t] = _draw(src, t, n_nodes, d_out, us[j, 1])
            dst[t] = n_nodes + 1
            n_nodes += 1
        elif u < cuts[3]:
            s = 4
            src[t] = n_nodes + 1
            dst[t] = n_nodes + 2
            n_nodes += 2
        else:
            s = 5
            src[t] = n_nodes + 1
            dst[t] = n_nodes + 1
            n_nodes += 1
        sc[t] = s
        t += 1
        j += 1
    return n_nodes


def _cuts(p: Params) -> np.ndarray:
    c = np.cumsum([p.alpha, p.beta, p.gamma, p.xi]).astype(np.float64)
    # rounding in the cumulative sum must not let a zero-probability
    # trailing scenario fire: the last positive one absorbs the remainder
    last = max(i for i, v in enumerate(p.probs) if v > 0)
    c[last:] = np.inf
    return c


def simulate(cfg: SimConfig, rng: Optional[np.random.Generator] = None) -> GrowthHistory:
    """Grow ``cfg.seed_graph`` to ``cfg.target_edges`` edges.

    Deterministic given ``cfg.rng_seed`` unless an explicit generator is
    passed.
    """
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(cfg.rng_seed))
    p = cfg.params
    seed = cfg.seed_graph
    n = cfg.target_edges
    n0 = seed.n_edges
    src = np.empty(n, dtype=np.int64)
    dst = np.empty(n, dtype=np.int64)
    sc = np.zeros(n, dtype=np.int8)
    src[:n0] = seed.src
    dst[:n0] = seed.dst
    cuts = _cuts(p)
    n_nodes = seed.node_count
    t = n0
    while t < n:
        stop = min(n, t + _CHUNK)
        us = rng.random((stop - t, 3))
        n_nodes = _grow(src, dst, sc, t, stop, n_nodes, cuts,
                        float(p.delta_in), float(p.delta_out), us)
        t = stop
    return GrowthHistory(seed, src[n0:], dst[n0:], sc[n0:],
                         timestamps=np.arange(n0 + 1, n + 1, dtype=np.int64))


def node_sample(endpoints: np.ndarray, t: int, node_count: int, delta: float,
                rng: np.random.Generator, size: Optional[int] = None):
    """Draw existing node(s) with probability ``(D(w) + delta) / (t + N delta)``.

    ``endpoints[k]`` is the relevant endpoint (source for out-degree
    sampling, destination for in-degree sampling) of edge ``k + 1``; only
    the first ``t`` entries are used.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    endpoints = np.ascontiguousarray(endpoints, dtype=np.int64)
    if len(endpoints) < t:
        raise ValueError("fewer endpoints than edges")
    if size is None:
        return int(_draw(endpoints, t, node_count, float(delta), rng.random()))
    return _draw_many(endpoints, t, node_count, float(delta), rng.random(size))


def replicate_seed(seed: int, k: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(k,))


def replicate_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(replicate_seed(seed, k)))


def simulate_replicate(cfg: SimConfig, k: int) -> GrowthHistory:
    return simulate(cfg, rng=replicate_rng(cfg.rng_seed, k))


def replicate(cfg: SimConfig, reps: int, workers: int = 1) -> list:
    """``reps`` independent histories; rep ``k`` depends only on ``(rng_seed, k)``."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if workers <= 1:
        return [simulate_replicate(cfg, k) for k in range(reps)]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(workers) as ex:
        return list(ex.map(lambda k: simulate_replicate(cfg, k), range(reps)))


def inject_broadcast(h: GrowthHistory, position: int, length: int,
                     rng: np.random.Generator, source: Optional[int] = None) -> GrowthHistory:
    """Insert a burst of ``length`` consecutive edges after history step ``position``.

    One existing node (uniform, unless ``source`` is given) sends to
    ``length`` distinct existing nodes drawn uniformly, the way a broadcast
    account would. The rest of the history is kept unchanged, so node ids
    remain in creation order.
    """
    if h.scenarios is None:
        raise ValueError("history needs scenario labels")
    n_nodes = int(h.node_counts()[position])
    if length > n_nodes:
        raise ValueError("burst longer than the number of existing nodes")
    if source is None:
        source = int(rng.integers(1, n_nodes + 1))
    targets = rng.choice(n_nodes, size=length, replace=False) + 1
    src = np.concatenate([h.src[:position], np.full(length, source), h.src[position:]])
    dst = np.concatenate([h.dst[:position], targets, h.dst[position:]])
    sc = np.concatenate([h.scenarios[:position], np.full(length, 2, dtype=np.int8),
                         h.scenarios[position:]])
    ts = np.arange(h.n0 + 1, h.n0 + len(src) + 1, dtype=np.int64)
    return GrowthHistory(h.seed, src, dst, sc, ts)
