"""Parameter vectors, scenario labels and degree statistics.

Node ids are 1-based and follow creation order. All arrays held by the
containers below are treated as read-only once constructed.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

SIMPLEX_TOL = 1e-12


class ModelError(ValueError):
    """Raised for parameter vectors outside the model's domain."""


class MalformedInputError(ValueError):
    """Raised when graph data does not satisfy the container invariants."""


class Scenario(enum.IntEnum):
    ALPHA = 1  # new source -> existing destination
    BETA = 2  # existing -> existing
    GAMMA = 3  # existing source -> new destination
    BOTH_NEW = 4  # new -> new
    SELF_LOOP = 5  # new node with a self loop

    @property
    def new_nodes(self) -> int:
        return _NEW_NODES[self]


_NEW_NODES = {Scenario.ALPHA: 1, Scenario.BETA: 0, Scenario.GAMMA: 1,
              Scenario.BOTH_NEW: 2, Scenario.SELF_LOOP: 1}

# new nodes added per scenario label, indexable by the integer tag
NEW_NODES_BY_TAG = np.array([0, 1, 0, 1, 2, 1], dtype=np.int64)


@dataclass(frozen=True)
class Params:
    """Parameters of the (possibly extended) linear preferential attachment model.

    ``xi`` and ``rho`` are the probabilities of the two-new-nodes and the
    new-node-self-loop scenarios; both are zero in the basic model.
    """

    alpha: float
    beta: float
    gamma: float
    delta_in: float
    delta_out: float
    xi: float = 0.0
    rho: float = 0.0

    def __post_init__(self):
        probs = self.probs
        for name, v in zip(("alpha", "beta", "gamma", "xi", "rho"), probs):
            if not (v >= 0.0) or not math.isfinite(v):
                raise ModelError(f"{name}={v} must be a non-negative probability")
        for name, v in (("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)):
            if v >= 1.0:
                raise ModelError(f"{name}={v} must be strictly smaller than 1")
        total = sum(probs)
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ModelError(f"scenario probabilities sum to {total!r}, not 1")
        for name, v in (("delta_in", self.delta_in), ("delta_out", self.delta_out)):
            if not (v > 0.0) or not math.isfinite(v):
                raise ModelError(f"{name}={v} must be positive and finite")

    @classmethod
    def basic(cls, alpha: float, beta: float, delta_in: float, delta_out: float) -> "Params":
        """Basic model with ``gamma = 1 - alpha - beta``."""
        return cls(alpha, beta, 1.0 - alpha - beta, delta_in, delta_out)

    @classmethod
    def extended(cls, alpha, beta, gamma, xi, delta_in, delta_out) -> "Params":
        """Extended model with ``rho = 1 - alpha - beta - gamma - xi``."""
        return cls(alpha, beta, gamma, delta_in, delta_out, xi=xi,
                   rho=1.0 - alpha - beta - gamma - xi)

    @property
    def probs(self) -> tuple:
        return (self.alpha, self.beta, self.gamma, self.xi, self.rho)

    @property
    def is_basic(self) -> bool:
        return self.xi == 0.0 and self.rho == 0.0

    def mirror(self) -> "Params":
        """Swap the roles of in- and out-degrees."""
        return replace(self, alpha=self.gamma, gamma=self.alpha,
                       delta_in=self.delta_out, delta_out=self.delta_in)

    def vector(self) -> np.ndarray:
        """``(alpha, beta, delta_in, delta_out)`` for the basic model,
        ``(alpha, beta, gamma, xi, delta_in, delta_out)`` otherwise."""
        if self.is_basic:
            return np.array([self.alpha, self.beta, self.delta_in, self.delta_out])
        return np.array([self.alpha, self.beta, self.gamma, self.xi,
                         self.delta_in, self.delta_out])

    def vector_names(self) -> tuple:
        if self.is_basic:
            return BASIC_NAMES
        return EXTENDED_NAMES

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        d = dict(d)
        if "gamma" not in d:
            if d.get("xi", 0.0) or d.get("rho", 0.0):
                raise ModelError("gamma is required for the extended model")
            d["gamma"] = 1.0 - d["alpha"] - d["beta"]
        return cls(**{k: float(d[k]) for k in
                      ("alpha", "beta", "gamma", "delta_in", "delta_out")},
                   xi=float(d.get("xi", 0.0)), rho=float(d.get("rho", 0.0)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "Params":
        return cls.from_dict(json.loads(s))


BASIC_NAMES = ("alpha", "beta", "delta_in", "delta_out")
EXTENDED_NAMES = ("alpha", "beta", "gamma", "xi", "delta_in", "delta_out")


@dataclass(frozen=True, eq=False)
class Snapshot:
    """A static directed multigraph on nodes ``1..node_count``."""

    node_count: int
    src: np.ndarray
    dst: np.ndarray

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        if src.shape != dst.shape or src.ndim != 1:
            raise MalformedInputError("src and dst must be 1-d arrays of equal length")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        if self.node_count < 0:
            raise MalformedInputError("node_count must be non-negative")
        if len(src) and (min(src.min(), dst.min()) < 1
                         or max(src.max(), dst.max()) > self.node_count):
            raise MalformedInputError(
                f"node ids must lie in 1..{self.node_count}")

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @classmethod
    def empty(cls, node_count: int = 1) -> "Snapshot":
        return cls(node_count, np.zeros(0, np.int64), np.zeros(0, np.int64))

    def in_degrees(self) -> np.ndarray:
        """In-degree of every node, indexed by ``id - 1``."""
        return np.bincount(self.dst - 1, minlength=self.node_count)

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.src - 1, minlength=self.node_count)

    def __eq__(self, other):
        if not isinstance(other, Snapshot):
            return NotImplemented
        return (self.node_count == other.node_count
                and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst))


@dataclass(frozen=True, eq=False)
class GrowthHistory:
    """Edge-by-edge evolution ``G(n0) -> G(n)``.

    ``src``/``dst``/``scenarios`` hold the ``n - n0`` edges added after the
    seed graph, in order. ``timestamps`` is optional.
    """

    seed: Snapshot
    src: np.ndarray
    dst: np.ndarray
    scenarios: Optional[np.ndarray]
    timestamps: Optional[np.ndarray] = None

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise MalformedInputError("src and dst must have equal length")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        if self.scenarios is not None:
            sc = np.asarray(self.scenarios, dtype=np.int8)
            if sc.shape != src.shape:
                raise MalformedInputError("scenario labels must align with edges")
            if len(sc) and (sc.min() < 1 or sc.max() > 5):
                raise MalformedInputError("scenario labels must lie in 1..5")
            object.__setattr__(self, "scenarios", sc)
        if self.timestamps is not None:
            object.__setattr__(self, "timestamps", np.asarray(self.timestamps, dtype=np.int64))

    @property
    def n0(self) -> int:
        return self.seed.n_edges

    @property
    def n(self) -> int:
        """Total edge count at the end of the history."""
        return self.seed.n_edges + len(self.src)

    @property
    def n_steps(self) -> int:
        return len(self.src)

    @property
    def is_extended(self) -> bool:
        return self.scenarios is not None and bool(np.any(self.scenarios >= 4))

    def node_counts(self) -> np.ndarray:
        """``N(t)`` for ``t = n0, ..., n`` (length ``n - n0 + 1``)."""
        if self.scenarios is None:
            raise HistoryIncompleteError("scenario labels are required")
        steps = NEW_NODES_BY_TAG[self.scenarios]
        out = np.empty(len(steps) + 1, dtype=np.int64)
        out[0] = self.seed.node_count
        np.cumsum(steps, out=out[1:])
        out[1:] += self.seed.node_count
        return out

    @property
    def node_count(self) -> int:
        if self.scenarios is None:
            return int(max(self.seed.node_count,
                           self.src.max(initial=0), self.dst.max(initial=0)))
        return int(self.node_counts()[-1])

    def final_snapshot(self) -> Snapshot:
        return Snapshot(self.node_count,
                        np.concatenate([self.seed.src, self.src]),
                        np.concatenate([self.seed.dst, self.dst]))

    def prefix_snapshot(self, steps: int) -> Snapshot:
        """The graph after the first ``steps`` history edges."""
        nc = self.node_counts()[steps]
        return Snapshot(int(nc), np.concatenate([self.seed.src, self.src[:steps]]),
                        np.concatenate([self.seed.dst, self.dst[:steps]]))

    def window(self, start: int, stop: int) -> "GrowthHistory":
        """Sub-history of steps ``start..stop-1`` seeded by the graph before ``start``."""
        ts = None if self.timestamps is None else self.timestamps[start:stop]
        return GrowthHistory(self.prefix_snapshot(start), self.src[start:stop],
                             self.dst[start:stop], self.scenarios[start:stop], ts)

    def __eq__(self, other):
        if not isinstance(other, GrowthHistory):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return np.array_equal(a, b)

        return (self.seed == other.seed and same(self.src, other.src)
                and same(self.dst, other.dst) and same(self.scenarios, other.scenarios))


class HistoryIncompleteError(ValueError):
    """Raised when a history lacks the scenario labels an operation needs."""


def tail_counts(degrees: np.ndarray) -> np.ndarray:
    """``out[i] = #{v : degree(v) > i}`` for ``i = 0..max(degrees)``.

    The last entry is always 0.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.size == 0:
        return np.zeros(1, dtype=np.int64)
    counts = np.bincount(degrees)
    # N_{>i} = sum_{k>i} N_k
    tails = np.cumsum(counts[::-1])[::-1]
    return np.append(tails[1:], 0).astype(np.int64)


@dataclass(frozen=True, eq=False)
class DegreeStats:
    """Tail counts of the in- and out-degree distributions of a graph."""

    n: int
    node_count: int
    in_tail: np.ndarray
    out_tail: np.ndarray

    @property
    def in_zero(self) -> int:
        return int(self.node_count - self.in_tail[0])

    @property
    def out_zero(self) -> int:
        return int(self.node_count - self.out_tail[0])

    @property
    def in_mass(self) -> int:
        """Total in-degree; equals ``n`` for any graph here since every edge has one head."""
        return int(self.in_tail.sum())

    @property
    def out_mass(self) -> int:
        return int(self.out_tail.sum())

    def in_counts(self) -> np.ndarray:
        """Point counts ``N^in_i`` recovered by differencing the tails."""
        return _point_counts(self.node_count, self.in_tail)

    def out_counts(self) -> np.ndarray:
        return _point_counts(self.node_count, self.out_tail)


def _point_counts(node_count, tail):
    upper = np.concatenate([[node_count], tail[:-1]])
    return upper - tail


def degree_stats_from_snapshot(s: Snapshot) -> DegreeStats:
    """Tail counts of a snapshot, computed in one pass over its edges."""
    return DegreeStats(n=s.n_edges, node_count=s.node_count,
                       in_tail=tail_counts(s.in_degrees()),
                       out_tail=tail_counts(s.out_degrees()))


def power_law_indices(p: Params) -> tuple:
    """Tail indices ``(iota_in, iota_out)`` of the limiting degree distributions."""
    if not p.is_basic:
        raise ModelError("power-law indices are defined for the basic model only")
    if not p.alpha * p.delta_in + p.gamma > 0:
        raise ModelError("in-degree power law requires alpha*delta_in + gamma > 0")
    if not p.gamma * p.delta_out + p.alpha > 0:
        raise ModelError("out-degree power law requires gamma*delta_out + alpha > 0")
    a, b, g = p.alpha, p.beta, p.gamma
    iota_in = 1.0 + (1.0 + p.delta_in * (a + g)) / (a + b)
    iota_out = 1.0 + (1.0 + p.delta_out * (a + g)) / (b + g)
    return iota_in, iota_out


class FitMethod(str, enum.Enum):
    FULL_MLE = "full_mle"
    SNAPSHOT = "snapshot"


@dataclass
class SolverInfo:
    iterations: int = 0
    residual: float = 0.0
    bracket: tuple = (float("nan"), float("nan"))
    boundary: bool = False
    flagged: bool = False
    note: str = ""


@dataclass
class FitResult:
    """Point estimates plus optional covariance of the estimator.

    ``covariance`` is the covariance of the estimate vector itself (already
    divided by the number of observed steps), ordered as
    ``params.vector_names()``.
    """

    params: Params
    method: FitMethod
    n_obs: int
    covariance: Optional[np.ndarray] = None
    conf_intervals: dict = field(default_factory=dict)
    level: Optional[float] = None
    solver_info: dict = field(default_factory=dict)
    boundary: tuple = ()
    warnings: list = field(default_factory=list)

    def estimates(self) -> np.ndarray:
        return self.params.vector()

    @property
    def names(self) -> tuple:
        return self.params.vector_names()

    def std_errors(self) -> Optional[np.ndarray]:
        if self.covariance is None:
            return None
        return np.sqrt(np.diag(self.covariance))

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "params": self.params.to_dict(),
            "n_obs": self.n_obs,
            "names": list(self.names),
            "covariance": None if self.covariance is None else self.covariance.tolist(),
            "level": self.level,
            "conf_intervals": {k: list(v) for k, v in self.conf_intervals.items()},
            "solver_info": {k: vars(v) if isinstance(v, SolverInfo) else v
                            for k, v in self.solver_info.items()},
            "boundary": list(self.boundary),
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        cov = d.get("covariance")
        return cls(
            params=Params.from_dict(d["params"]),
            method=FitMethod(d["method"]),
            n_obs=int(d["n_obs"]),
            covariance=None if cov is None else np.asarray(cov, dtype=float),
            conf_intervals={k: tuple(v) for k, v in d.get("conf_intervals", {}).items()},
            level=d.get("level"),
            solver_info={k: SolverInfo(**{kk: tuple(vv) if kk == "bracket" else vv
                                          for kk, vv in v.items()})
                         for k, v in d.get("solver_info", {}).items()},
            boundary=tuple(d.get("boundary", ())),
            warnings=list(d.get("warnings", [])),
        )
