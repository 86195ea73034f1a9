"""Maximum likelihood from the full growth history.

The likelihood factorises into a scenario part and two offset parts. The
offset parts depend on the data only through the tail-count increments
``N_{>i}(n) - N_{>i}(n0)``, the number of nodes born with in- (resp. out-)
degree one, and the pairs ``(t-1, N(t-1))`` of the steps that sampled an
existing node by in- (resp. out-) degree. ``SufficientStats`` holds
exactly that, so every score evaluation is a couple of dot products.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize, stats

from .model import (FitMethod, FitResult, GrowthHistory, HistoryIncompleteError,
                    ModelError, Params, SolverInfo, tail_counts)

# scenario labels whose new edge's head (tail) is an existing node chosen by in- (out-)degree
IN_SAMPLED = (1, 2)
OUT_SAMPLED = (2, 3)
# scenarios that create a node with in- (out-)degree already equal to one
IN_BORN = (3, 4, 5)
OUT_BORN = (1, 4, 5)


class BracketError(RuntimeError):
    """The score has no sign change on the offset bracket."""


@dataclass(frozen=True)
class DeltaBracket:
    epsilon: float = 1e-4
    K: float = 1e4

    def __post_init__(self):
        if not (0 < self.epsilon < self.K < math.inf):
            raise ValueError("bracket must satisfy 0 < epsilon < K < inf")


@dataclass(frozen=True, eq=False)
class SufficientStats:
    scenario_counts: np.ndarray  # counts of labels 1..5
    in_tail_diff: np.ndarray
    out_tail_diff: np.ndarray
    in_t: np.ndarray  # t-1 at steps with label in IN_SAMPLED
    in_N: np.ndarray  # N(t-1) at those steps
    out_t: np.ndarray
    out_N: np.ndarray

    @property
    def n_steps(self) -> int:
        return int(self.scenario_counts.sum())

    @property
    def extended(self) -> bool:
        return bool(self.scenario_counts[3:].sum() > 0)

    def born(self, which: str) -> int:
        labels = IN_BORN if which == "in" else OUT_BORN
        return int(sum(self.scenario_counts[k - 1] for k in labels))

    def side(self, which: str):
        if which == "in":
            return self.in_tail_diff, self.born("in"), self.in_t, self.in_N
        if which == "out":
            return self.out_tail_diff, self.born("out"), self.out_t, self.out_N
        raise ValueError("which must be 'in' or 'out'")


def _pad_sub(a, b):
    m = max(len(a), len(b))
    out = np.zeros(m, dtype=np.int64)
    out[: len(a)] += a
    out[: len(b)] -= b
    return out


def sufficient_stats(h: GrowthHistory, corrected: bool = True) -> SufficientStats:
    """Reduce a labelled history to the statistics the likelihood depends on.

    With ``corrected=False`` the seed graph's tail counts are not
    subtracted (asymptotically equivalent when the seed is small).
    """
    if h.scenarios is None:
        raise HistoryIncompleteError(
            "history has no scenario labels; use the snapshot estimator instead")
    sc = h.scenarios
    counts = np.bincount(sc, minlength=6)[1:6].astype(np.int64)
    final = h.final_snapshot()
    in_diff = tail_counts(final.in_degrees())
    out_diff = tail_counts(final.out_degrees())
    if corrected and h.seed.n_edges:
        in_diff = _pad_sub(in_diff, tail_counts(h.seed.in_degrees()))
        out_diff = _pad_sub(out_diff, tail_counts(h.seed.out_degrees()))
    nc = h.node_counts()[:-1]
    tprev = np.arange(h.n0, h.n, dtype=np.int64)
    in_mask = (sc == 1) | (sc == 2)
    out_mask = (sc == 2) | (sc == 3)
    return SufficientStats(counts, in_diff, out_diff,
                           tprev[in_mask], nc[in_mask], tprev[out_mask], nc[out_mask])


def mle_scenario_probs(ss: SufficientStats) -> tuple:
    """Scenario frequencies. Returns ``(alpha, beta)`` for basic data and
    ``(alpha, beta, gamma, xi, rho)`` when labels 4/5 occur."""
    m = ss.n_steps
    if m <= 0:
        raise ValueError("history has no steps")
    probs = ss.scenario_counts / m
    for name, v in zip(("alpha", "beta", "gamma", "xi", "rho"), probs):
        if v == 0.0 and (name in ("alpha", "beta", "gamma") or ss.extended):
            warnings.warn(f"{name} estimate is on the boundary (0)", stacklevel=2)
    if ss.extended:
        return tuple(float(x) for x in probs)
    return float(probs[0]), float(probs[1])


def _score(ss: SufficientStats, lam: float, which: str) -> float:
    diff, born, t, N = ss.side(which)
    i = np.arange(len(diff), dtype=np.float64)
    val = (np.dot(diff, 1.0 / (i + lam)) - born / lam
           - np.sum(N / (t + lam * N)))
    return float(val) / ss.n_steps


def score_delta_in(ss: SufficientStats, lam: float) -> float:
    """Normalised score for ``delta_in`` (divided by ``n - n0``)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return _score(ss, lam, "in")


def score_delta_out(ss: SufficientStats, mu: float) -> float:
    if mu <= 0:
        raise ValueError("mu must be positive")
    return _score(ss, mu, "out")


def offset_loglik(ss: SufficientStats, lam: float, which: str) -> float:
    """The ``delta``-dependent part of the log-likelihood (not normalised)."""
    diff, born, t, N = ss.side(which)
    i = np.arange(len(diff), dtype=np.float64)
    return float(np.dot(diff, np.log(i + lam)) - born * math.log(lam)
                 - np.sum(np.log(t + lam * N)))


def mle_delta(ss: SufficientStats, bracket: DeltaBracket = DeltaBracket(),
              which: str = "in", allow_boundary: bool = True,
              xtol: float = 1e-12) -> tuple:
    """Bracketed root of the offset score. Returns ``(delta_hat, SolverInfo)``."""
    f = (lambda x: _score(ss, x, which))
    lo, hi = bracket.epsilon, bracket.K
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > 0 > f_hi or f_lo < 0 < f_hi:
        root, res = optimize.brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps,
                                    maxiter=200, full_output=True)
        return root, SolverInfo(res.iterations, abs(f(root)), (lo, hi))
    if f_lo == 0.0:
        return lo, SolverInfo(0, 0.0, (lo, hi))
    if f_hi == 0.0:
        return hi, SolverInfo(0, 0.0, (lo, hi))
    if not allow_boundary:
        raise BracketError(f"score for delta_{which} has the same sign at {lo} and {hi}")
    end = lo if offset_loglik(ss, lo, which) >= offset_loglik(ss, hi, which) else hi
    return end, SolverInfo(0, abs(f(end)), (lo, hi), boundary=True,
                           note="no sign change; returned the maximising endpoint")


def _log(x):
    return math.log(x) if x > 0 else -math.inf


def _count_term(count, prob):
    if count == 0:
        return 0.0
    return count * _log(prob)


def loglik_from_stats(ss: SufficientStats, p: Params) -> float:
    """Log-likelihood via the sufficient-statistic factorisation."""
    ll = sum(_count_term(c, q) for c, q in zip(ss.scenario_counts, p.probs))
    if ll == -math.inf:
        return ll
    return ll + offset_loglik(ss, p.delta_in, "in") + offset_loglik(ss, p.delta_out, "out")


def degrees_before(h: GrowthHistory) -> tuple:
    """In-degree of each step's head and out-degree of each step's tail just
    before that step. New nodes get degree 0."""
    seed = h.seed
    n_nodes = h.node_count

    def before(nodes, seed_deg):
        base = np.zeros(n_nodes + 1, dtype=np.int64)
        base[1: len(seed_deg) + 1] = seed_deg
        order = np.argsort(nodes, kind="stable")
        sorted_nodes = nodes[order]
        starts = np.r_[0, np.flatnonzero(np.diff(sorted_nodes)) + 1]
        run_start = np.repeat(starts, np.diff(np.r_[starts, len(nodes)]))
        rank = np.empty(len(nodes), dtype=np.int64)
        rank[order] = np.arange(len(nodes)) - run_start
        return base[nodes] + rank

    return before(h.dst, seed.in_degrees()), before(h.src, seed.out_degrees())


def log_likelihood(h: GrowthHistory, p: Params, method: str = "replay") -> float:
    """Log-likelihood of the labelled history.

    ``method="replay"`` sums the per-edge log-probabilities;
    ``method="factorized"`` goes through the sufficient statistics.
    """
    if method == "factorized":
        return loglik_from_stats(sufficient_stats(h), p)
    if method != "replay":
        raise ValueError(f"unknown method {method!r}")
    if h.scenarios is None:
        raise HistoryIncompleteError("scenario labels are required")
    sc = h.scenarios
    if len(sc) == 0:
        return 0.0
    d_in, d_out = degrees_before(h)
    nc = h.node_counts()[:-1].astype(np.float64)
    tprev = np.arange(h.n0, h.n, dtype=np.float64)
    logp = np.array([-math.inf] + [_log(q) for q in p.probs])
    total = float(np.sum(logp[sc]))
    if total == -math.inf:
        return total
    m_in = (sc == 1) | (sc == 2)
    m_out = (sc == 2) | (sc == 3)
    total += float(np.sum(np.log(d_in[m_in] + p.delta_in)
                          - np.log(tprev[m_in] + p.delta_in * nc[m_in])))
    total += float(np.sum(np.log(d_out[m_out] + p.delta_out)
                          - np.log(tprev[m_out] + p.delta_out * nc[m_out])))
    return total


def fisher_information(p: Params, in_tail_frac: np.ndarray, out_tail_frac: np.ndarray,
                       gamma_frac: Optional[float] = None,
                       alpha_frac: Optional[float] = None) -> tuple:
    """Plug-in asymptotic Fisher information for ``(alpha, beta, delta_in, delta_out)``.

    The tail fractions replace the limiting ``p_{>i}``. ``gamma_frac`` and
    ``alpha_frac`` (fractions of in- and out-born nodes) default to
    ``p.gamma`` and ``p.alpha``. Returns ``(I, warnings)``.
    """
    if not p.is_basic:
        raise ModelError("Fisher information is only available for the basic model")
    a, b = p.alpha, p.beta
    g = 1.0 - a - b
    gf = g if gamma_frac is None else gamma_frac
    af = a if alpha_frac is None else alpha_frac
    I = np.zeros((4, 4))
    if a * b * g > 0:
        I[0, 0] = (1 - b) / (a * g)
        I[0, 1] = I[1, 0] = 1.0 / g
        I[1, 1] = (1 - a) / (b * g)
    else:
        I[:2, :2] = np.nan

    def block(tails, dl, born, mass):
        i = np.arange(len(tails), dtype=np.float64)
        return (float(np.sum(tails / (i + dl) ** 2)) - born / dl ** 2
                - mass * (1 - b) ** 2 / (1 + dl * (1 - b)) ** 2)

    I[2, 2] = block(np.asarray(in_tail_frac, float), p.delta_in, gf, a + b)
    I[3, 3] = block(np.asarray(out_tail_frac, float), p.delta_out, af, 1 - a)
    warn = []
    if not I[2, 2] > 0:
        warn.append(f"non-positive plug-in information for delta_in ({I[2, 2]:.3g})")
    if not I[3, 3] > 0:
        warn.append(f"non-positive plug-in information for delta_out ({I[3, 3]:.3g})")
    return I, warn


def plugin_sigma(p: Params, I: np.ndarray) -> np.ndarray:
    """Asymptotic covariance of ``sqrt(n) (theta_hat - theta)`` from the information."""
    a, b = p.alpha, p.beta
    S = np.zeros((4, 4))
    S[0, 0] = a * (1 - a)
    S[0, 1] = S[1, 0] = -a * b
    S[1, 1] = b * (1 - b)
    with np.errstate(divide="ignore"):
        S[2, 2] = 1.0 / I[2, 2] if I[2, 2] > 0 else np.nan
        S[3, 3] = 1.0 / I[3, 3] if I[3, 3] > 0 else np.nan
    return S


def z_value(level: float) -> float:
    if not 0 <= level < 1:
        raise ValueError("level must lie in [0, 1)")
    return float(stats.norm.ppf(0.5 + level / 2.0))


def confidence_intervals(fr: FitResult, level: float = 0.95) -> dict:
    """Wald intervals ``estimate +/- z * sqrt(cov_ii)``; boundary coordinates are skipped."""
    if fr.covariance is None:
        raise ValueError("fit has no covariance")
    z = z_value(level)
    est = fr.estimates()
    out = {}
    for k, name in enumerate(fr.names):
        if name in fr.boundary:
            continue
        var = fr.covariance[k, k]
        if not np.isfinite(var):
            continue
        half = z * math.sqrt(max(var, 0.0))
        out[name] = (float(est[k] - half), float(est[k] + half))
    return out


def fit_mle(h: GrowthHistory, bracket: DeltaBracket = DeltaBracket(),
            level: Optional[float] = 0.95, corrected: bool = True,
            allow_boundary: bool = True) -> FitResult:
    """Full-history MLE of every parameter, with plug-in Wald intervals for
    the basic model."""
    ss = sufficient_stats(h, corrected=corrected)
    return fit_from_stats(ss, bracket, level, allow_boundary)


def fit_from_stats(ss: SufficientStats, bracket: DeltaBracket = DeltaBracket(),
                   level: Optional[float] = 0.95, allow_boundary: bool = True) -> FitResult:
    m = ss.n_steps
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        probs = mle_scenario_probs(ss)
    d_in, info_in = mle_delta(ss, bracket, "in", allow_boundary)
    d_out, info_out = mle_delta(ss, bracket, "out", allow_boundary)
    msgs = [str(w.message) for w in caught]
    counts = ss.scenario_counts
    if ss.extended:
        a, b, g, xi, _ = probs
        params = Params.extended(a, b, g, xi, d_in, d_out)
        names = ("alpha", "beta", "gamma", "xi")
    else:
        a, b = probs
        params = Params.basic(a, b, d_in, d_out)
        names = ("alpha", "beta")
    boundary = [nm for nm, c in zip(names, counts) if c == 0]
    if not ss.extended and counts[2] == 0:
        boundary.append("gamma")
    if info_in.boundary:
        boundary.append("delta_in")
    if info_out.boundary:
        boundary.append("delta_out")
    fr = FitResult(params, FitMethod.FULL_MLE, m,
                   solver_info={"delta_in": info_in, "delta_out": info_out},
                   boundary=tuple(boundary), warnings=msgs)
    if not ss.extended:
        I, w = fisher_information(params, ss.in_tail_diff / m, ss.out_tail_diff / m,
                                  gamma_frac=ss.born("in") / m, alpha_frac=ss.born("out") / m)
        fr.warnings.extend(w)
        if "gamma" in boundary:
            # the (alpha, beta) block is singular on this face of the simplex
            boundary.extend(n for n in ("alpha", "beta") if n not in boundary)
            fr.boundary = tuple(boundary)
        fr.covariance = plugin_sigma(params, I) / m
        if level is not None:
            fr.level = level
            fr.conf_intervals = confidence_intervals(fr, level)
    return fr
