"""Estimation from a single static snapshot, and parametric bootstrap.

Only the final degree counts are used. ``beta`` comes from the node
count; each offset is first found by matching two moment equations in the
variable ``eta = delta / (1 + delta (1 - beta))``, where the gap between
them is concave and so has a unique non-trivial root. The scenario
probabilities are then renormalised onto the simplex and both offsets are
re-solved with the renormalised probabilities.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .limits import delta_of_eta, eta_interval, eta_of_delta
from .mle import DeltaBracket, z_value
from .model import (FitMethod, FitResult, GrowthHistory, ModelError, Params, Snapshot,
                    SolverInfo, degree_stats_from_snapshot)
from .simulate import SimConfig, replicate_rng, simulate

GRID_POINTS = 200
_XTOL = 1e-13


class SnapshotError(RuntimeError):
    """The snapshot equations have no admissible root."""


@dataclass(frozen=True, eq=False)
class SnapshotMoments:
    """Degree-count summaries of one snapshot, all divided by the edge count.

    ``in_tail_rem``/``out_tail_rem`` carry tail mass beyond the last entry
    of the tail vectors; they are zero for real data and only used when the
    moments are built from a truncated limiting law.
    """

    n: float
    beta_tilde: float
    in_tail_frac: np.ndarray
    out_tail_frac: np.ndarray
    in_zero_frac: float
    out_zero_frac: float
    in_tail_rem: float = 0.0
    out_tail_rem: float = 0.0

    @classmethod
    def from_snapshot(cls, s: Snapshot) -> "SnapshotMoments":
        if s.n_edges < 1:
            raise ValueError("snapshot has no edges")
        d = degree_stats_from_snapshot(s)
        n = float(d.n)
        beta = 1.0 - d.node_count / n
        if not 0.0 <= beta < 1.0:
            warnings.warn(f"beta_tilde={beta:.4g} lies outside [0, 1)", stacklevel=2)
        return cls(n, beta, d.in_tail / n, d.out_tail / n,
                   d.in_zero / n, d.out_zero / n)

    def side(self, which: str):
        """``(tails, zero_frac, remainder)`` for ``which`` in {"in", "out"}."""
        if which == "in":
            return self.in_tail_frac, self.in_zero_frac, self.in_tail_rem
        if which == "out":
            return self.out_tail_frac, self.out_zero_frac, self.out_tail_rem
        raise ValueError("which must be 'in' or 'out'")


def _gap_over_eta(eta, beta, tails, zero, rem):
    """``(g~ - f~) / eta`` written without the cancellation at small ``eta``.

    Since ``f~(0) = g~(0)`` for any degree sequence, dividing out the
    trivial root leaves a function whose sign equals that of ``h~ = 1/f~ - 1/g~``.
    """
    i = np.arange(1, len(tails), dtype=np.float64)
    b = 1.0 / i - (1.0 - beta)
    w = tails[1:]
    s = float(np.sum(w * b / (1.0 + b * eta)))
    s -= rem * (1.0 - beta) / (1.0 - (1.0 - beta) * eta)
    return (zero + beta) * zero / (1.0 - eta * zero) + s


def _grid_sign_changes(fun, lo, hi, points=GRID_POINTS):
    grid = np.geomspace(lo, hi, points)
    vals = np.array([fun(x) for x in grid])
    idx = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    return grid, vals, idx


def solve_step2(m: SnapshotMoments, which: str = "in",
                bracket: DeltaBracket = DeltaBracket()) -> tuple:
    """Offset that equates the two moment equations, solved in ``eta``.

    Returns ``(delta0, SolverInfo)``.
    """
    beta = m.beta_tilde
    if not 0.0 < beta < 1.0:
        raise SnapshotError(f"beta_tilde={beta:.4g} must lie in (0, 1)")
    tails, zero, rem = m.side(which)
    lo, hi = eta_interval(beta, bracket.epsilon, bracket.K)

    def fun(e):
        return _gap_over_eta(e, beta, tails, zero, rem)

    grid, vals, idx = _grid_sign_changes(fun, lo, hi)
    if idx.size == 0:
        raise SnapshotError(f"moment-matching equation for delta_{which} has no root "
                            "on the bracket")
    roots = [optimize.brentq(fun, grid[k], grid[k + 1], xtol=1e-15, rtol=1e-15)
             for k in idx]
    flagged = False
    note = ""
    if len(roots) == 1:
        eta = roots[0]
    else:
        # pilot bisection from the midpoint of the interval
        if np.sign(vals[0]) != np.sign(vals[-1]):
            pilot = optimize.bisect(fun, lo, hi, xtol=1e-8)
        else:
            pilot = 0.5 * (lo + hi)
        eta = min(roots, key=lambda r: abs(r - pilot))
        flagged = True
        note = f"{len(roots)} sign changes; took the root nearest {pilot:.6g}"
    delta = float(delta_of_eta(eta, beta))
    return delta, SolverInfo(0, float(abs(fun(eta))), (float(lo), float(hi)),
                             flagged=flagged, note=note)


def g_moment(delta: float, beta: float, zero: float) -> float:
    """``(p0 + beta) / (1 - p0 * delta / (1 + (1 - beta) delta))``."""
    return (zero + beta) / (1.0 - zero * float(eta_of_delta(delta, beta)))


def offset_residual(delta: float, prob: float, beta: float, tails: np.ndarray,
                   rem: float = 0.0) -> float:
    """Moment equation for one offset given the matching new-node probability
    (``alpha`` for the in-side, ``gamma`` for the out-side)."""
    i = np.arange(len(tails), dtype=np.float64)
    head = float(np.sum(tails / (i + delta))) + rem / (len(tails) + delta)
    return (head - (1.0 - prob - beta) / delta
            - (prob + beta) * (1.0 - beta) / (1.0 + (1.0 - beta) * delta))


def _solve_offset(m, which, prob, bracket):
    tails, _, rem = m.side(which)
    beta = m.beta_tilde

    def fun(d):
        return offset_residual(d, prob, beta, tails, rem)

    lo, hi = bracket.epsilon, bracket.K
    f_lo, f_hi = fun(lo), fun(hi)
    if np.sign(f_lo) * np.sign(f_hi) > 0:
        raise SnapshotError(f"offset equation for delta_{which} has no sign change on "
                            f"[{lo}, {hi}]")
    root, res = optimize.brentq(fun, lo, hi, xtol=_XTOL, rtol=4 * np.finfo(float).eps,
                                full_output=True, maxiter=200)
    return root, SolverInfo(res.iterations, float(abs(fun(root))), (lo, hi))


def fit_moments(m: SnapshotMoments, bracket: DeltaBracket = DeltaBracket()) -> FitResult:
    """Snapshot fit from precomputed moments."""
    beta = m.beta_tilde
    if not 0.0 < beta < 1.0:
        raise SnapshotError(f"beta_tilde={beta:.4g} must lie in (0, 1); "
                            "the snapshot has too many nodes per edge")
    d_in0, info_in0 = solve_step2(m, "in", bracket)
    alpha0 = g_moment(d_in0, beta, m.in_zero_frac) - beta
    d_out0, info_out0 = solve_step2(m, "out", bracket)
    gamma0 = g_moment(d_out0, beta, m.out_zero_frac) - beta
    msgs = []
    if not (alpha0 > 0 and gamma0 > 0):
        raise SnapshotError(f"preliminary estimates alpha0={alpha0:.4g}, gamma0={gamma0:.4g} "
                            "are not positive")
    alpha = alpha0 * (1.0 - beta) / (alpha0 + gamma0)
    gamma = 1.0 - beta - alpha
    d_in, info_in = _solve_offset(m, "in", alpha, bracket)
    d_out, info_out = _solve_offset(m, "out", gamma, bracket)
    params = Params(alpha, beta, gamma, d_in, d_out)
    info = {"delta_in0": info_in0, "delta_out0": info_out0,
            "delta_in": info_in, "delta_out": info_out}
    for k, v in info.items():
        if v.flagged:
            msgs.append(f"{k}: {v.note}")
    n_obs = int(round(m.n)) if math.isfinite(m.n) else 0
    return FitResult(params, FitMethod.SNAPSHOT, n_obs, solver_info=info,
                     warnings=msgs)


def snapshot_fit(s: Snapshot, bracket: DeltaBracket = DeltaBracket()) -> FitResult:
    """Fit ``(alpha, beta, gamma, delta_in, delta_out)`` from one static graph."""
    return fit_moments(SnapshotMoments.from_snapshot(s), bracket)


# -- parametric bootstrap -------------------------------------------------

@dataclass
class BootstrapResult:
    names: tuple
    center: np.ndarray
    estimates: np.ndarray  # successful replicates, one row each
    failures: int
    reps: int
    level: float
    intervals: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    @property
    def failure_rate(self) -> float:
        return self.failures / self.reps

    def variances(self) -> np.ndarray:
        return np.var(self.estimates, axis=0, ddof=1)


MAX_FAILURE_RATE = 0.05


def parametric_bootstrap(params: Params, n: int, reps: int,
                         refit: Callable[[GrowthHistory], FitResult],
                         level: float = 0.95, seed: int = 0,
                         center: Optional[np.ndarray] = None,
                         seed_graph: Optional[Snapshot] = None) -> BootstrapResult:
    """Simulate ``reps`` networks at ``params``, refit each, and form
    ``center +/- z * sd`` intervals from the replicate standard deviations.

    Replicate ``k`` uses the stream derived from ``(seed, k)``.
    """
    if reps < 2:
        raise ValueError("need at least two bootstrap replicates")
    cfg = SimConfig(params, n, seed_graph or Snapshot.empty(1), seed)
    names = params.vector_names()
    rows, errors = [], []
    for k in range(reps):
        try:
            h = simulate(cfg, rng=replicate_rng(seed, k))
            rows.append(refit(h).params.vector())
        except (SnapshotError, ModelError, ValueError, RuntimeError) as e:
            errors.append(f"replicate {k}: {e}")
    failures = len(errors)
    res = BootstrapResult(names, params.vector() if center is None else np.asarray(center),
                          np.array(rows).reshape(len(rows), len(names)),
                          failures, reps, level, errors=errors)
    if res.failure_rate >= MAX_FAILURE_RATE or len(rows) < 2:
        raise RuntimeError(f"{failures} of {reps} bootstrap replicates failed")
    z = z_value(level)
    sd = np.sqrt(res.variances())
    res.intervals = {nm: (float(c - z * s), float(c + z * s))
                     for nm, c, s in zip(names, res.center, sd)}
    return res


def _check_interior(p: Params):
    bad = [nm for nm, v in zip(("alpha", "beta", "gamma"), (p.alpha, p.beta, p.gamma))
           if v <= 0.0]
    if bad:
        raise ModelError(f"cannot bootstrap from boundary estimates ({', '.join(bad)} = 0)")


def bootstrap_ci(fr: FitResult, reps: int, n: Optional[int] = None, level: float = 0.95,
                 seed: int = 0, bracket: DeltaBracket = DeltaBracket()) -> BootstrapResult:
    """Snapshot-refit bootstrap intervals around a snapshot fit."""
    _check_interior(fr.params)
    n = fr.n_obs if n is None else n
    return parametric_bootstrap(
        fr.params, n, reps, lambda h: snapshot_fit(h.final_snapshot(), bracket),
        level=level, seed=seed)


def bootstrap_mle_ci(fr: FitResult, reps: int, n: Optional[int] = None,
                     level: float = 0.95, seed: int = 0,
                     bracket: DeltaBracket = DeltaBracket()) -> BootstrapResult:
    """MLE-refit bootstrap intervals; the only interval option for the
    extended model."""
    from .mle import fit_mle
    _check_interior(fr.params)
    n = fr.n_obs if n is None else n
    return parametric_bootstrap(fr.params, n, reps,
                                lambda h: fit_mle(h, bracket, level=None),
                                level=level, seed=seed)
