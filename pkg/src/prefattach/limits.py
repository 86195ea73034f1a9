"""Limiting in/out-degree distributions and the functions built on them.

``p_i(lam)`` below is the limiting fraction (per edge) of nodes with
in-degree ``i`` when the in-offset equals ``lam``. It is computed by the
first-order recursion in ``i``; the closed-form Gamma-ratio expression is
kept as an independent cross-check. Out-degree quantities are obtained by
mirroring the parameters (``alpha <-> gamma``, ``delta_in <-> delta_out``).

Sums over the infinite support are split into an explicit part and an
analytic remainder. For ``i >= m`` the probabilities are
``A * Gamma(i + lam) / Gamma(i + 1 + lam + c)`` with ``c = 1 / a1(lam)``,
and sums of such Gamma ratios telescope:
``sum_{i>=m} Gamma(i+a)/Gamma(i+b) = Gamma(m+a) / ((b-a-1) Gamma(m+b-1))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .model import ModelError, Params

DEFAULT_TAIL_TOL = 1e-12
MAX_TERMS = 10_000_000


class TruncationError(RuntimeError):
    """The tail tolerance could not be reached within the term cap."""


def a1(lam: float, p: Params) -> float:
    """``(alpha + beta) / (1 + lam (1 - beta))``."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return (p.alpha + p.beta) / (1.0 + lam * (1.0 - p.beta))


@dataclass(frozen=True, eq=False)
class LimitInDist:
    """Truncated limiting in-degree law.

    ``probs[i] = p_i`` and ``tails[i] = p_{>i}`` for ``i = 0..I_max``, and
    ``truncation_mass = p_{>I_max}``. The ``*_remainder`` fields are the
    parts of the three series ``sum p_i``, ``sum i p_i`` and ``sum p_{>i}``
    beyond ``I_max``, evaluated in closed form.
    """

    params: Params
    lam: float
    probs: np.ndarray
    tails: np.ndarray
    truncation_mass: float
    mass_remainder: float
    first_moment_remainder: float
    tail_sum_remainder: float

    @property
    def i_max(self) -> int:
        return len(self.probs) - 1

    def total_mass(self) -> float:
        return float(self.probs.sum()) + self.mass_remainder

    def first_moment(self) -> float:
        i = np.arange(len(self.probs), dtype=np.float64)
        return float(np.sum(i * self.probs)) + self.first_moment_remainder

    def tail_sum(self) -> float:
        return float(self.tails.sum()) + self.tail_sum_remainder


def _check_basic(p: Params):
    if not p.is_basic:
        raise ModelError("limiting distributions are implemented for the basic model")


def limit_in_dist(p: Params, lam: float, tail_tol: float = DEFAULT_TAIL_TOL,
                  max_terms: int = MAX_TERMS, min_terms: int = 0) -> LimitInDist:
    """Recursion for ``p_i(lam)`` run until ``p_{>i} < tail_tol`` and at
    least ``min_terms`` probabilities are materialised."""
    return _limit_in_dist(p, float(lam), float(tail_tol), int(max_terms), int(min_terms))


@lru_cache(maxsize=64)
def _limit_in_dist(p, lam, tail_tol, max_terms, min_terms):
    _check_basic(p)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    al, ga = p.alpha, p.gamma
    a = a1(lam, p)
    c = 1.0 / a
    p0 = (al / a) / (lam + c)
    p1 = (lam * p0 + ga * c) / (1.0 + lam + c)
    # p_i = A Gamma(i+lam)/Gamma(i+1+lam+c) for i >= 1
    log_a = math.log(p1) + gammaln(2.0 + lam + c) - gammaln(1.0 + lam) if p1 > 0 else -np.inf

    chunks = [np.array([p0, p1])]
    last = p1
    i0 = 2
    size = 4096
    tail_last = a * (1 + lam) * p1
    while tail_last >= tail_tol or i0 < min_terms:
        if i0 > max_terms:
            raise TruncationError(
                f"tail mass {tail_last:.3e} still above {tail_tol:.1e} after {max_terms} terms")
        i = np.arange(i0, i0 + size, dtype=np.float64)
        block = last * np.cumprod((i - 1.0 + lam) / (i + lam + c))
        tails_block = a * (i + lam) * block
        below = np.nonzero((tails_block < tail_tol) & (i >= min_terms - 1))[0]
        if below.size:
            block = block[: below[0] + 1]
            chunks.append(block)
            break
        chunks.append(block)
        last = block[-1]
        tail_last = tails_block[-1]
        i0 += size
        size = min(size * 2, 1 << 22)
    probs = np.concatenate(chunks)
    idx = np.arange(len(probs), dtype=np.float64)
    tails = a * (idx + lam) * probs
    tails[0] += ga
    m = float(len(probs))  # first index not materialised
    if p1 > 0:
        lg = gammaln(m + lam + c)
        mass_rem = math.exp(log_a - math.log(c) + gammaln(m + lam) - lg)
        if c > 1:
            s1 = math.exp(log_a - math.log(c - 1.0) + gammaln(m + 1.0 + lam) - lg)
            first_rem = s1 - lam * mass_rem
            tail_rem = s1 / c
        else:
            first_rem = tail_rem = math.inf
    else:
        mass_rem = first_rem = tail_rem = 0.0
    return LimitInDist(p, lam, probs, tails, float(tails[-1]), mass_rem, first_rem, tail_rem)


def limit_out_dist(p: Params, mu: float, tail_tol: float = DEFAULT_TAIL_TOL) -> LimitInDist:
    """Out-degree law: the in-degree law of the mirrored parameters."""
    return limit_in_dist(p.mirror(), mu, tail_tol)


def gamma_formula_probs(p: Params, lam: float, i: np.ndarray) -> np.ndarray:
    """Closed-form ``p_i(lam)`` via log-Gamma (``i >= 1``)."""
    _check_basic(p)
    i = np.asarray(i, dtype=np.float64)
    a = a1(lam, p)
    c = 1.0 / a
    pref = p.alpha * lam / (1.0 + a * lam) + p.gamma / a
    logp = (gammaln(i + lam) + gammaln(1.0 + lam + c)
            - gammaln(i + 1.0 + lam + c) - gammaln(1.0 + lam))
    return np.exp(logp) * pref


def psi(lam: float, p: Params, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Limit of the normalised in-degree score at ``lam`` under true ``p``."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    d = limit_in_dist(p, p.delta_in, tail_tol)
    i = np.arange(len(d.tails), dtype=np.float64)
    head = float(np.sum(d.tails / (i + lam)))
    return head - p.gamma / lam - (1.0 - p.beta) * a1(lam, p)


def psi_out(mu: float, p: Params, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    return psi(mu, p.mirror(), tail_tol)


def fisher_in(p: Params, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Asymptotic Fisher information for ``delta_in``."""
    d = limit_in_dist(p, p.delta_in, tail_tol)
    i = np.arange(len(d.tails), dtype=np.float64)
    dl = p.delta_in
    s = float(np.sum(d.tails / (i + dl) ** 2))
    return (s - p.gamma / dl ** 2
            - (p.alpha + p.beta) * (1 - p.beta) ** 2 / (1 + dl * (1 - p.beta)) ** 2)


def fisher_out(p: Params, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    return fisher_in(p.mirror(), tail_tol)


def eta_of_delta(delta, beta):
    delta = np.asarray(delta, dtype=np.float64)
    return delta / (1.0 + delta * (1.0 - beta))


def delta_of_eta(eta, beta):
    eta = np.asarray(eta, dtype=np.float64)
    return eta / (1.0 - eta * (1.0 - beta))


def eta_interval(beta: float, eps: float, K: float) -> tuple:
    """Image of ``[eps, K]`` under ``delta -> delta / (1 + delta (1 - beta))``."""
    return (1.0 / (1.0 / eps + 1.0 - beta), 1.0 / (1.0 / K + 1.0 - beta))


def f_tilde(eta, beta: float, tails: np.ndarray, remainder: float = 0.0) -> np.ndarray:
    """``sum_{i>=1} tails[i] / (1 + (1/i - (1 - beta)) eta)``.

    ``remainder`` is tail mass beyond the last entry of ``tails``; it is
    weighted with the ``i -> inf`` limit of the summand weight.
    """
    eta = np.atleast_1d(np.asarray(eta, dtype=np.float64))
    i = np.arange(1, len(tails), dtype=np.float64)
    w = tails[1:]
    b = 1.0 / i - (1.0 - beta)
    head = np.array([np.sum(w / (1.0 + b * e)) for e in eta])
    return head + remainder / (1.0 - (1.0 - beta) * eta)


def g_tilde(eta, beta: float, zero_frac: float) -> np.ndarray:
    eta = np.asarray(eta, dtype=np.float64)
    return (zero_frac + beta) / (1.0 - eta * zero_frac)


def h_tilde(eta, beta: float, tails: np.ndarray, zero_frac: float,
            remainder: float = 0.0) -> np.ndarray:
    """``1/f~ - 1/g~``; zero exactly where the two moment equations agree."""
    return (1.0 / f_tilde(eta, beta, tails, remainder)
            - 1.0 / g_tilde(eta, beta, zero_frac))


def limit_fg(p: Params, delta: float, tail_tol: float = DEFAULT_TAIL_TOL) -> tuple:
    """Theoretical ``(f(delta), g(delta))``, with the in-degree law at the true ``delta_in``."""
    d = limit_in_dist(p, p.delta_in, tail_tol)
    eta = float(eta_of_delta(delta, p.beta))
    f = float(f_tilde(eta, p.beta, d.tails, d.tail_sum_remainder)[0])
    g = float(g_tilde(eta, p.beta, d.probs[0]))
    return f, g
