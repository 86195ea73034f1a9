"""Simulation studies: standardized estimates, relative efficiency tables,
parameter sweeps, and simulation envelopes for degree distributions."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .mle import fit_mle
from .model import BASIC_NAMES, FitResult, Params, Snapshot, tail_counts
from .simulate import SimConfig, simulate
from .snapshot import SnapshotError, snapshot_fit

MIN_REPS_FOR_ARE = 30


# -- standardized estimates and QQ data ------------------------------------

def normalized_estimates(fits: Sequence[FitResult], truth: Params,
                         scale_fits: Optional[Sequence[FitResult]] = None) -> dict:
    """``(theta_hat - theta) / se`` per coordinate, where ``se`` is the
    fit's own plug-in standard error.

    If ``scale_fits`` is given (paired one-to-one with ``fits``), their
    standard errors are used instead; this puts snapshot estimates on the
    MLE scale. Fits without a covariance are skipped with a warning.
    """
    scale_fits = fits if scale_fits is None else scale_fits
    if len(scale_fits) != len(fits):
        raise ValueError("scale_fits must pair with fits")
    names = truth.vector_names()
    theta = truth.vector()
    rows, skipped = [], 0
    for fr, sc in zip(fits, scale_fits):
        se = sc.std_errors()
        if se is None:
            skipped += 1
            continue
        rows.append((fr.estimates() - theta) / se)
    if skipped:
        warnings.warn(f"{skipped} fits without covariance were skipped", stacklevel=2)
    z = np.array(rows).reshape(len(rows), len(names))
    return {nm: z[:, k] for k, nm in enumerate(names)}


def qq_data(sample: np.ndarray) -> tuple:
    """Normal quantiles (plotting positions ``(k - 0.5) / m``) and the sorted sample."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    m = len(x)
    q = stats.norm.ppf((np.arange(1, m + 1) - 0.5) / m)
    return q, x


def qq_line(sample: np.ndarray) -> tuple:
    """``(slope, intercept)`` of the line through the first and third quartile pairs."""
    x = np.asarray(sample, dtype=np.float64)
    y1, y3 = np.quantile(x, [0.25, 0.75])
    x1, x3 = stats.norm.ppf([0.25, 0.75])
    slope = (y3 - y1) / (x3 - x1)
    return float(slope), float(y1 - slope * x1)


def qq_correlation(sample: np.ndarray) -> float:
    q, x = qq_data(sample)
    return float(np.corrcoef(q, x)[0, 1])


def normality_summary(z: dict) -> dict:
    """Skewness, QQ correlation and QQ slope for each standardized coordinate."""
    out = {}
    for nm, v in z.items():
        slope, icpt = qq_line(v)
        out[nm] = {"skew": float(stats.skew(v)), "qq_corr": qq_correlation(v),
                   "qq_slope": slope, "qq_intercept": icpt}
    return out


# -- relative efficiency ---------------------------------------------------

def are_table(mle_fits: Sequence[FitResult], snap_fits: Sequence[FitResult]) -> dict:
    """``Var(MLE) / Var(snapshot)`` per basic-model coordinate."""
    if len(mle_fits) != len(snap_fits):
        raise ValueError("replication sets must be paired")
    if len(mle_fits) < MIN_REPS_FOR_ARE:
        warnings.warn(f"only {len(mle_fits)} replications; ARE estimates are very noisy",
                      stacklevel=2)
    a = np.array([f.params.vector()[:4] for f in mle_fits])
    b = np.array([f.params.vector()[:4] for f in snap_fits])
    va = np.var(a, axis=0, ddof=1)
    vb = np.var(b, axis=0, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where((va == vb), 1.0, va / vb)
    return dict(zip(BASIC_NAMES, ratio.astype(float)))


# -- sweeps ----------------------------------------------------------------

@dataclass(frozen=True)
class StudyCell:
    n: int
    alpha: float
    beta: float
    delta_in: float
    delta_out: float
    reps: int

    @property
    def params(self) -> Params:
        return Params.basic(self.alpha, self.beta, self.delta_in, self.delta_out)


@dataclass
class StudyRow:
    cell: StudyCell
    mean_mle: np.ndarray
    mean_snapshot: np.ndarray
    are: dict
    failures: int
    errors: list = field(default_factory=list)
    mle_fits: list = field(default_factory=list, repr=False)
    snap_fits: list = field(default_factory=list, repr=False)

    def as_record(self) -> dict:
        rec = {"n": self.cell.n, "alpha": self.cell.alpha, "beta": self.cell.beta,
               "delta_in": self.cell.delta_in, "delta_out": self.cell.delta_out,
               "reps": self.cell.reps, "failures": self.failures}
        for nm, v in zip(BASIC_NAMES, self.mean_mle):
            rec[f"mle_{nm}"] = float(v)
        for nm, v in zip(BASIC_NAMES, self.mean_snapshot):
            rec[f"snap_{nm}"] = float(v)
        for nm, v in self.are.items():
            rec[f"are_{nm}"] = float(v)
        return rec


def cell_rng(seed: int, cell_index: int, rep: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(cell_index, rep))
    return np.random.Generator(np.random.PCG64(ss))


def paired_fits(cell: StudyCell, seed: int = 0, cell_index: int = 0,
                level: Optional[float] = 0.95):
    """Simulate ``cell.reps`` histories and fit each by MLE and from its final snapshot.

    Returns ``(mle_fits, snap_fits, errors)``; a replicate whose snapshot
    fit fails is dropped from both lists.
    """
    cfg = SimConfig(cell.params, cell.n, Snapshot.empty(1), seed)
    mle_fits, snap_fits, errors = [], [], []
    for k in range(cell.reps):
        h = simulate(cfg, rng=cell_rng(seed, cell_index, k))
        try:
            m = fit_mle(h, level=level)
            s = snapshot_fit(h.final_snapshot())
        except (SnapshotError, ValueError, RuntimeError) as e:
            errors.append(f"rep {k}: {e}")
            continue
        mle_fits.append(m)
        snap_fits.append(s)
    return mle_fits, snap_fits, errors


def sensitivity_study(cells: Sequence[StudyCell], seed: int = 0,
                      keep_fits: bool = False) -> list:
    """One row per cell: mean MLE, mean snapshot estimate and ARE.

    Replicate ``k`` of cell ``c`` is driven by ``SeedSequence(seed, spawn_key=(c, k))``,
    so every row is reproducible on its own.
    """
    rows = []
    for c, cell in enumerate(cells):
        mle_fits, snap_fits, errors = paired_fits(cell, seed, c, level=None)
        if not mle_fits:
            rows.append(StudyRow(cell, np.full(4, np.nan), np.full(4, np.nan),
                                 {nm: np.nan for nm in BASIC_NAMES}, len(errors), errors))
            continue
        mean_mle = np.mean([f.params.vector() for f in mle_fits], axis=0)
        mean_snap = np.mean([f.params.vector() for f in snap_fits], axis=0)
        if len(mle_fits) > 1:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                are = are_table(mle_fits, snap_fits)
        else:
            are = {nm: np.nan for nm in BASIC_NAMES}
        row = StudyRow(cell, mean_mle, mean_snap, are, len(errors), errors)
        if keep_fits:
            row.mle_fits, row.snap_fits = mle_fits, snap_fits
        rows.append(row)
    return rows


# -- simulation envelopes --------------------------------------------------

@dataclass
class DegreeEnvelope:
    """Observed and simulated degree frequencies for one direction.

    ``sim_freq[s, k]`` is the fraction of nodes with degree ``k`` in
    simulation ``s`` and ``sim_surv[s, k]`` the fraction with degree
    greater than ``k``; ``lo``/``hi`` are pointwise min/max of the latter.
    """

    degrees: np.ndarray
    observed_freq: np.ndarray
    observed_surv: np.ndarray
    sim_freq: np.ndarray
    sim_surv: np.ndarray

    @property
    def freq_lo(self):
        return self.sim_freq.min(axis=0)

    @property
    def freq_hi(self):
        return self.sim_freq.max(axis=0)

    @property
    def lo(self):
        return self.sim_surv.min(axis=0)

    @property
    def hi(self):
        return self.sim_surv.max(axis=0)

    def inside(self) -> np.ndarray:
        """Per-degree flag: observed survival within the simulated band,
        for degrees up to the observed maximum."""
        top = int(np.flatnonzero(self.observed_freq)[-1]) + 1
        o = self.observed_surv[:top]
        return (o >= self.lo[:top]) & (o <= self.hi[:top])

    def inside_fraction(self) -> float:
        return float(np.mean(self.inside()))

    def freq_inside_fraction(self) -> float:
        """Same check on point frequencies, over degrees observed at least once."""
        k = np.flatnonzero(self.observed_freq)
        o = self.observed_freq[k]
        return float(np.mean((o >= self.freq_lo[k]) & (o <= self.freq_hi[k])))

    def upper_tail_exit(self, level: float = 0.1) -> float:
        """Fraction of upper-tail degrees where the observed survival leaves the band.

        Upper-tail degrees are those up to the observed maximum at which the
        band's upper edge is at most ``level``.
        """
        top = int(np.flatnonzero(self.observed_freq)[-1]) + 1
        k = np.flatnonzero(self.hi[:top] <= level)
        if k.size == 0:
            return 0.0
        o = self.observed_surv[k]
        return float(np.mean((o < self.lo[k]) | (o > self.hi[k])))

    def records(self):
        """Long-format rows ``(source, degree, frequency, survival)``."""
        for k in range(len(self.degrees)):
            yield ("observed", k, float(self.observed_freq[k]), float(self.observed_surv[k]))
        for s in range(self.sim_freq.shape[0]):
            for k in np.flatnonzero(self.sim_freq[s]):
                yield (f"sim{s}", int(k), float(self.sim_freq[s, k]), float(self.sim_surv[s, k]))


@dataclass
class EnvelopeResult:
    params: Params
    n: int
    sims: int
    seed: int
    in_env: DegreeEnvelope
    out_env: DegreeEnvelope


def _freq_surv(degrees, width):
    counts = np.bincount(degrees, minlength=width)[:width].astype(np.float64)
    tot = counts.sum()
    surv = np.zeros(width)
    tails = tail_counts(degrees)
    m = min(width, len(tails))
    surv[:m] = tails[:m]
    return counts / tot, surv / tot


def _envelope(observed_deg, sim_degs):
    width = 1 + max(int(observed_deg.max(initial=0)), *(int(d.max(initial=0)) for d in sim_degs))
    of, os_ = _freq_surv(observed_deg, width)
    pairs = [_freq_surv(d, width) for d in sim_degs]
    return DegreeEnvelope(np.arange(width), of, os_,
                          np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))


def gof_envelope(fitted: Params, n: int, sims: int, observed: Snapshot,
                 seed: int = 0) -> EnvelopeResult:
    """Simulate ``sims`` networks with ``n`` edges at ``fitted`` and compare
    their degree frequencies with ``observed``."""
    if sims < 2:
        raise ValueError("need at least two simulations")
    cfg = SimConfig(fitted, n, Snapshot.empty(1), seed)
    ins, outs = [], []
    for k in range(sims):
        snap = simulate(cfg, rng=cell_rng(seed, 0, k)).final_snapshot()
        ins.append(snap.in_degrees())
        outs.append(snap.out_degrees())
    return EnvelopeResult(fitted, n, sims, seed,
                          _envelope(observed.in_degrees(), ins),
                          _envelope(observed.out_degrees(), outs))


def pooled_inside_fraction(env: EnvelopeResult) -> float:
    """Share of in- and out-degree survival points that fall inside their bands."""
    flags = np.concatenate([env.in_env.inside(), env.out_env.inside()])
    return float(flags.mean())
