import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import small_history
from prefattach.limits import delta_of_eta, eta_interval, eta_of_delta, h_tilde, limit_in_dist
from prefattach.mle import DeltaBracket, fit_mle
from prefattach.model import FitMethod, FitResult, ModelError, Params, Snapshot
from prefattach.simulate import SimConfig, replicate_rng, simulate
from prefattach.snapshot import (SnapshotError, SnapshotMoments, bootstrap_ci, fit_moments,
                                 offset_residual, snapshot_fit, solve_step2)

P = Params(0.3, 0.5, 0.2, 2.0, 1.0)


def exact_moments(p, tail_tol=1e-12):
    """Moments of an infinitely large graph, built from the limiting laws."""
    din = limit_in_dist(p, p.delta_in, tail_tol)
    dout = limit_in_dist(p.mirror(), p.delta_out, tail_tol)
    return SnapshotMoments(math.inf, p.beta, din.tails, dout.tails, din.probs[0],
                           dout.probs[0], din.tail_sum_remainder, dout.tail_sum_remainder)


def test_moment_fields(history_1e4):
    s = history_1e4.final_snapshot()
    m = SnapshotMoments.from_snapshot(s)
    # the tail fractions sum to total degree / n = 1
    assert m.in_tail_frac.sum() == pytest.approx(1.0, abs=1e-12)
    assert m.out_tail_frac.sum() == pytest.approx(1.0, abs=1e-12)
    assert m.beta_tilde == 1 - s.node_count / s.n_edges


def test_beta_outside_unit_interval_warns_and_errors():
    # three isolated-ish edges on six nodes: beta_tilde = 1 - 6/3 < 0
    s = Snapshot(6, np.array([1, 3, 5]), np.array([2, 4, 6]))
    with pytest.warns(UserWarning, match="beta_tilde"):
        m = SnapshotMoments.from_snapshot(s)
    with pytest.raises(SnapshotError, match="beta_tilde"):
        fit_moments(m)
    with pytest.raises(SnapshotError):
        solve_step2(m)


def test_exact_moments_recover_offsets():
    m = exact_moments(P)
    d_in, info = solve_step2(m, "in")
    d_out, _ = solve_step2(m, "out")
    assert abs(d_in - 2.0) < 1e-6
    assert abs(d_out - 1.0) < 1e-6
    assert not info.flagged
    fr = fit_moments(m)
    assert np.allclose(fr.params.vector(), P.vector(), atol=1e-6)


def test_h_tilde_concave_on_interval():
    d = limit_in_dist(P, P.delta_in, 1e-12)
    lo, hi = eta_interval(P.beta, 1e-4, 1e4)
    eta = np.linspace(lo, hi, 50)
    h = h_tilde(eta, P.beta, d.tails, d.probs[0], d.tail_sum_remainder)
    assert np.all(np.diff(h, 2) <= 1e-12)


@given(st.floats(1e-4, 1e4), st.floats(0.01, 0.99))
def test_eta_grid_round_trip(delta, beta):
    assert float(eta_of_delta(delta_of_eta(eta_of_delta(delta, beta), beta), beta)) \
        == pytest.approx(float(eta_of_delta(delta, beta)), rel=1e-12)


def test_post_fit_identities(history_1e4):
    m = SnapshotMoments.from_snapshot(history_1e4.final_snapshot())
    fr = fit_moments(m)
    p = fr.params
    assert p.alpha + p.beta + p.gamma == 1.0
    assert fr.method is FitMethod.SNAPSHOT
    assert abs(offset_residual(p.delta_in, p.alpha, p.beta, m.in_tail_frac)) < 1e-10
    assert abs(offset_residual(p.delta_out, p.gamma, p.beta, m.out_tail_frac)) < 1e-10


@given(st.integers(0, 10_000))
def test_fit_ignores_edge_order(seed):
    h = small_history(P, 2000, seed % 97)
    s = h.final_snapshot()
    perm = np.random.default_rng(seed).permutation(s.n_edges)
    shuffled = Snapshot(s.node_count, s.src[perm], s.dst[perm])
    assert np.array_equal(snapshot_fit(s).estimates(), snapshot_fit(shuffled).estimates())


def test_beta_matches_mle_with_seed_offset(history_1e4):
    # single-node seed: N(n) = 1 + #(new-node steps), so beta_tilde = beta_hat - 1/n
    h = history_1e4
    b_snap = snapshot_fit(h.final_snapshot()).params.beta
    b_mle = fit_mle(h).params.beta
    assert b_snap == pytest.approx(b_mle - 1 / h.n, abs=1e-15)


def test_no_root_raises():
    # no in-degree-zero nodes and all tail mass at degree 1: the moment gap
    # keeps one sign on the whole interval
    m = SnapshotMoments(10.0, 0.5, np.array([1.0, 0.0]), np.array([1.0, 0.0]), 0.0, 0.0)
    with pytest.raises(SnapshotError, match="no root"):
        solve_step2(m)


def test_bootstrap_rejects_boundary_estimate():
    fr = FitResult(Params(0.0, 0.5, 0.5, 1.0, 1.0), FitMethod.SNAPSHOT, 1000)
    with pytest.raises(ModelError, match="alpha"):
        bootstrap_ci(fr, reps=10)


def test_bootstrap_is_deterministic_and_centered():
    fr = snapshot_fit(small_history(P, 3000, 2).final_snapshot())
    a = bootstrap_ci(fr, reps=20, seed=4)
    b = bootstrap_ci(fr, reps=20, seed=4)
    assert np.array_equal(a.estimates, b.estimates)
    assert a.failures == 0 and a.estimates.shape == (20, 4)
    for nm, c in zip(a.names, fr.params.vector()):
        lo, hi = a.intervals[nm]
        assert lo < c < hi
        assert (lo + hi) / 2 == pytest.approx(c, rel=1e-12)


def test_bootstrap_width_matches_efficiency_scaling(history_1e4):
    # snapshot half-widths should be about MLE half-widths / sqrt(ARE),
    # with asymptotic efficiencies near (0.41, 1, 0.39, 0.23)
    h = history_1e4
    mle = fit_mle(h, level=0.95)
    snap = snapshot_fit(h.final_snapshot())
    boot = bootstrap_ci(snap, reps=200, seed=1)
    for nm, are in zip(("alpha", "beta", "delta_in", "delta_out"), (0.41, 1.0, 0.39, 0.23)):
        lo, hi = mle.conf_intervals[nm]
        target = (hi - lo) / 2 / math.sqrt(are)
        blo, bhi = boot.intervals[nm]
        ratio = (bhi - blo) / 2 / target
        assert 0.5 < ratio < 2.0, (nm, ratio)


def test_consistency_drift():
    med = []
    for n in (1_000, 10_000, 100_000):
        cfg = SimConfig(P, n, rng_seed=5)
        err = [abs(snapshot_fit(simulate(cfg, rng=replicate_rng(5, k)).final_snapshot())
                   .params.delta_in - 2) for k in range(50)]
        med.append(np.median(err))
    assert med[0] > med[1] > med[2]


@pytest.mark.slow
def test_step2_band_and_efficiency_at_large_n():
    cfg = SimConfig(P, 100_000, rng_seed=3)
    d0, mle, snap = [], [], []
    for k in range(200):
        h = simulate(cfg, rng=replicate_rng(3, k))
        s = h.final_snapshot()
        d0.append(solve_step2(SnapshotMoments.from_snapshot(s))[0])
        snap.append(snapshot_fit(s).params.vector())
        mle.append(fit_mle(h, level=None).params.vector())
    d0 = np.array(d0)
    assert np.mean((d0 >= 1.8) & (d0 <= 2.2)) >= 0.95
    are = np.var(mle, 0, ddof=1) / np.var(snap, 0, ddof=1)
    for k in (0, 2, 3):
        assert 0.15 < are[k] < 0.55
    assert are[1] == pytest.approx(1.0, abs=1e-12)


def test_custom_bracket_is_respected(history_1e4):
    s = history_1e4.final_snapshot()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fr = snapshot_fit(s, DeltaBracket(1e-3, 100.0))
    assert 1e-3 <= fr.params.delta_in <= 100.0
