"""Directed linear preferential attachment: simulation, full-history MLE,
snapshot estimation, limiting degree laws and simulation studies."""
from .limits import (LimitInDist, TruncationError, fisher_in, fisher_out, limit_in_dist,
                     limit_out_dist, psi)
from .mle import (BracketError, DeltaBracket, SufficientStats, confidence_intervals,
                  fisher_information, fit_mle, log_likelihood, mle_delta,
                  mle_scenario_probs, score_delta_in, score_delta_out, sufficient_stats)
from .model import (DegreeStats, FitMethod, FitResult, GrowthHistory, HistoryIncompleteError,
                    MalformedInputError, ModelError, Params, Scenario, Snapshot,
                    degree_stats_from_snapshot, power_law_indices)
from .simulate import SimConfig, node_sample, replicate, simulate
from .snapshot import (SnapshotError, SnapshotMoments, bootstrap_ci, bootstrap_mle_ci,
                       snapshot_fit, solve_step2)

__all__ = [
    "BracketError", "DeltaBracket", "DegreeStats", "FitMethod", "FitResult",
    "GrowthHistory", "HistoryIncompleteError", "LimitInDist", "MalformedInputError",
    "ModelError", "Params", "Scenario", "SimConfig", "Snapshot", "SnapshotError",
    "SnapshotMoments", "SufficientStats", "TruncationError", "bootstrap_ci",
    "bootstrap_mle_ci", "confidence_intervals", "degree_stats_from_snapshot",
    "fisher_in", "fisher_information", "fisher_out", "fit_mle", "limit_in_dist",
    "limit_out_dist", "log_likelihood", "mle_delta", "mle_scenario_probs", "node_sample",
    "power_law_indices", "psi", "replicate", "score_delta_in", "score_delta_out",
    "simulate", "snapshot_fit", "solve_step2", "sufficient_stats",
]
