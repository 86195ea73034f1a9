"""Command-line interface.

Exit status: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import dataio
from .experiments import StudyCell, gof_envelope, pooled_inside_fraction, sensitivity_study
from .limits import TruncationError, fisher_in, fisher_out, limit_in_dist, limit_out_dist
from .mle import BracketError, DeltaBracket, fit_mle
from .model import (HistoryIncompleteError, MalformedInputError, ModelError, Params,
                    power_law_indices)
from .simulate import RNG_ALGORITHM, SimConfig, simulate
from .snapshot import SnapshotError, bootstrap_ci, bootstrap_mle_ci, snapshot_fit

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_params(p, required=True):
    p.add_argument("--alpha", type=float, required=required)
    p.add_argument("--beta", type=float, required=required)
    p.add_argument("--gamma", type=float, default=None,
                   help="defaults to 1 - alpha - beta - xi - rho")
    p.add_argument("--xi", type=float, default=0.0)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--delta-in", type=float, required=required)
    p.add_argument("--delta-out", type=float, required=required)


def _params(a) -> Params:
    gamma = a.gamma if a.gamma is not None else 1.0 - a.alpha - a.beta - a.xi - a.rho
    return Params(a.alpha, a.beta, gamma, a.delta_in, a.delta_out, xi=a.xi, rho=a.rho)


def _add_bracket(p):
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--K", type=float, default=1e4)


def _meta(**kw) -> dict:
    return {"version": dataio.package_version(), "rng": RNG_ALGORITHM, **kw}


def _emit(obj: dict, out):
    if out is None:
        json.dump(dataio._jsonable(obj), sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        dataio.write_json(out, obj)


def _write_meta_sidecar(out, meta):
    dataio.write_json(str(out) + ".meta.json", meta)


def cmd_simulate(a):
    p = _params(a)
    h = simulate(SimConfig(p, a.n, rng_seed=a.seed))
    meta = _meta(seed=a.seed, n=a.n, params=json.dumps(p.to_dict()))
    dataio.write_edge_list(a.out, h, meta)
    return EXIT_OK


def cmd_fit_mle(a):
    h = dataio.read_edge_list(a.input, "timestamped")
    fr = fit_mle(h, DeltaBracket(a.epsilon, a.K), level=a.level, corrected=not a.uncorrected)
    out = dataio.fit_to_json(fr, {"input": str(a.input), "seed": a.seed})
    if a.bootstrap:
        b = bootstrap_mle_ci(fr, a.bootstrap, level=a.level, seed=a.seed,
                             bracket=DeltaBracket(a.epsilon, a.K))
        out["bootstrap"] = {"reps": b.reps, "failures": b.failures,
                            "intervals": b.intervals}
    _emit(out, a.out)
    return EXIT_OK


def _read_any(path):
    meta = dataio.read_metadata(path)
    if "seed_edge_count" in meta:
        return dataio.read_edge_list(path, "timestamped").final_snapshot()
    return dataio.read_edge_list(path, "plain")


def cmd_fit_snapshot(a):
    s = _read_any(a.input)
    fr = snapshot_fit(s, DeltaBracket(a.epsilon, a.K))
    out = dataio.fit_to_json(fr, {"input": str(a.input), "seed": a.seed})
    if a.bootstrap:
        b = bootstrap_ci(fr, a.bootstrap, n=a.boot_n, level=a.level, seed=a.seed,
                         bracket=DeltaBracket(a.epsilon, a.K))
        out["level"] = a.level
        out["conf_intervals"] = b.intervals
        out["bootstrap"] = {"reps": b.reps, "failures": b.failures,
                            "variances": b.variances()}
    _emit(out, a.out)
    return EXIT_OK


def cmd_gof(a):
    fr = dataio.fit_from_json(a.fit)
    observed = _read_any(a.observed)
    n = a.n or observed.n_edges
    env = gof_envelope(fr.params, n, a.sims, observed, seed=a.seed)
    rows = []
    for direction, e in (("in", env.in_env), ("out", env.out_env)):
        for src, k, f, sv in e.records():
            rows.append({"direction": direction, "source": src, "degree": k,
                         "frequency": f, "survival": sv})
        for k in range(len(e.degrees)):
            rows.append({"direction": direction, "source": "band_min", "degree": k,
                         "frequency": float(e.freq_lo[k]), "survival": float(e.lo[k])})
            rows.append({"direction": direction, "source": "band_max", "degree": k,
                         "frequency": float(e.freq_hi[k]), "survival": float(e.hi[k])})
    dataio.write_csv(a.out, rows)
    summary = _meta(seed=a.seed, sims=a.sims, n=n, params=fr.params.to_dict(),
                    inside_in=env.in_env.inside_fraction(),
                    inside_out=env.out_env.inside_fraction(),
                    inside_pooled=pooled_inside_fraction(env))
    _write_meta_sidecar(a.out, summary)
    return EXIT_OK


STUDY_KEYS = ("n", "alpha", "beta", "delta_in", "delta_out", "reps")


def cmd_study(a):
    cfg = dataio.read_config(a.config)
    missing = [k for k in STUDY_KEYS if k not in cfg]
    if missing:
        raise UsageError(f"config lacks {', '.join(missing)}")
    seed = int(cfg.get("seed", a.seed))
    cells = [StudyCell(int(g["n"]), float(g["alpha"]), float(g["beta"]),
                       float(g["delta_in"]), float(g["delta_out"]), int(g["reps"]))
             for g in dataio.expand_grid(cfg, STUDY_KEYS)]
    rows = sensitivity_study(cells, seed=seed)
    out = Path(a.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataio.write_csv(out / "study.csv", [r.as_record() for r in rows])
    _write_meta_sidecar(out / "study.csv", _meta(seed=seed, config=cfg))
    return EXIT_OK


def cmd_clean(a):
    h = dataio.read_edge_list(a.input, "timestamped")
    res = dataio.clean_broadcasts(h, a.threshold)
    dataio.write_edge_list(a.out, res.history,
                           {"source": str(a.input), "run_threshold": a.threshold})
    _emit(_meta(removed_accounts=len(res.removed_accounts),
                removed_edges=res.removed_edge_count,
                nodes=res.history.node_count, edges=res.history.n), None)
    return EXIT_OK


def cmd_windows(a):
    h = dataio.read_edge_list(a.input, "timestamped")
    fits = dataio.windowed_fit(h, a.window, DeltaBracket(a.epsilon, a.K), level=None)
    dataio.write_csv(a.out, [w.record() for w in fits])
    _write_meta_sidecar(a.out, _meta(input=str(a.input), window=a.window))
    return EXIT_OK


def cmd_limits(a):
    p = _params(a)
    d_in = limit_in_dist(p, p.delta_in, a.tail_tol)
    d_out = limit_out_dist(p, p.delta_out, a.tail_tol)
    i_in, i_out = power_law_indices(p)
    out = _meta(params=p.to_dict(), tail_tol=a.tail_tol, iota_in=i_in, iota_out=i_out,
                p_in_0=float(d_in.probs[0]), p_out_0=float(d_out.probs[0]),
                fisher_in=fisher_in(p, a.tail_tol), fisher_out=fisher_out(p, a.tail_tol),
                in_terms=d_in.i_max + 1, out_terms=d_out.i_max + 1)
    _emit(out, a.out)
    if a.probs_out:
        m = min(a.max_degree + 1, len(d_in.probs))
        rows = [{"degree": i, "p_in": float(d_in.probs[i]), "p_in_tail": float(d_in.tails[i]),
                 "p_out": float(d_out.probs[i]) if i < len(d_out.probs) else 0.0,
                 "p_out_tail": float(d_out.tails[i]) if i < len(d_out.tails) else 0.0}
                for i in range(m)]
        dataio.write_csv(a.probs_out, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="prefattach", description="Directed preferential attachment: "
                 "simulation, estimation and goodness of fit.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a growth history to an edge file")
    _add_params(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit-mle", help="full-history MLE from a timestamped edge file")
    p.add_argument("--input", required=True)
    _add_bracket(p)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--uncorrected", action="store_true",
                   help="ignore the seed graph's tail counts")
    p.add_argument("--bootstrap", type=int, default=0, help="bootstrap replicates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit_mle)

    p = sub.add_parser("fit-snapshot", help="snapshot estimate from an edge file")
    p.add_argument("--input", required=True)
    _add_bracket(p)
    p.add_argument("--bootstrap", type=int, default=0)
    p.add_argument("--boot-n", type=int, default=None)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit_snapshot)

    p = sub.add_parser("gof", help="simulation envelope for degree frequencies")
    p.add_argument("--fit", required=True, help="fit JSON")
    p.add_argument("--observed", required=True, help="edge file")
    p.add_argument("--sims", type=int, default=20)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("study", help="MLE versus snapshot sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("clean", help="remove broadcast accounts")
    p.add_argument("--input", required=True)
    p.add_argument("--threshold", type=int, default=40)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("windows", help="MLE per block of edges")
    p.add_argument("--input", required=True)
    p.add_argument("--window", type=int, default=10_000)
    _add_bracket(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("limits", help="limiting degree laws and tail indices")
    _add_params(p)
    p.add_argument("--tail-tol", type=float, default=1e-12)
    p.add_argument("--out")
    p.add_argument("--probs-out", help="CSV of limiting probabilities")
    p.add_argument("--max-degree", type=int, default=1000)
    p.set_defaults(func=cmd_limits)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as e:
        print(f"invalid parameters: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (MalformedInputError, HistoryIncompleteError, FileNotFoundError,
            IsADirectoryError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (BracketError, SnapshotError, TruncationError, FloatingPointError,
            RuntimeError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
