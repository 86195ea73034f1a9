"""Edge-list files, scenario reconstruction, broadcast cleaning, windowed
fitting, flat configs and result serialisation.

Edge files are whitespace separated ``src dst [timestamp]`` lines; lines
starting with ``#`` or ``%`` are comments. KONECT rows with four columns
are read as ``src dst weight timestamp``. Header comments of the form
``# key: value`` are collected as metadata; ``seed_node_count`` and
``seed_edge_count`` mark the first edges as the seed graph so that
simulator output round-trips exactly.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
import warnings
from dataclasses import dataclass
from importlib import metadata as _md
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .mle import DeltaBracket, fit_mle
from .model import (FitResult, GrowthHistory, MalformedInputError, Snapshot)


class ParseError(MalformedInputError):
    """A line of an edge file could not be parsed."""


def package_version() -> str:
    try:
        return _md.version("artifact")
    except _md.PackageNotFoundError:
        return "0+unknown"


# -- reading -------------------------------------------------------------

@dataclass
class EdgeFile:
    src: np.ndarray
    dst: np.ndarray
    timestamps: Optional[np.ndarray]
    meta: dict


def _parse_meta(line: str, meta: dict):
    body = line.lstrip("#%").strip()
    if ":" in body:
        k, v = body.split(":", 1)
        k = k.strip()
        if k and " " not in k:
            meta[k] = v.strip()


def parse_edge_lines(lines: Iterable[str], timestamped: bool) -> EdgeFile:
    src, dst, ts = [], [], []
    meta = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line[0] in "#%":
            _parse_meta(line, meta)
            continue
        parts = line.split()
        if len(parts) < 2 or (timestamped and len(parts) < 3):
            need = "src dst timestamp" if timestamped else "src dst"
            raise ParseError(f"line {lineno}: expected '{need}', got {raw.rstrip()!r}")
        try:
            s, d = int(parts[0]), int(parts[1])
            if timestamped:
                t = float(parts[3] if len(parts) >= 4 else parts[2])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric field in {raw.rstrip()!r}") from None
        src.append(s)
        dst.append(d)
        if timestamped:
            ts.append(t)
    return EdgeFile(np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                    np.array(ts) if timestamped else None, meta)


def relabel(src: np.ndarray, dst: np.ndarray, reserved: int = 0) -> tuple:
    """Consecutive ids by first appearance (source before destination).

    Labels ``1..reserved`` are kept as they are. Returns ``(src, dst, node_count)``.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    both = np.column_stack([src, dst]).ravel()
    if both.size == 0:
        return src.copy(), dst.copy(), reserved
    labels, first = np.unique(both, return_index=True)
    keep = (labels >= 1) & (labels <= reserved)
    free = ~keep
    order = np.argsort(first[free], kind="stable")
    new = np.empty(len(labels), dtype=np.int64)
    new[keep] = labels[keep]
    free_idx = np.flatnonzero(free)
    new[free_idx[order]] = reserved + 1 + np.arange(free_idx.size)
    pos = np.searchsorted(labels, both)
    mapped = new[pos].reshape(-1, 2)
    return mapped[:, 0].copy(), mapped[:, 1].copy(), int(reserved + free_idx.size)


def reconstruct_scenarios(src: np.ndarray, dst: np.ndarray, existing: int) -> np.ndarray:
    """Scenario labels for edges whose ids follow creation order.

    Nodes ``1..existing`` exist before the first edge; any other node is
    new on the edge where it first appears, so the label is determined by
    which endpoints are new.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    m = len(src)
    both = np.column_stack([src, dst]).ravel()
    labels, first = np.unique(both, return_index=True)
    first_edge = first // 2
    fe_src = first_edge[np.searchsorted(labels, src)]
    fe_dst = first_edge[np.searchsorted(labels, dst)]
    t = np.arange(m)
    s_new = (fe_src == t) & (src > existing)
    d_new = (fe_dst == t) & (dst > existing)
    sc = np.full(m, 2, dtype=np.int8)
    sc[s_new & ~d_new] = 1
    sc[~s_new & d_new] = 3
    sc[s_new & d_new & (src != dst)] = 4
    sc[s_new & (src == dst)] = 5
    return sc


def build_history(src, dst, timestamps=None, seed_edges: int = 0,
                  seed_nodes: int = 0) -> GrowthHistory:
    """Growth history from an ordered edge list.

    The first ``seed_edges`` edges form the seed graph, which also owns
    labels ``1..seed_nodes`` (isolated seed nodes included). Other ids are
    renumbered by first appearance and scenario labels reconstructed.
    """
    src, dst, _ = relabel(src, dst, reserved=seed_nodes)
    k = int(max(seed_nodes, src[:seed_edges].max(initial=0), dst[:seed_edges].max(initial=0)))
    seed = Snapshot(k, src[:seed_edges], dst[:seed_edges])
    hs, hd = src[seed_edges:], dst[seed_edges:]
    sc = reconstruct_scenarios(hs, hd, k)
    ts = None if timestamps is None else np.asarray(timestamps)[seed_edges:]
    if ts is not None and np.all(ts == np.round(ts)):
        ts = ts.astype(np.int64)
    return GrowthHistory(seed, hs, hd, sc, ts)


def read_edge_list(path: Union[str, Path], format: str = "plain"):
    """Read an edge file as a ``Snapshot`` (``format="plain"``) or an
    edge-ordered ``GrowthHistory`` with reconstructed scenario labels
    (``format="timestamped"``)."""
    if format not in ("plain", "timestamped"):
        raise ValueError("format must be 'plain' or 'timestamped'")
    with open(path) as fh:
        ef = parse_edge_lines(fh, format == "timestamped")
    if format == "plain":
        s, d, nc = relabel(ef.src, ef.dst, int(ef.meta.get("seed_node_count", 0)))
        return Snapshot(nc, s, d)
    order = np.argsort(ef.timestamps, kind="stable")
    if np.any(np.diff(ef.timestamps) < 0):
        warnings.warn("timestamps are not monotone; edges were stably re-sorted",
                      stacklevel=2)
    return build_history(ef.src[order], ef.dst[order], ef.timestamps[order],
                         seed_edges=int(ef.meta.get("seed_edge_count", 0)),
                         seed_nodes=int(ef.meta.get("seed_node_count", 0)))


def read_metadata(path: Union[str, Path]) -> dict:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if line.startswith(("#", "%")):
                _parse_meta(line, meta)
            elif line.strip():
                break
    return meta


# -- writing -------------------------------------------------------------

def _header(fh, meta: Optional[dict]):
    for k, v in (meta or {}).items():
        fh.write(f"# {k}: {v}\n")


def write_edge_list(path: Union[str, Path], obj, meta: Optional[dict] = None):
    """Write a ``Snapshot`` as ``src dst`` or a ``GrowthHistory`` as
    ``src dst timestamp`` (seed edges first, with timestamp 0)."""
    meta = dict(meta or {})
    meta.setdefault("version", package_version())
    with open(path, "w") as fh:
        if isinstance(obj, Snapshot):
            meta.setdefault("seed_node_count", obj.node_count)
            _header(fh, meta)
            np.savetxt(fh, np.column_stack([obj.src, obj.dst]), fmt="%d")
            return
        h: GrowthHistory = obj
        meta["seed_node_count"] = h.seed.node_count
        meta["seed_edge_count"] = h.n0
        _header(fh, meta)
        ts = h.timestamps if h.timestamps is not None else np.arange(h.n0 + 1, h.n + 1)
        src = np.concatenate([h.seed.src, h.src])
        dst = np.concatenate([h.seed.dst, h.dst])
        t = np.concatenate([np.zeros(h.n0, dtype=np.int64), np.asarray(ts, dtype=np.int64)])
        np.savetxt(fh, np.column_stack([src, dst, t]), fmt="%d")


def write_json(path: Union[str, Path], obj: dict):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=False)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def write_csv(path: Union[str, Path], rows: list, columns: Optional[list] = None):
    """CSV with a header row; ``rows`` are dicts or sequences."""
    rows = list(rows)
    with open(path, "w", newline="") as fh:
        if rows and isinstance(rows[0], dict):
            cols = columns or list(rows[0].keys())
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            w.writerows(rows)
        else:
            w = csv.writer(fh)
            if columns:
                w.writerow(columns)
            w.writerows(rows)


def read_csv(path: Union[str, Path]) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def fit_to_json(fr: FitResult, meta: Optional[dict] = None) -> dict:
    d = fr.to_dict()
    d["meta"] = {"version": package_version(), **(meta or {})}
    return d


def fit_from_json(path: Union[str, Path]) -> FitResult:
    with open(path) as fh:
        return FitResult.from_dict(json.load(fh))


# -- broadcast cleaning --------------------------------------------------

def source_runs(src: np.ndarray) -> tuple:
    """``(sources, lengths)`` of maximal runs of equal consecutive sources."""
    src = np.asarray(src)
    if src.size == 0:
        return src[:0], np.zeros(0, dtype=np.int64)
    starts = np.r_[0, np.flatnonzero(src[1:] != src[:-1]) + 1]
    lengths = np.diff(np.r_[starts, src.size])
    return src[starts], lengths


def broadcast_accounts(src: np.ndarray, run_threshold: int = 40) -> np.ndarray:
    """Sources with at least one run of ``run_threshold`` or more consecutive edges."""
    s, ln = source_runs(src)
    return np.unique(s[ln >= run_threshold])


@dataclass
class CleanResult:
    history: GrowthHistory
    removed_accounts: np.ndarray  # ids in the input history
    removed_edge_count: int
    rounds: int


def clean_broadcasts(h: GrowthHistory, run_threshold: int = 40) -> CleanResult:
    """Drop every edge sent by a broadcast account, then isolated nodes.

    Removing one account can join the runs of another account that were
    separated by it, so detection is repeated until no run reaches the
    threshold; the result is therefore idempotent.
    """
    src = np.concatenate([h.seed.src, h.src])
    dst = np.concatenate([h.seed.dst, h.dst])
    ts = None
    if h.timestamps is not None:
        ts = np.concatenate([np.zeros(h.n0, dtype=np.asarray(h.timestamps).dtype), h.timestamps])
    is_seed = np.arange(len(src)) < h.n0
    removed = np.zeros(0, dtype=np.int64)
    rounds = 0
    keep = np.ones(len(src), dtype=bool)
    while True:
        acc = broadcast_accounts(src[keep], run_threshold)
        if acc.size == 0:
            break
        rounds += 1
        removed = np.union1d(removed, acc)
        keep &= ~np.isin(src, acc)
    if rounds == 0:
        return CleanResult(h, removed, 0, 0)
    n_seed = int(np.sum(is_seed & keep))
    out = build_history(src[keep], dst[keep], None if ts is None else ts[keep],
                        seed_edges=n_seed, seed_nodes=0)
    return CleanResult(out, removed, int(np.sum(~keep)), rounds)


# -- windows -------------------------------------------------------------

@dataclass
class WindowFit:
    index: int
    start: int  # first history step of the window
    stop: int
    fit: FitResult

    def record(self) -> dict:
        p = self.fit.params
        rec = {"window": self.index, "start": self.start, "stop": self.stop}
        rec.update({k: p.to_dict()[k] for k in
                    ("delta_in", "delta_out", "alpha", "beta", "gamma", "xi", "rho")})
        return rec


def windowed_fit(h: GrowthHistory, window_edges: int = 10_000,
                 bracket: DeltaBracket = DeltaBracket(),
                 level: Optional[float] = 0.95) -> list:
    """MLE on consecutive blocks of ``window_edges`` history edges.

    Each block is fitted with the graph at its start as the seed, using the
    seed-corrected statistics. A trailing partial block is skipped.
    """
    if window_edges < 1:
        raise ValueError("window_edges must be positive")
    count = h.n_steps // window_edges
    if count < 1:
        raise ValueError(f"history has {h.n_steps} steps, fewer than one window")
    if h.n_steps % window_edges:
        warnings.warn(f"skipping the trailing {h.n_steps % window_edges} edges "
                      "that do not fill a window", stacklevel=2)
    out = []
    for k in range(count):
        a, b = k * window_edges, (k + 1) * window_edges
        out.append(WindowFit(k, a, b, fit_mle(h.window(a, b), bracket, level=level)))
    return out


# -- flat configs --------------------------------------------------------

def _scalar(v: str):
    v = v.strip()
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    if v.lower() in ("true", "false"):
        return v.lower() == "true"
    return v


def parse_config(text: str) -> dict:
    """``key = value`` lines; ``#`` comments; comma-separated values become lists."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"config line {lineno}: expected 'key = value'")
        k, v = (x.strip() for x in line.split("=", 1))
        if not k:
            raise ParseError(f"config line {lineno}: empty key")
        cfg[k] = [_scalar(x) for x in v.split(",")] if "," in v else _scalar(v)
    return cfg


def read_config(path: Union[str, Path]) -> dict:
    with open(path) as fh:
        return parse_config(fh.read())


def expand_grid(cfg: dict, keys: Iterable[str]) -> list:
    """Cartesian product over the list-valued entries among ``keys``."""
    keys = list(keys)
    vals = [cfg[k] if isinstance(cfg[k], list) else [cfg[k]] for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*vals)]
