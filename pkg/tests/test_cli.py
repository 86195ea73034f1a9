import json

import numpy as np
import pytest

from prefattach.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from prefattach.dataio import read_csv, read_edge_list, read_metadata

THETA_ARGS = ["--alpha", "0.3", "--beta", "0.5", "--delta-in", "2", "--delta-out", "1"]


def run_json(argv, capsys):
    assert main(argv) == EXIT_OK
    return json.loads(capsys.readouterr().out)


def test_limits_output(capsys):
    out = run_json(["limits", *THETA_ARGS, "--tail-tol", "1e-10"], capsys)
    assert out["iota_in"] == pytest.approx(3.5, abs=1e-12)
    # 1 + (1 + delta_out (alpha + gamma)) / (beta + gamma)
    assert out["iota_out"] == pytest.approx(1 + 1.5 / 0.7, abs=1e-12)
    assert out["p_in_0"] == pytest.approx(1 / 6, rel=1e-13)
    assert "version" in out and out["params"]["gamma"] == pytest.approx(0.2)


def test_limits_probability_table(tmp_path, capsys):
    assert main(["limits", *THETA_ARGS, "--out", str(tmp_path / "l.json"),
                 "--probs-out", str(tmp_path / "p.csv"), "--max-degree", "50"]) == EXIT_OK
    rows = read_csv(tmp_path / "p.csv")
    assert len(rows) == 51
    assert float(rows[0]["p_in"]) == pytest.approx(1 / 6, rel=1e-12)


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["simulate", "--alpha", "0.3"]) == EXIT_USAGE
    assert main(["limits", "--alpha", "0.8", "--beta", "0.5", "--delta-in", "1",
                 "--delta-out", "1"]) == EXIT_USAGE
    assert main(["--help"]) == EXIT_OK


def test_data_errors(tmp_path, capsys):
    assert main(["fit-mle", "--input", str(tmp_path / "missing.txt")]) == EXIT_DATA
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 1\n2 zz 2\n")
    assert main(["fit-mle", "--input", str(bad)]) == EXIT_DATA
    assert "line 2" in capsys.readouterr().err


def test_numerical_failure(tmp_path, capsys):
    # four nodes, two edges: beta_tilde < 0 has no snapshot solution
    f = tmp_path / "sparse.txt"
    f.write_text("1 2\n3 4\n")
    with pytest.warns(UserWarning):
        assert main(["fit-snapshot", "--input", str(f)]) == EXIT_NUMERIC


def test_snapshot_fit_ignores_edge_order(tmp_path, capsys):
    sim = tmp_path / "h.txt"
    assert main(["simulate", *THETA_ARGS, "--n", "5000", "--seed", "3", "--out", str(sim)]) == 0
    s = read_edge_list(sim, "timestamped").final_snapshot()
    perm = np.random.default_rng(0).permutation(s.n_edges)
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    np.savetxt(a, np.column_stack([s.src, s.dst]), fmt="%d")
    np.savetxt(b, np.column_stack([s.src[perm], s.dst[perm]]), fmt="%d")
    ja, jb = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["fit-snapshot", "--input", str(a), "--out", str(ja)]) == 0
    assert main(["fit-snapshot", "--input", str(b), "--out", str(jb)]) == 0
    pa, pb = json.loads(ja.read_text()), json.loads(jb.read_text())
    assert pa["params"] == pb["params"]


def test_simulate_then_fit_recovers_truth(tmp_path, capsys):
    sim = tmp_path / "h.txt"
    assert main(["simulate", *THETA_ARGS, "--n", "100000", "--seed", "5",
                 "--out", str(sim)]) == 0
    meta = read_metadata(sim)
    assert meta["seed"] == "5" and "version" in meta and "params" in meta
    out = run_json(["fit-mle", "--input", str(sim)], capsys)
    truth = {"alpha": 0.3, "beta": 0.5, "delta_in": 2.0, "delta_out": 1.0}
    for nm, v in truth.items():
        lo, hi = out["conf_intervals"][nm]
        assert lo <= v <= hi, nm


def test_fit_snapshot_bootstrap_and_gof(tmp_path, capsys):
    sim = tmp_path / "h.txt"
    main(["simulate", *THETA_ARGS, "--n", "3000", "--seed", "1", "--out", str(sim)])
    fit = tmp_path / "fit.json"
    assert main(["fit-snapshot", "--input", str(sim), "--bootstrap", "20",
                 "--out", str(fit)]) == 0
    d = json.loads(fit.read_text())
    assert set(d["conf_intervals"]) == {"alpha", "beta", "delta_in", "delta_out"}
    assert d["bootstrap"]["reps"] == 20
    env = tmp_path / "env.csv"
    assert main(["gof", "--fit", str(fit), "--observed", str(sim), "--sims", "4",
                 "--out", str(env)]) == 0
    rows = read_csv(env)
    assert {r["source"] for r in rows} >= {"observed", "band_min", "band_max", "sim3"}
    side = json.loads((tmp_path / "env.csv.meta.json").read_text())
    assert side["sims"] == 4 and 0 <= side["inside_pooled"] <= 1


def test_clean_and_windows(tmp_path, capsys):
    sim = tmp_path / "h.txt"
    main(["simulate", *THETA_ARGS, "--n", "4000", "--seed", "2", "--out", str(sim)])
    lines = sim.read_text().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    # append a 60-edge burst from node 1 to existing nodes
    burst = [f"1 {k} {4000 + k}" for k in range(2, 62)]
    noisy = tmp_path / "noisy.txt"
    noisy.write_text("\n".join(body + burst) + "\n")
    cleaned = tmp_path / "clean.txt"
    summary = run_json(["clean", "--input", str(noisy), "--out", str(cleaned)], capsys)
    assert summary["removed_accounts"] == 1 and summary["removed_edges"] >= 60
    win = tmp_path / "w.csv"
    with pytest.warns(UserWarning, match="trailing"):
        assert main(["windows", "--input", str(sim), "--window", "1500",
                     "--out", str(win)]) == 0
    rows = read_csv(win)
    assert len(rows) == 2 and set(rows[0]) >= {"delta_in", "alpha", "xi", "rho"}


def test_study_command(tmp_path, capsys):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("n = 1000\nalpha = 0.3, 0.4\nbeta = 0.5\ndelta_in = 2\n"
                   "delta_out = 1\nreps = 2\nseed = 4\n")
    assert main(["study", "--config", str(cfg), "--out-dir", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "study.csv")
    assert [r["alpha"] for r in rows] == ["0.3", "0.4"]
    bad = tmp_path / "bad.cfg"
    bad.write_text("n = 1000\n")
    assert main(["study", "--config", str(bad), "--out-dir", str(tmp_path / "o")]) == 1
