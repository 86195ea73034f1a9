"""The same comparison over a grid of (alpha, beta) at n = 10^4."""
import argparse

from prefattach.dataio import write_csv
from prefattach.experiments import StudyCell, sensitivity_study

GRID = [(0.001, 0.99), (0.1, 0.8), (0.3, 0.5), (0.5, 0.3), (0.7, 0.2), (0.8, 0.1)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="sweep_alpha_beta.csv")
    a = ap.parse_args()
    cells = [StudyCell(a.n, al, be, 2.0, 1.0, a.reps) for al, be in GRID]
    rows = sensitivity_study(cells, seed=a.seed)
    write_csv(a.out, [r.as_record() for r in rows])
    for r in rows:
        c = r.cell
        print(f"({c.alpha}, {c.beta})  failures={r.failures}  "
              + "  ".join(f"are_{k}={v:.3f}" for k, v in r.are.items()))


if __name__ == "__main__":
    main()
