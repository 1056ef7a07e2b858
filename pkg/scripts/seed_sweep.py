"""Repeat a configured trend experiment over several master seeds and tabulate
the median curve and the pass/fail of its monotonicity check per seed.

    python scripts/seed_sweep.py combined --seeds 1 2 3 4 5
"""
import argparse
from pathlib import Path

from vplab.io import write_csv
from vplab.lab.config import load_config
from vplab.lab.experiments import run_experiment

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
MEDIAN_COLUMN = {"meanfield": 1, "combined": 2}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("name", choices=sorted(MEDIAN_COLUMN))
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--out", default="runs")
    a = ap.parse_args(argv)
    rows = []
    for seed in a.seeds:
        rep = run_experiment(load_config(CONFIGS / f"{a.name}.toml", seed=seed))
        summary = rep.tables["summary"]["rows"]
        med = [r[MEDIAN_COLUMN[a.name]] for r in summary]
        ok = rep.checks["decreasing_in_N"]["pass"]
        rows.append([seed, int(ok)] + med)
        print(seed, "PASS" if ok else "FAIL", " ".join(f"{m:.5f}" for m in med), flush=True)
    header = ["seed", "decreasing"] + [f"N={r[0]}" for r in summary]
    write_csv(Path(a.out) / f"{a.name}_seed_sweep.csv", header, rows)


if __name__ == "__main__":
    main()
