"""Run one or more configured experiments and write their reports.

    python scripts/run_experiment.py                      # every config in configs/
    python scripts/run_experiment.py meanfield combined --seed 3 --out runs
"""
import argparse
from pathlib import Path

from vplab.lab.config import load_config
from vplab.lab.experiments import run_experiment

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main(argv=None):
    names = sorted(p.stem for p in CONFIGS.glob("*.toml"))
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help=f"any of {names}; default all")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--out", default="runs")
    a = ap.parse_args(argv)
    unknown = set(a.names) - set(names)
    if unknown:
        ap.error(f"unknown experiments {sorted(unknown)}; choose from {names}")
    failed = []
    for name in a.names or names:
        cfg = load_config(CONFIGS / f"{name}.toml", seed=a.seed, out=a.out)
        rep = run_experiment(cfg)
        out = rep.write(Path(a.out) / name)
        print(f"{name}: {'PASS' if rep.passed else 'FAIL'}  ({rep.wall_clock:.0f} s, {out})")
        for check, c in rep.checks.items():
            print(f"    {'PASS' if c['pass'] else 'FAIL'}  {check}  {c['detail']}")
        if not rep.passed:
            failed.append(name)
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
