"""Command-line interface: vplab <subcommand> [options].

Subcommands: kernel, simulate, vlasov, distance, corrector, regime, experiment, lemmas.
Common flags: --config <toml>, --seed <u64>, --out <dir>, --force.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import io
from ..correctors import corrector_init
from ..errors import DomainError, VplabError
from ..families import InitialDensity
from ..kernels import MollifierSpec, mollified_force_table, mollified_green_table
from ..particles import make_force, regularized_energy, run_particles, sample_initial
from ..regimes import RegimeParams, regime_report, require_admissible
from ..transport import WeightedPointCloud, wasserstein_discrete
from ..vlasov import PhaseSpaceGrid, run_vp
from .config import EXPERIMENTS, config_from_dict, load_config
from .experiments import run_experiment, run_lemma_suite
from .report import RunReport, code_version


def _common(p):
    p.add_argument("--config", help="flat TOML config file")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--force", action="store_true",
                   help="run even if the regime verdict is negative (recorded)")


def _family_args(p):
    p.add_argument("--family", default="bump", choices=["bump", "uniform", "monokinetic"])
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--vwidth", type=float, default=0.5)
    p.add_argument("--mode", type=int, default=1)


def _family(a):
    return InitialDensity(a.family, 1, a.amplitude, a.mode, a.vwidth)


def build_parser():
    ap = argparse.ArgumentParser(prog="vplab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("kernel", help="export a mollified force or Green table")
    _common(p)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--M", type=int, default=256)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--r", type=float, default=1 / 32)
    p.add_argument("--kind", choices=["force", "green"], default="force")
    p.add_argument("--format", choices=["npz", "csv"], default="npz")

    p = sub.add_parser("simulate", help="regularized N-particle run (d = 1)")
    _common(p)
    _family_args(p)
    p.add_argument("--N", type=int, default=256)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--r", type=float, default=1 / 32)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--M", type=int, default=256, help="kernel grid")
    p.add_argument("--method", choices=["direct", "pic", "spectral", "exact1d"], default="pic")
    p.add_argument("--snapshot-every", type=float, default=0.1)

    p = sub.add_parser("vlasov", help="semi-Lagrangian PDE run (1D)")
    _common(p)
    _family_args(p)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--dt", type=float)
    p.add_argument("--Mx", type=int, default=128)
    p.add_argument("--Mv", type=int, default=192)
    p.add_argument("--vmax", type=float, default=1.5)
    p.add_argument("--snapshot-every", type=float, default=0.1)

    p = sub.add_parser("distance", help="W_p between two point-cloud CSV files")
    _common(p)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--p", type=float, default=2)
    p.add_argument("--metric", choices=["euclidean", "torus"], default="euclidean")
    p.add_argument("--d", type=int, default=1)

    p = sub.add_parser("corrector", help="export d+ and R at time t")
    _common(p)
    _family_args(p)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--Mx", type=int, default=128)
    p.add_argument("--Mv", type=int, default=192)
    p.add_argument("--vmax", type=float, default=1.5)
    p.add_argument("--frequency", choices=["eps", "sqrt_eps"], default="eps")

    p = sub.add_parser("regime", help="schedules, bounds and verdict as JSON")
    _common(p)
    for name in ("eps", "r", "gamma", "delta", "C", "C_T", "A", "A_T", "T", "alpha"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--N", type=int)

    p = sub.add_parser("experiment", help="run a configured experiment")
    _common(p)
    p.add_argument("name", nargs="?", choices=EXPERIMENTS)

    p = sub.add_parser("lemmas", help="randomized lemma suite")
    _common(p)
    p.add_argument("--trials", type=int, default=1000)
    return ap


def _need_seed(a):
    if a.seed is None:
        raise DomainError("--seed is mandatory for this subcommand")
    return a.seed


def _meta(a, out, **extra):
    rec = {"command": a.cmd, "args": {k: v for k, v in vars(a).items()},
           "version": code_version(), **extra}
    io.write_json(Path(out) / "run.json", rec)


def cmd_kernel(a):
    spec = MollifierSpec(a.r)
    build = mollified_force_table if a.kind == "force" else mollified_green_table
    tab = build(spec, a.eps, a.M, a.d)
    path = Path(a.out) / f"{a.kind}_table.{a.format}"
    io.export_kernel(tab, path)
    _meta(a, a.out)
    return path


def cmd_simulate(a):
    seed = _need_seed(a)
    fam = _family(a)
    rp = RegimeParams(eps=a.eps, r=a.r, N=a.N, T=a.T)
    v = require_admissible(rp, a.force)
    ens = sample_initial(fam, a.N, seed, a.eps, a.r)
    if a.method == "exact1d":
        force, energy_fn = make_force("exact1d"), None
    else:
        force = make_force(a.method, mollified_force_table(MollifierSpec(a.r), a.eps, a.M))
        gt = mollified_green_table(MollifierSpec(a.r), a.eps, a.M)
        energy_fn = lambda e: regularized_energy(e, gt)  # noqa: E731
    run = run_particles(ens, a.dt, a.T, force, a.snapshot_every, energy_fn)
    io.export_trajectory(run, Path(a.out) / "trajectory.csv")
    if run.energies:
        io.export_energy(run.energies, Path(a.out) / "energy.csv")
    _meta(a, a.out, verdict=v, steps=run.steps)


def cmd_vlasov(a):
    fam = _family(a)
    r = a.r if a.r > 0 else None
    f0 = PhaseSpaceGrid.from_family(fam, a.Mx, a.Mv, a.vmax, a.eps, r)
    run = run_vp(f0, a.eps, r, a.T, a.dt, a.snapshot_every)
    io.export_field(run, Path(a.out) / "field.csv")
    io.export_snapshots(run, Path(a.out) / "snapshots.npz")
    io.write_csv(Path(a.out) / "diagnostics.csv", ["t", "energy", "mass"],
                 zip(run.field_times, run.energy, run.mass))
    _meta(a, a.out, steps=run.steps, clipped=run.clipped)


def _read_cloud(path, d):
    header, rows = io.read_csv(path)
    arr = np.array(rows, dtype=float)
    w = arr[:, 2 * d] if arr.shape[1] > 2 * d else None
    return WeightedPointCloud(arr[:, :2 * d], None if w is None else w / w.sum(), d)


def cmd_distance(a):
    mu, nu = _read_cloud(a.a, a.d), _read_cloud(a.b, a.d)
    val, plan = wasserstein_discrete(mu, nu, a.p, a.metric)
    io.export_plan(plan, Path(a.out) / "plan.csv")
    rec = {"W": val, "p": a.p, "metric": a.metric, "K_a": mu.K, "K_b": nu.K}
    io.write_json(Path(a.out) / "distance.json", rec)
    print(f"W_{a.p:g} = {val:.12g}")
    return val


def cmd_corrector(a):
    fam = _family(a)
    f0 = PhaseSpaceGrid.from_family(fam, a.Mx, a.Mv, a.vmax, a.eps)
    st = corrector_init(f0, a.eps, frequency=a.frequency)
    g = io.export_corrector(st, a.t, Path(a.out) / "corrector.csv")
    _meta(a, a.out, grad_R_sup=g)


def cmd_regime(a):
    flat = {}
    kw = {k: getattr(a, k) for k in ("eps", "r", "gamma", "delta", "C", "C_T", "A", "A_T",
                                     "T", "alpha", "d", "N") if getattr(a, k) is not None}
    if a.config:
        from .config import tomllib
        with open(a.config, "rb") as fh:
            flat = {k: v for k, v in tomllib.load(fh).items()
                    if k in RegimeParams.__dataclass_fields__}
    rp = RegimeParams(**{**flat, **kw})
    rep = regime_report(rp)
    io.write_json(Path(a.out) / "regime.json", rep)
    v = rep["schedules"]["verdict"]
    print("admissible" if v["admissible"] else "inadmissible: " + "; ".join(v["violations"]))
    return rep


def cmd_experiment(a):
    over = {"seed": a.seed, "out": a.out if a.out != "out" else None,
            "force": True if a.force else None, "experiment": a.name}
    if a.config:
        cfg = load_config(a.config, **over)
    else:
        cfg = config_from_dict({}, **over)
    rep = run_experiment(cfg)
    out = rep.write(Path(cfg.out) / cfg.experiment)
    _print_checks(rep)
    return rep, out


def cmd_lemmas(a):
    seed = _need_seed(a)
    rep = run_lemma_suite(seed, a.trials)
    rep.write(Path(a.out) / "lemmas")
    _print_checks(rep)
    return rep


def _print_checks(rep: RunReport):
    for name, c in rep.checks.items():
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {name}  {c['detail']}")


COMMANDS = {"kernel": cmd_kernel, "simulate": cmd_simulate, "vlasov": cmd_vlasov,
            "distance": cmd_distance, "corrector": cmd_corrector, "regime": cmd_regime,
            "experiment": cmd_experiment, "lemmas": cmd_lemmas}


def main(argv=None):
    a = build_parser().parse_args(argv)
    try:
        COMMANDS[a.cmd](a)
    except VplabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
