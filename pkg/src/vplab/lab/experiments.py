"""Experiment orchestration: mean-field, quasineutral, combined-limit sweeps, the
lemma suite and the concentration check.  Every run is validated against the
regime verdict first; `force` overrides are recorded in the report.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
from scipy.optimize import linprog
from scipy.stats import beta as beta_dist

from ..correctors import corrector_R, corrector_evolve, corrector_init
from ..errors import AdmissibilityError
from ..families import InitialDensity, quasineutral_family
from ..kernels import MollifierSpec, lipschitz_estimate, mollified_force_table
from ..particles import make_force, run_particles, sample_initial
from ..regimes import admissibility, concentration_bound, eps_min, placement_budget
from ..transport import (WeightedPointCloud, filter_grid, filter_measure, grid_vs_cloud_w,
                         grid_vs_grid_w, quantize_grid, scale_measure, wasserstein_discrete)
from ..vlasov import PhaseSpaceGrid, dominant_frequency, kie_reference, run_vp
from .config import ExperimentConfig
from .lemmas import LEMMAS, run_trials, trial_filtering
from .report import RunReport, Timer


def _gate(cfg, report, params, particles=True, label=""):
    """Refuse inadmissible parameters unless forced; record the verdict."""
    v = admissibility(params, particles=particles)
    report.series.setdefault("verdicts", []).append(
        {"point": label, "N": params.N, "eps": params.eps, "r": params.r, **v})
    if not v["admissible"]:
        if not cfg.force:
            raise AdmissibilityError(f"{label}: " + "; ".join(v["violations"]))
        report.notes.append(f"forced run at inadmissible point {label}: "
                            + "; ".join(v["violations"]))
    return v


def _family(cfg, amplitude=None):
    return InitialDensity(cfg.family, 1, cfg.amplitude if amplitude is None else amplitude,
                          cfg.mode, cfg.vwidth, cfg.v0)


def _seed(cfg, *keys):
    return np.random.SeedSequence([int(cfg.seed), *[int(k) for k in keys]])


def _cloud(x, v):
    return WeightedPointCloud(np.hstack([x, v]), None, 1)


def _slope(N, y):
    return float(np.polyfit(np.log(N), np.log(y), 1)[0])


def _fmt(xs):
    return "[" + ", ".join(f"{float(x):.6g}" for x in xs) + "]"


def _strictly_decreasing(y):
    return bool(np.all(np.diff(y) < 0))


# ---------------------------------------------------------------------------
# mean-field convergence at fixed eps
# ---------------------------------------------------------------------------

def run_meanfield_convergence(cfg: ExperimentConfig) -> RunReport:
    """sup_t W1(mu^N(t), f_eps(t)) against N, PDE reference with the same r."""
    rp = cfg.regime
    eps, r, T = rp.eps, rp.r, rp.T
    rep = RunReport("meanfield", cfg.seed, cfg.to_dict())
    for N in cfg.N_list:
        _gate(cfg, rep, replace(rp, N=int(N)), label=f"N={N}")
    with Timer() as tm:
        fam = _family(cfg)
        dt = cfg.time_step(eps)
        rr = r if r > 0 else None
        f0 = PhaseSpaceGrid.from_family(fam, cfg.Mx, cfg.Mv, cfg.vmax, eps, rr)
        ref = run_vp(f0, eps, rr, T, dt, cfg.snapshot_every)
        if r > 0:
            force = make_force(cfg.force_method,
                               mollified_force_table(MollifierSpec(r), eps, cfg.kernel_M))
        else:
            force = make_force("exact1d")
        rows, summary = [], []
        steps = ref.steps
        for N in cfg.N_list:
            sups = []
            for s in range(cfg.n_seeds):
                ens = sample_initial(fam, int(N), _seed(cfg, N, s), eps, r)
                pr = run_particles(ens, dt, T, force, cfg.snapshot_every)
                steps += pr.steps
                dist = [grid_vs_cloud_w(g, _cloud(x, v), cfg.p, cfg.qx, cfg.qv, "always",
                                        cfg.metric).value
                        for g, x, v in zip(ref.snapshots, pr.positions, pr.velocities)]
                sups.append(max(dist))
                rows.append((N, s, max(dist)))
            summary.append((N, float(np.median(sups)), float(np.mean(sups))))
    rep.add_table("distances", ["N", "seed_index", "sup_W1"], rows)
    rep.add_table("summary", ["N", "median_sup_W1", "mean_sup_W1"], summary)
    med = [m for _, m, _ in summary]
    if len(med) > 1:
        sl = _slope([n for n, _, _ in summary], med)
        rep.series["slope_vs_logN"] = sl
        rep.check("decreasing_in_N", _strictly_decreasing(med), f"medians {_fmt(med)}")
        rep.check("slope_at_most_-0.3", sl <= -0.3, f"slope {sl:.3f}")
    rep.series["pde_clipped_mass"] = ref.clipped
    rep.steps, rep.wall_clock = steps, tm.elapsed
    return rep


# ---------------------------------------------------------------------------
# quasineutral sweep
# ---------------------------------------------------------------------------

def _corrector_at(state, t, traj=None):
    st = state if traj is None else traj.at(t)
    R, g = corrector_R(st, t)
    return R.values[0], g


def run_quasineutral_sweep(cfg: ExperimentConfig) -> RunReport:
    """Filtered and unfiltered distances to the stationary KIE reference g0 for an
    eps-sweep, plus the dominant plasma frequency of E(t, x0)."""
    rp = cfg.regime
    rep = RunReport("quasineutral", cfg.seed, cfg.to_dict())
    for eps in cfg.eps_list:
        _gate(cfg, rep, replace(rp, eps=float(eps)), particles=False, label=f"eps={eps}")
    with Timer() as tm:
        g0 = kie_reference(_family(cfg, 0.0), cfg.Mx, cfg.Mv, cfg.vmax).at(0.0)
        rows = []
        steps = 0
        i0 = cfg.Mx // 4
        for eps in cfg.eps_list:
            fam = quasineutral_family(cfg.amplitude, eps, cfg.vwidth, cfg.mode, cfg.family)
            fam = replace(fam, v0=cfg.v0)
            f0 = PhaseSpaceGrid.from_family(fam, cfg.Mx, cfg.Mv, cfg.vmax, eps)
            dt = cfg.time_step(eps)
            run = run_vp(f0, eps, None, rp.T, dt, cfg.snapshot_every)
            steps += run.steps
            st = corrector_init(f0, eps, frequency=cfg.frequency)
            traj = None
            if np.any(st.j != 0):
                traj = corrector_evolve(replace(st, j=np.full_like(st.j, cfg.v0)), rp.T, dt)
            filt, unf, gsup = [], [], 0.0
            for snap in run.snapshots:
                R, g = _corrector_at(st, snap.time, traj)
                gsup = max(gsup, g)
                filt.append(grid_vs_grid_w(filter_grid(snap, R), g0, 1, cfg.qx, cfg.qv,
                                           cfg.metric).value)
                unf.append(grid_vs_grid_w(snap, g0, 1, cfg.qx, cfg.qv, cfg.metric).value)
            w = dominant_frequency(run.field[:, i0], dt)
            rows.append((eps, float(max(filt)), float(max(unf)), float(w * eps), float(gsup),
                         float(run.clipped)))
    rep.add_table("sweep", ["eps", "sup_W1_filtered", "sup_W1_unfiltered",
                            "omega_times_eps", "sup_grad_R", "clipped_mass"], rows)
    filt = [r[1] for r in rows]
    if cfg.amplitude != 0:
        rep.check("filtered_decreasing_in_eps", _strictly_decreasing(filt), _fmt(filt))
        rep.check("filtered_below_unfiltered", all(r[1] < r[2] for r in rows))
        rep.check("frequency_within_10pct", all(abs(r[3] - 1) <= 0.1 for r in rows),
                  _fmt(r[3] for r in rows))
    rep.steps, rep.wall_clock = steps, tm.elapsed
    return rep


# ---------------------------------------------------------------------------
# combined limit on the eps(N) = A / log N schedule
# ---------------------------------------------------------------------------

def run_combined_limit(cfg: ExperimentConfig) -> RunReport:
    """sup_t W1(filtered empirical measure, g0) along eps(N) = A/log N (d = 1)."""
    rp = cfg.regime
    rep = RunReport("combined", cfg.seed, cfg.to_dict())
    pts = []
    for N in cfg.N_list:
        eps = eps_min(int(N), rp.A)
        _gate(cfg, rep, replace(rp, N=int(N), eps=eps), label=f"N={N}")
        pts.append((int(N), eps))
    with Timer() as tm:
        g0 = kie_reference(_family(cfg, 0.0), cfg.Mx, cfg.Mv, cfg.vmax).at(0.0)
        rows, summary, steps = [], [], 0
        r = rp.r
        for N, eps in pts:
            fam = replace(quasineutral_family(cfg.amplitude, eps, cfg.vwidth, cfg.mode,
                                              cfg.family), v0=cfg.v0)
            f0 = PhaseSpaceGrid.from_family(fam, cfg.Mx, cfg.Mv, cfg.vmax, eps)
            st = corrector_init(f0, eps, frequency=cfg.frequency)
            dt = cfg.time_step(eps)
            if r > 0:
                force = make_force(cfg.force_method,
                                   mollified_force_table(MollifierSpec(r), eps, cfg.kernel_M))
            else:
                force = make_force("exact1d")
            sups, stats = [], []
            for s in range(cfg.n_seeds):
                ens = sample_initial(fam, N, _seed(cfg, N, s), eps, r)
                pr = run_particles(ens, dt, rp.T, force, cfg.snapshot_every)
                steps += pr.steps
                dist = []
                for t, x, v in zip(pr.times, pr.positions, pr.velocities):
                    R, _ = corrector_R(st, t)
                    cl = filter_measure(_cloud(x, v), R.values[0], f0.x)
                    dist.append(grid_vs_cloud_w(g0, cl, 1, cfg.qx, cfg.qv, "always",
                                                cfg.metric).value)
                sups.append(max(dist))
                stat = _placement(cfg, f0, pr.positions[0], pr.velocities[0], eps, r)
                stats.append(stat)
                rows.append((N, eps, s, max(dist), stat))
            summary.append((N, eps, float(np.median(sups)), float(np.median(stats))))
    rep.add_table("distances", ["N", "eps", "seed_index", "sup_W1_filtered", "placement"], rows)
    rep.add_table("summary", ["N", "eps", "median_sup_W1_filtered", "median_placement"],
                  summary)
    med = [s[2] for s in summary]
    if len(med) > 1:
        rep.check("decreasing_in_N", _strictly_decreasing(med), f"medians {_fmt(med)}")
    rep.steps, rep.wall_clock = steps, tm.elapsed
    return rep


def _placement(cfg, f0, x, v, eps, r):
    """Initial-placement statistic.  r > 0: W2(mu^N(0), f0) / (eps^-gamma r^(1+d/2+eta/2));
    r = 0 (1D): eps^-1 e^(C/eps) W1(mu^N(0), f0)."""
    rp = cfg.regime
    if r > 0:
        w2 = grid_vs_cloud_w(f0, _cloud(x, v), 2, cfg.qx, cfg.qv, "always", cfg.metric).value
        return w2 / placement_budget(replace(rp, eps=eps, r=r))
    w1 = grid_vs_cloud_w(f0, _cloud(x, v), 1, cfg.qx, cfg.qv, "always", cfg.metric).value
    return w1 * math.exp(rp.C / eps) / eps


# ---------------------------------------------------------------------------
# lemma suite and concentration
# ---------------------------------------------------------------------------

def run_lemma_suite(seed, trials=1000, cfg=None) -> RunReport:
    """Randomized trials of every inequality lemma; counts violations."""
    rep = RunReport("lemmas", seed, cfg.to_dict() if cfg else {"seed": seed, "trials": trials})
    rows = []
    with Timer() as tm:
        for i, name in enumerate(LEMMAS):
            rng = np.random.default_rng(_seed_int(seed, i))
            viol, worst, rr = run_trials(name, trials, rng)
            rows.append((name, trials, viol, worst))
            rep.series.setdefault("trials", []).extend(rr[:20])
        rng = np.random.default_rng(_seed_int(seed, 99))
        lhs, rhs, _ = trial_filtering(rng, zero=True)
        rows.append(("filtering_R0_equality", 1, int(abs(lhs - rhs) > 1e-12), lhs - rhs))
    rep.add_table("lemmas", ["lemma", "trials", "violations", "max_gap"], rows)
    for name, _, viol, worst in rows:
        rep.check(name, viol == 0, f"max lhs - rhs = {worst:.3g}")
    rep.steps, rep.wall_clock = trials * len(LEMMAS), tm.elapsed
    return rep


def _seed_int(seed, k):
    return np.random.SeedSequence([int(seed), k])


def concentration_target(cfg):
    """Discrete measure nu in [-1, 1]^2: quantized f0 with velocities scaled by vmax."""
    f0 = PhaseSpaceGrid.from_family(_family(cfg), cfg.Mx, cfg.Mv, cfg.vmax)
    nu, _ = quantize_grid(f0, cfg.qx, cfg.qv)
    return scale_measure(nu, cfg.vmax)


def exceedance(nu, N, x_grid, kappa, resamples, rng, p=1):
    """Empirical frequency of W_p^p(nu, nu^N) >= kappa x over i.i.d. resamples."""
    W = np.empty(resamples)
    for k in range(resamples):
        idx = rng.choice(nu.K, size=N, p=nu.weights)
        emp = WeightedPointCloud(nu.points[idx], None, nu.d)
        W[k] = wasserstein_discrete(nu, emp, p, "euclidean")[0] ** p
    x = np.asarray(x_grid, dtype=float)
    return [float(f) for f in (W[:, None] >= kappa * x[None, :]).mean(axis=0)], W


def clopper_pearson_upper(k, n, level=0.975):
    return 1.0 if k >= n else float(beta_dist.ppf(level, k + 1, n - k))


def calibrate_concentration(freq, resamples, x_grid, N, m=2, p=1, margin=1.25):
    """Fit (C, c) of C exp(-c N e(x)) as the tightest envelope in log space above
    the Clopper-Pearson upper limits of the pilot frequencies; C is then
    multiplied by `margin`."""
    x = np.asarray(x_grid, dtype=float)
    e = np.array([-math.log(concentration_bound(m, p, xi, 1, 1.0, 1.0)) for xi in x])
    up = np.array([clopper_pearson_upper(int(round(f * resamples)), resamples) for f in freq])
    # variables (logC, c): minimise sum(logC - c N e_i) s.t. logC - c N e_i >= log up_i, c >= 0
    res = linprog(c=[len(x), -N * e.sum()], A_ub=np.stack([-np.ones_like(e), N * e], 1),
                  b_ub=-np.log(up), bounds=[(None, None), (0, None)], method="highs")
    logC, c = res.x
    return math.exp(logC) * margin, float(c)


def run_concentration_check(cfg: ExperimentConfig) -> RunReport:
    """Pilot resamples calibrate (C, c) once; fresh resamples are then tested
    against the calibrated bound at every x."""
    rp = cfg.regime
    rep = RunReport("concentration", cfg.seed, cfg.to_dict())
    with Timer() as tm:
        nu = concentration_target(cfg)
        rng_pilot = np.random.default_rng(_seed_int(cfg.seed, 1))
        rng_test = np.random.default_rng(_seed_int(cfg.seed, 2))
        pilot, _ = exceedance(nu, cfg.conc_N, cfg.x_grid, rp.kappa, cfg.resamples, rng_pilot,
                              cfg.p)
        C, c = calibrate_concentration(pilot, cfg.resamples, cfg.x_grid, cfg.conc_N, 2, cfg.p)
        fresh, W = exceedance(nu, cfg.conc_N, cfg.x_grid, rp.kappa, cfg.resamples, rng_test,
                              cfg.p)
        bound = [concentration_bound(2, cfg.p, x, cfg.conc_N, C, c) for x in cfg.x_grid]
    rows = list(zip(cfg.x_grid, pilot, fresh, bound))
    rep.add_table("exceedance", ["x", "pilot_freq", "fresh_freq", "bound"], rows)
    rep.series["calibration"] = {"C": C, "c": c, "kappa": rp.kappa, "N": cfg.conc_N,
                                 "m": 2, "p": cfg.p, "resamples": cfg.resamples}
    rep.series["mean_Wp"] = float(W.mean())
    rep.check("below_calibrated_bound", all(f <= b for _, _, f, b in rows))
    rep.steps, rep.wall_clock = 2 * cfg.resamples, tm.elapsed
    return rep


# ---------------------------------------------------------------------------
# Lipschitz law of the mollified field
# ---------------------------------------------------------------------------

def square_indicator(M, d, side=0.5):
    x = -0.5 + (np.arange(M) + 0.5) / M
    inside = np.abs(x) < side / 2
    out = inside
    for _ in range(d - 1):
        out = np.multiply.outer(out, inside)
    return out.astype(float)


def curvature_test(ell, L, rel_tol=0.01):
    """Quadratic fit L = c0 + c1 ell + c2 ell^2.  Super-logarithmic growth shows
    as c2 > 0; the test flags it when the quadratic term contributes more than
    rel_tol of the observed rise over the ell range.  Returns (flagged, ratio)."""
    ell, L = np.asarray(ell, float), np.asarray(L, float)
    c2 = np.polyfit(ell, L, 2)[0]
    rise = max(L.max() - L.min(), 1e-300)
    ratio = float(c2 * (ell.max() - ell.min()) ** 2 / rise)
    return ratio > rel_tol, ratio


def run_lipschitz_law(cfg: ExperimentConfig) -> RunReport:
    """Lip(chi_r * K * h) for h the indicator of a square, r = 2^-k on a grid with
    cells_per_r cells per mollifier radius; fits L(r) <= C |log r| (1 + ||h||_inf)."""
    d = cfg.regime.d
    rep = RunReport("lipschitz", cfg.seed, cfg.to_dict())
    rows = []
    with Timer() as tm:
        for k in cfg.r_exponents:
            r = 2.0 ** -int(k)
            M = int(round(cfg.cells_per_r / r))
            h = square_indicator(M, d)
            tab = mollified_force_table(MollifierSpec(r), 1.0, M, d)
            L = lipschitz_estimate(tab, h)
            ell = -math.log(r)
            rows.append((r, M, L, ell, L / (ell * (1 + h.max()))))
    rep.add_table("lipschitz", ["r", "M", "L", "abs_log_r", "L_over_log_bound"], rows)
    # fit C once on the coarser half, then hold it fixed on the finer radii
    n_fit = (len(rows) + 1) // 2
    C = max(row[4] for row in rows[:n_fit])
    ell = [row[3] for row in rows]
    L = [row[2] for row in rows]
    slope, icpt = np.polyfit(ell, L, 1)
    flagged, ratio = curvature_test(ell, L)
    rep.series["fitted_C"] = float(C)
    rep.series["linear_fit"] = {"slope": float(slope), "intercept": float(icpt)}
    rep.series["curvature_ratio"] = ratio
    held = [row[4] <= C for row in rows[n_fit:]]
    rep.check("single_C_bound", all(held),
              f"C = {C:.6g} fitted on r >= {rows[n_fit - 1][0]:g}, held on {sum(held)}/{len(held)}")
    rep.check("no_superlog_growth", not flagged, f"quadratic share {ratio:.3g}")
    rep.steps, rep.wall_clock = len(rows), tm.elapsed
    return rep


RUNNERS = {
    "lipschitz": run_lipschitz_law,
    "meanfield": run_meanfield_convergence,
    "quasineutral": run_quasineutral_sweep,
    "combined": run_combined_limit,
    "concentration": run_concentration_check,
    "lemmas": lambda cfg: run_lemma_suite(cfg.seed, cfg.trials, cfg),
}


def run_experiment(cfg):
    return RUNNERS[cfg.experiment](cfg)
