"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line in the
"acceptance criteria" section of the pytest summary.  Tolerances are the stated ones."""
import math
import time

import mpmath
import numpy as np
import pytest

from vplab.families import InitialDensity
from vplab.kernels import MollifierSpec, green_kernel_1d, mollified_force_table, mollified_green_table
from vplab.lab.config import config_from_dict
from vplab.lab.experiments import run_experiment, run_lemma_suite
from vplab.particles import make_force, regularized_energy, run_particles, sample_initial
from vplab.transport import WeightedPointCloud, brute_force_wasserstein, w2_discrete
from vplab.vlasov import poisson_solve

from test_regimes import GOLDEN, _ours


# ---------------------------------------------------------------- 1 lemma suite

@pytest.mark.slow
def test_c01_lemma_suite(verdict):
    t0 = time.perf_counter()
    rep = run_lemma_suite(seed=2024, trials=1000)
    dt = time.perf_counter() - t0
    viol = {r[0]: r[2] for r in rep.tables["lemmas"]["rows"]}
    ok = all(v == 0 for v in viol.values()) and dt <= 300
    verdict(1, "lemma suite, 10^3 trials per lemma", ok,
            f"violations {viol}, {dt:.0f} s (limit 300 s)")


# ---------------------------------------------------------------- 2 transport oracle

def test_c02_lp_vs_brute_force(verdict):
    rng = np.random.default_rng(20)
    worst = 0.0
    for _ in range(1000):
        K, d = int(rng.integers(1, 7)), int(rng.integers(1, 3))
        a = WeightedPointCloud(np.hstack([rng.uniform(-0.5, 0.5, (K, d)),
                                          rng.standard_normal((K, d))]), None, d)
        b = WeightedPointCloud(np.hstack([rng.uniform(-0.5, 0.5, (K, d)),
                                          rng.standard_normal((K, d))]), None, d)
        metric = "torus" if rng.random() < 0.5 else "euclidean"
        worst = max(worst, abs(w2_discrete(a, b, metric)[0]
                               - brute_force_wasserstein(a, b, 2, metric)))
    verdict(2, "exact LP W2 vs permutation brute force, 10^3 instances", worst <= 1e-10,
            f"max |diff| {worst:.2e} (limit 1e-10)")


# ---------------------------------------------------------------- 3 green kernel and Poisson

def _fourier_oracle(x):
    z = mpmath.exp(2j * mpmath.pi * x)
    G = -mpmath.re(mpmath.polylog(2, z)) / (2 * mpmath.pi**2)
    K = mpmath.im(mpmath.polylog(1, z)) / mpmath.pi if x != 0 else mpmath.mpf(0)
    return float(G), float(K)


def test_c03_green_kernel_and_poisson(verdict):
    mpmath.mp.dps = 30
    xs = np.random.default_rng(3).uniform(-0.5, 0.5, 1000)
    G, K = green_kernel_1d(xs)
    ref = np.array([_fourier_oracle(float(x)) for x in xs])
    eg = max(np.max(np.abs(G - ref[:, 0])), np.max(np.abs(K - ref[:, 1])))
    ep = 0.0
    for M, a, eps in ((256, 0.4, 0.2), (128, 0.9, 1.0), (512, 0.1, 0.05)):
        x = -0.5 + (np.arange(M) + 0.5) / M
        _, E = poisson_solve(1 + a * np.cos(2 * np.pi * x), eps)
        ep = max(ep, np.max(np.abs(E.values - a * np.sin(2 * np.pi * x) / (2 * np.pi * eps**2))))
    verdict(3, "green kernel vs Fourier oracle; spectral Poisson single mode",
            eg <= 1e-10 and ep <= 1e-10, f"kernel {eg:.2e}, Poisson {ep:.2e} (limit 1e-10)")


# ---------------------------------------------------------------- 4 energy conservation

def _energy_drift(dt, eps=0.5, r=1 / 32, N=256, T=1.0, seed=7):
    ens = sample_initial(InitialDensity("bump", 1, 0.5, 1, 0.5), N, seed, eps, r)
    tab = mollified_force_table(MollifierSpec(r), eps, 256)
    gt = mollified_green_table(MollifierSpec(r), eps, 256)
    run = run_particles(ens, dt, T, make_force("spectral", tab), 0.1,
                        lambda e: regularized_energy(e, gt))
    tot = np.array([e.total for e in run.energies])
    return float(np.max(np.abs(tot - tot[0])) / abs(tot[0]))


def test_c04_energy_conservation(verdict):
    d1, d2 = _energy_drift(1e-3), _energy_drift(5e-4)
    ratio = d1 / d2
    verdict(4, "particle energy drift, N=256 eps=0.5 r=1/32 T=1",
            d1 <= 1e-5 and 3.5 <= ratio <= 4.5,
            f"drift {d1:.2e} (limit 1e-5), ratio on halving dt {ratio:.2f} (target 4)")


# ---------------------------------------------------------------- 5 mean-field trend

@pytest.mark.slow
def test_c05_meanfield_trend(verdict):
    cfg = config_from_dict({"experiment": "meanfield", "seed": 1, "eps": 0.5, "T": 1.0,
                            "N_list": [1000, 4000, 16000], "n_seeds": 5})
    t0 = time.perf_counter()
    rep = run_experiment(cfg)
    dt = time.perf_counter() - t0
    med = [row[1] for row in rep.tables["summary"]["rows"]]
    sl = rep.series["slope_vs_logN"]
    ok = rep.checks["decreasing_in_N"]["pass"] and sl <= -0.3 and dt <= 1800
    verdict(5, "mean-field sup W1 vs N at eps=0.5", ok,
            f"medians {[round(m, 5) for m in med]}, slope {sl:.3f} (need <= -0.3), {dt:.0f} s")


# ---------------------------------------------------------------- 6, 7 quasineutral sweep

@pytest.fixture(scope="module")
def quasineutral():
    cfg = config_from_dict({"experiment": "quasineutral", "seed": 1, "amplitude": 1.0,
                            "eps_list": [0.2, 0.1, 0.05], "T": 1.0})
    return run_experiment(cfg)


@pytest.mark.slow
def test_c06_quasineutral_trend(verdict, quasineutral):
    rows = quasineutral.tables["sweep"]["rows"]
    filt, unf = [r[1] for r in rows], [r[2] for r in rows]
    ok = all(b < a for a, b in zip(filt, filt[1:])) and all(f < u for f, u in zip(filt, unf))
    verdict(6, "filtered sup W1 to g0 vs eps", ok,
            f"filtered {[round(f, 5) for f in filt]}, unfiltered {[round(u, 5) for u in unf]}")


@pytest.mark.slow
def test_c07_plasma_frequency(verdict, quasineutral):
    we = {r[0]: r[3] for r in quasineutral.tables["sweep"]["rows"]}
    ok = all(abs(we[e] - 1) <= 0.1 for e in (0.2, 0.1))
    verdict(7, "dominant frequency of E(t, x0) times eps", ok,
            f"eps=0.2: {we[0.2]:.4f}, eps=0.1: {we[0.1]:.4f} (within 10% of 1)")


# ---------------------------------------------------------------- 8 Lipschitz law

@pytest.mark.slow
def test_c08_lipschitz_law(verdict):
    cfg = config_from_dict({"experiment": "lipschitz", "seed": 0, "d": 2,
                            "r_exponents": [4, 5, 6, 7, 8, 9, 10], "cells_per_r": 8})
    rep = run_experiment(cfg)
    L = [round(r[2], 4) for r in rep.tables["lipschitz"]["rows"]]
    verdict(8, "Lip(chi_r * K * h) <= C |log r| (1 + |h|_inf), d=2, r=2^-4..2^-10",
            rep.passed, f"L {L}; {rep.checks['single_C_bound']['detail']}; "
                        f"{rep.checks['no_superlog_growth']['detail']}")


# ---------------------------------------------------------------- 9 concentration

@pytest.mark.slow
def test_c09_concentration(verdict):
    cfg = config_from_dict({"experiment": "concentration", "seed": 0, "kappa": 0.1,
                            "resamples": 200, "conc_N": 256})
    rep = run_experiment(cfg)
    cal = rep.series["calibration"]
    rows = rep.tables["exceedance"]["rows"]
    margin = min(b - f for _, _, f, b in rows)
    verdict(9, "exceedance of W1 >= kappa x below calibrated curve, 200 resamples",
            rep.passed, f"C={cal['C']:.4g} c={cal['c']:.4g} kappa={cal['kappa']}, "
                        f"min(bound - freq) {margin:.3g}")


# ---------------------------------------------------------------- 10 combined limit

@pytest.mark.slow
def test_c10_combined_limit(verdict):
    cfg = config_from_dict({"experiment": "combined", "seed": 1, "A": 3.0, "amplitude": 0.25,
                            "r": 0.0, "N_list": [2**k for k in range(10, 17)], "n_seeds": 5})
    rep = run_experiment(cfg)
    med = [round(r[2], 5) for r in rep.tables["summary"]["rows"]]
    verdict(10, "filtered sup W1 to g0 along eps = 3/log N, N=2^10..2^16",
            rep.checks["decreasing_in_N"]["pass"], f"medians {med}")


# ---------------------------------------------------------------- 11 regime golden file

def test_c11_regime_golden(verdict):
    worst, n = 0.0, 0
    for row in GOLDEN:
        ours = _ours(row["inputs"])
        loglog = ours.pop("log_neg_log_phi", None)
        for k, exp in row["expected"].items():
            ref = float(exp["value"])
            if not math.isfinite(ref):
                err = abs(loglog / float(exp["log"]) - 1) if ours[k] == -math.inf else math.inf
            elif abs(ref) < 1e-290:
                err = 0.0 if abs(ours[k]) <= 1e-290 else math.inf
            else:
                err = abs(ours[k] / ref - 1)
            worst, n = max(worst, err), n + 1
    verdict(11, f"regime calculators vs 50-digit golden file, {len(GOLDEN)} points",
            worst <= 1e-12, f"{n} values, max rel err {worst:.2e} (limit 1e-12)")
