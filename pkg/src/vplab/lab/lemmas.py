"""Randomized trials of the Wasserstein inequalities used in the stability argument.

Each trial returns (lhs, rhs, tol); a violation is lhs > rhs + tol.  All distances
are exact (LP on the torus metric, or lifted quantiles on the circle), so the only
tolerance beyond 1e-8 is the explicit quantization slack of the Loeper-type check.
"""
from __future__ import annotations

import numpy as np

from ..transport import (WeightedPointCloud, filter_measure, mollify_measure,
                         scale_measure, wasserstein_discrete, wp_circle)

TOL = 1e-8
LEMMAS = ("contraction", "self_mollification", "filtering", "scaling", "loeper")


def random_cloud(rng, K, d, vscale=1.0):
    x = rng.uniform(-0.5, 0.5, (K, d))
    v = vscale * rng.standard_normal((K, d))
    w = rng.dirichlet(np.ones(K))
    return WeightedPointCloud(np.hstack([x, v]), w, d)


def _pair(rng, d=None):
    d = d or int(rng.integers(1, 3))
    return (random_cloud(rng, int(rng.integers(1, 7)), d),
            random_cloud(rng, int(rng.integers(1, 7)), d), d)


def _W(a, b, p):
    return wasserstein_discrete(a, b, p, "torus")[0]


def trial_contraction(rng):
    """W_p(chi_r * mu, chi_r * nu) <= W_p(mu, nu)."""
    mu, nu, d = _pair(rng)
    p = int(rng.integers(1, 3))
    r = float(rng.uniform(0.01, 0.24))
    lhs = _W(mollify_measure(mu, r, n=4), mollify_measure(nu, r, n=4), p)
    return lhs, _W(mu, nu, p), TOL


def trial_self_mollification(rng):
    """W_p(chi_r * mu, mu) <= r."""
    mu, _, d = _pair(rng)
    p = int(rng.integers(1, 3))
    r = float(rng.uniform(0.01, 0.24))
    return _W(mollify_measure(mu, r, n=4), mu, p), r, TOL


def random_field(rng, d, kmax=3, amp=1.0):
    """Periodic R: T^d -> R^d as a random trigonometric sum, with a rigorous
    bound on sup |grad R| (Frobenius norm of the Jacobian, >= operator norm)."""
    nk = int(rng.integers(1, kmax + 1))
    ks = rng.integers(-kmax, kmax + 1, (d, nk, d))
    a = amp * rng.uniform(-1, 1, (d, nk)) / nk
    ph = rng.uniform(0, 2 * np.pi, (d, nk))

    def R(x):
        x = np.atleast_2d(x)
        out = np.empty((x.shape[0], d))
        for c in range(d):
            out[:, c] = np.sum(a[c] * np.sin(2 * np.pi * x @ ks[c].T + ph[c]), axis=1)
        return out
    rows = [np.sum(2 * np.pi * np.linalg.norm(ks[c], axis=1) * np.abs(a[c])) for c in range(d)]
    return R, float(np.sqrt(np.sum(np.square(rows))))


def trial_filtering(rng, zero=False):
    """W_1(filtered nu_1, filtered nu_2) <= (1 + ||grad R||) W_1(nu_1, nu_2)."""
    mu, nu, d = _pair(rng)
    if zero:
        R, L = (lambda x: np.zeros((np.atleast_2d(x).shape[0], d))), 0.0
    else:
        R, L = random_field(rng, d, amp=float(rng.uniform(0.1, 3.0)))
    lhs = _W(filter_measure(mu, R), filter_measure(nu, R), 1)
    return lhs, (1 + L) * _W(mu, nu, 1), TOL


def trial_scaling(rng):
    """W_p(nu_1, nu_2) <= R W_p(S_R nu_1, S_R nu_2) for R >= 1."""
    mu, nu, d = _pair(rng)
    p = int(rng.integers(1, 3))
    Rs = float(rng.uniform(1.0, 4.0))
    return _W(mu, nu, p), Rs * _W(scale_measure(mu, Rs), scale_measure(nu, Rs), p), TOL


def _trig_density(rng, kmax=4):
    k = np.arange(1, kmax + 1)
    a = rng.dirichlet(np.ones(kmax)) * rng.uniform(0.0, 0.9)
    ph = rng.uniform(0, 2 * np.pi, kmax)
    return k, a, ph


def _cell_masses(dens, M):
    k, a, ph = dens
    e = np.linspace(-0.5, 0.5, M + 1)
    S = np.sin(2 * np.pi * np.outer(e, k) + ph) / (2 * np.pi * k)
    return 1.0 / M + np.diff(S, axis=0) @ a


def _sup_bound(dens, n=4096):
    k, a, ph = dens
    x = -0.5 + np.arange(n) / n
    vals = 1 + np.cos(2 * np.pi * np.outer(x, k) + ph) @ a
    return float(vals.max() + 0.5 / n * np.sum(2 * np.pi * k * a))


def trial_loeper(rng, M=512):
    """1D: eps^-2 ||K * (h1 - h2)||_2 <= eps^-2 max ||h_i||_inf^(1/2) W_2(h1, h2).

    The left side is exact (Parseval on trigonometric densities).  W_2 on the
    circle is computed exactly between cell-mass atoms; since each density is
    within W_inf <= dx/2 of its atoms, W_2 <= W_2(atoms) + dx, the quantization slack.
    """
    eps = float(rng.uniform(0.05, 1.0))
    h1, h2 = _trig_density(rng), _trig_density(rng)
    c1 = h1[1] / 2 * np.exp(1j * h1[2])
    c2 = h2[1] / 2 * np.exp(1j * h2[2])
    k = h1[0]
    lhs = eps**-2 * np.sqrt(np.sum(2 * np.abs(c1 - c2) ** 2 / (4 * np.pi**2 * k**2)))
    xc = -0.5 + (np.arange(M) + 0.5) / M
    m1, m2 = _cell_masses(h1, M), _cell_masses(h2, M)
    w2 = wp_circle(xc, m1, xc, m2, p=2)
    hmax = max(_sup_bound(h1), _sup_bound(h2))
    return lhs, eps**-2 * np.sqrt(hmax) * (w2 + 1.0 / M), TOL


TRIALS = {
    "contraction": trial_contraction,
    "self_mollification": trial_self_mollification,
    "filtering": trial_filtering,
    "scaling": trial_scaling,
    "loeper": trial_loeper,
}


def run_trials(name, trials, rng):
    """Returns (violations, max of lhs - rhs, rows)."""
    fn = TRIALS[name]
    rows = []
    viol = 0
    worst = -np.inf
    for i in range(trials):
        lhs, rhs, tol = fn(rng)
        gap = lhs - rhs
        worst = max(worst, gap)
        if gap > tol:
            viol += 1
        rows.append((name, i, lhs, rhs, gap))
    return viol, worst, rows
