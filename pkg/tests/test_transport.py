import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vplab.errors import DomainError, SizeError
from vplab.lab.lemmas import random_cloud, trial_filtering
from vplab.transport import (WeightedPointCloud, anisotropic_D, brute_force_wasserstein,
                             filter_measure, grid_vs_cloud_w, mollify_measure,
                             quantize_grid, scale_measure, sliced_w2, truncate_D, w1_1d,
                             w2_discrete, wasserstein_discrete, wp_1d, wp_circle)
from vplab.vlasov import PhaseSpaceGrid

seeds = st.integers(0, 2**32 - 1)


def cloud(pts, w=None, d=1):
    return WeightedPointCloud(np.asarray(pts, float), w, d)


def uniform_cloud(rng, K, d=1):
    return WeightedPointCloud(np.hstack([rng.uniform(-0.5, 0.5, (K, d)),
                                         rng.standard_normal((K, d))]), None, d)


# ---------------------------------------------------------------- 1D exact

def test_w1_1d_examples():
    a = cloud([[0.0]])
    assert w1_1d(a, cloud([[0.3]])) == pytest.approx(0.3, abs=1e-15)
    assert w1_1d(cloud([[0.0], [0.5]]), cloud([[0.1], [0.4]])) == pytest.approx(0.1, abs=1e-15)
    assert w1_1d(a, a) == 0.0
    with pytest.raises(DomainError):
        w1_1d(a, a, metric="torus")


@given(seed=seeds)
def test_w1_1d_matches_lp(seed):
    rng = np.random.default_rng(seed)
    K, L = rng.integers(1, 8, 2)
    a = WeightedPointCloud(rng.uniform(-0.5, 0.5, (K, 1)), rng.dirichlet(np.ones(K)), 1)
    b = WeightedPointCloud(rng.uniform(-0.5, 0.5, (L, 1)), rng.dirichlet(np.ones(L)), 1)
    lp = wasserstein_discrete(a, b, 1)[0]
    assert abs(w1_1d(a, b) - lp) <= 1e-12


@settings(max_examples=100)
@given(seed=seeds, p=st.sampled_from([1, 2]))
def test_circle_formula_matches_torus_lp(seed, p):
    rng = np.random.default_rng(seed)
    K, L = rng.integers(1, 9, 2)
    xa, xb = rng.uniform(-0.5, 0.5, K), rng.uniform(-0.5, 0.5, L)
    wa, wb = rng.dirichlet(np.ones(K)), rng.dirichlet(np.ones(L))
    lp = wasserstein_discrete(cloud(xa[:, None], wa), cloud(xb[:, None], wb), p, "torus")[0]
    assert abs(wp_circle(xa, wa, xb, wb, p) - lp) <= 1e-10


# ---------------------------------------------------------------- discrete LP

def test_w2_two_diracs():
    val, plan = w2_discrete(cloud([[0.0, 0.0]]), cloud([[0.3, 0.4]]))
    assert val == pytest.approx(0.5, abs=1e-15)


def test_w2_self_is_zero_with_identity_plan():
    mu = uniform_cloud(np.random.default_rng(0), 5)
    val, plan = w2_discrete(mu, mu)
    assert val == 0.0
    assert np.allclose(plan.plan.toarray(), np.diag(mu.weights))


@settings(max_examples=100)
@given(seed=seeds, K=st.integers(1, 6), metric=st.sampled_from(["euclidean", "torus"]))
def test_lp_matches_brute_force(seed, K, metric):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3))
    a, b = uniform_cloud(rng, K, d), uniform_cloud(rng, K, d)
    lp = w2_discrete(a, b, metric)[0]
    assert abs(lp - brute_force_wasserstein(a, b, 2, metric)) <= 1e-10


@given(seed=seeds)
def test_plan_marginals(seed):
    rng = np.random.default_rng(seed)
    a, b = random_cloud(rng, 5, 1), random_cloud(rng, 7, 1)
    _, plan = wasserstein_discrete(a, b, 2)
    P = plan.plan.toarray()
    assert np.all(P >= 0)
    assert np.allclose(P.sum(axis=1), a.weights, atol=1e-12, rtol=0)
    assert np.allclose(P.sum(axis=0), b.weights, atol=1e-12, rtol=0)


@given(seed=seeds, p=st.sampled_from([1, 2]))
def test_metric_axioms(seed, p):
    rng = np.random.default_rng(seed)
    a, b, c = (random_cloud(rng, int(rng.integers(1, 6)), 1) for _ in range(3))
    ab = wasserstein_discrete(a, b, p, "torus")[0]
    ba = wasserstein_discrete(b, a, p, "torus")[0]
    bc = wasserstein_discrete(b, c, p, "torus")[0]
    ac = wasserstein_discrete(a, c, p, "torus")[0]
    assert abs(ab - ba) <= 1e-12
    assert ac <= ab + bc + 1e-10


def test_size_guard():
    big = WeightedPointCloud(np.zeros((2001, 2)), None, 1)
    with pytest.raises(SizeError, match="sliced"):
        wasserstein_discrete(big, big)


# ---------------------------------------------------------------- sliced

def test_sliced_identical_is_zero():
    mu = uniform_cloud(np.random.default_rng(0), 10)
    assert sliced_w2(mu, mu, 32, 0)[0] == 0.0


def test_sliced_two_diracs_closed_form():
    # projections of a shift D onto uniform directions in R^2: E[(D.theta)^2] = |D|^2 / 2
    est, se = sliced_w2(cloud([[0.0, 0.0]]), cloud([[0.3, 0.4]]), 4000, 1)
    assert abs(est - 0.5 / np.sqrt(2)) <= 3 * se + 1e-3


@given(seed=seeds)
def test_sliced_below_exact(seed):
    rng = np.random.default_rng(seed)
    a, b = uniform_cloud(rng, 6), uniform_cloud(rng, 6)
    est, se = sliced_w2(a, b, 64, seed)
    assert est <= w2_discrete(a, b)[0] + 3 * se


# ---------------------------------------------------------------- grids

def test_single_cell_grid_vs_centre_dirac():
    f = PhaseSpaceGrid(np.zeros((32, 32)), 1.0)
    f.f[8:16, 8:16] = 1.0 / (64 * f.dx * f.dv)
    g, half_diag = quantize_grid(f, 4, 4)
    centre = g.points[0]
    dist = grid_vs_cloud_w(f, cloud([centre]), 1, 4, 4)
    assert dist.value <= 2 * half_diag
    assert dist.quantization_error == pytest.approx(half_diag)


def test_grid_vs_cloud_p_ordering():
    f = PhaseSpaceGrid(np.ones((32, 32)) / 1.0, 0.5)
    c = uniform_cloud(np.random.default_rng(2), 200)
    c.points[:, 1] = np.clip(c.points[:, 1] * 0.2, -0.49, 0.49)
    d1 = grid_vs_cloud_w(f, c, 1, 16, 16).value
    d2 = grid_vs_cloud_w(f, c, 2, 16, 16).value
    assert d1 <= d2 + 1e-12


def test_grid_vs_cloud_decreases_with_N():
    f = PhaseSpaceGrid(np.full((32, 32), 1.0), 0.5)
    rng = np.random.default_rng(3)
    vals = []
    for N in (100, 1600, 25600):
        pts = np.column_stack([rng.uniform(-0.5, 0.5, N), rng.uniform(-0.5, 0.5, N)])
        vals.append(grid_vs_cloud_w(f, WeightedPointCloud(pts, None, 1), 1, 32, 32,
                                    binning="always").value)
    slope = np.polyfit(np.log([100, 1600, 25600]), np.log(vals), 1)[0]
    assert vals[0] > vals[1] > vals[2]
    assert -0.75 <= slope <= -0.3


# ---------------------------------------------------------------- D functional

def test_D_identical_and_static_offset():
    x = np.random.default_rng(0).uniform(-0.5, 0.5, (10, 1))
    v = np.zeros((10, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        D = anisotropic_D([(x, v)], [(x, v)], 2.0)
        assert D[0] == 0 and truncate_D(D, 2.0, 0.1, 1)[0] == 0
        h = 0.05
        D = anisotropic_D([(x, v)], [(x + h, v)], 2.0)
    assert D[0] == pytest.approx(4.0 * h * h / 2)


def test_D_warns_for_small_lambda():
    x = np.zeros((1, 1))
    with pytest.warns(UserWarning):
        anisotropic_D([(x, x)], [(x, x)], 1.2)


@given(seed=seeds, lam=st.floats(1.5, 5.0))
def test_w2_squared_below_twice_D(seed, lam):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(1, 8))
    xa, xb = rng.uniform(-0.5, 0.5, (K, 1)), rng.uniform(-0.5, 0.5, (K, 1))
    va, vb = rng.standard_normal((K, 1)), rng.standard_normal((K, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        D = anisotropic_D([(xa, va)], [(xb, vb)], lam)[0]
    w2 = w2_discrete(cloud(np.hstack([xa, va])), cloud(np.hstack([xb, vb])))[0]
    assert w2**2 <= 2 * D + 1e-12


def test_w2_squared_below_D_fails_for_velocity_offsets():
    # counterexample to W2^2 <= D: pure velocity offset, D = |dv|^2/2 < W2^2 = |dv|^2
    x, va, vb = np.zeros((1, 1)), np.zeros((1, 1)), np.ones((1, 1))
    D = anisotropic_D([(x, va)], [(x, vb)], 3.0)[0]
    w2 = w2_discrete(cloud([[0.0, 0.0]]), cloud([[0.0, 1.0]]))[0]
    assert w2**2 > D


def test_truncate_D_running_sup_and_cap():
    out = truncate_D([0.0, 2e-4, 1e-4, 1.0], 2.0, 0.1, 1)
    assert np.all(np.diff(out) >= 0) and out[-1] == 1.0
    assert out[2] == out[1]


# ---------------------------------------------------------------- operators

@settings(max_examples=30)
@given(seed=seeds, r=st.floats(0.01, 0.24), p=st.sampled_from([1, 2]))
def test_mollification_lemmas(seed, r, p):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3))
    mu, nu = random_cloud(rng, 4, d), random_cloud(rng, 3, d)
    mm, mn = mollify_measure(mu, r, n=4), mollify_measure(nu, r, n=4)
    W = lambda a, b: wasserstein_discrete(a, b, p, "torus")[0]  # noqa: E731
    assert W(mm, mn) <= W(mu, nu) + 1e-8
    assert W(mm, mu) <= r + 1e-8


def test_self_mollification_shrinks_with_r():
    mu = random_cloud(np.random.default_rng(1), 5, 1)
    vals = [wasserstein_discrete(mollify_measure(mu, r, n=6), mu, 2, "torus")[0]
            for r in (0.2, 0.1, 0.05, 0.025)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_stochastic_mollification_is_seeded_and_within_r():
    mu = random_cloud(np.random.default_rng(1), 50, 2)
    a = mollify_measure(mu, 0.1, mode="stochastic", seed=3)
    b = mollify_measure(mu, 0.1, mode="stochastic", seed=3)
    assert np.array_equal(a.points, b.points)
    dx = a.points[:, :2] - mu.points[:, :2]
    dx -= np.rint(dx)
    assert np.all(np.linalg.norm(dx, axis=1) < 0.1)


def test_grid_mollification_has_unit_mass():
    mu = random_cloud(np.random.default_rng(1), 5, 1)
    dens = mollify_measure(mu, 0.1, mode="grid", grid=128)
    assert dens.mean() == pytest.approx(1.0, abs=1e-12)
    # band-limited density: small Gibbs undershoot relative to the peak
    assert dens.min() > -0.01 * dens.max()


def test_filter_identity_and_constant():
    mu = random_cloud(np.random.default_rng(0), 6, 1)
    assert np.array_equal(filter_measure(mu, 0.0).points, mu.points)
    shifted = filter_measure(mu, 0.7)
    assert np.array_equal(shifted.points[:, 1], mu.points[:, 1] - 0.7)
    grid_vals = np.full(32, 0.7)
    assert np.allclose(filter_measure(mu, grid_vals).points, shifted.points, atol=1e-15)


@given(seed=seeds)
def test_filtering_lemma(seed):
    lhs, rhs, tol = trial_filtering(np.random.default_rng(seed))
    assert lhs <= rhs + tol


@given(seed=seeds)
def test_filtering_zero_field_equality(seed):
    lhs, rhs, _ = trial_filtering(np.random.default_rng(seed), zero=True)
    assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-15)


@given(seed=seeds, R=st.floats(1.0, 4.0), p=st.sampled_from([1, 2]))
def test_scaling_inequality(seed, R, p):
    rng = np.random.default_rng(seed)
    mu, nu = random_cloud(rng, 4, 1), random_cloud(rng, 5, 1)
    W = lambda a, b: wasserstein_discrete(a, b, p, "torus")[0]  # noqa: E731
    assert W(mu, nu) <= R * W(scale_measure(mu, R), scale_measure(nu, R)) + 1e-10


def test_scaling_inequality_fails_below_one():
    # pure position offset: W is unchanged by S_R, so R W(S_R mu, S_R nu) = R W < W
    mu, nu = cloud([[0.0, 0.0]]), cloud([[0.3, 0.0]])
    R = 0.5
    assert wasserstein_discrete(mu, nu)[0] > R * wasserstein_discrete(
        scale_measure(mu, R), scale_measure(nu, R))[0]


@given(seed=seeds, R=st.floats(0.1, 10.0))
def test_scale_roundtrip(seed, R):
    mu = random_cloud(np.random.default_rng(seed), 5, 2)
    back = scale_measure(scale_measure(mu, R), 1 / R)
    assert np.allclose(back.points, mu.points, rtol=1e-14)
    assert np.array_equal(scale_measure(mu, 1.0).points, mu.points)


def test_quantile_formula_p2_matches_lp():
    rng = np.random.default_rng(4)
    xa, xb = rng.uniform(-0.5, 0.5, 5), rng.uniform(-0.5, 0.5, 3)
    wa, wb = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(3))
    lp = wasserstein_discrete(cloud(xa[:, None], wa), cloud(xb[:, None], wb), 2)[0]
    assert abs(wp_1d(xa, wa, xb, wb, 2) - lp) <= 1e-12
