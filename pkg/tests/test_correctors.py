import numpy as np
import pytest
from hypothesis import given, strategies as st

from vplab.correctors import (CorrectorState, corrector_evolve, corrector_init,
                              corrector_init_fields, corrector_R, curl_max,
                              gradient_projection)
from vplab.errors import CFLError, DomainError, NormalizationError
from vplab.families import InitialDensity, quasineutral_family
from vplab.vlasov import PhaseSpaceGrid

M = 64
X = -0.5 + (np.arange(M) + 0.5) / M


def const_state(dp, j=0.0, eps=0.1):
    dp = np.broadcast_to(np.asarray(dp, complex), (1, M)).copy()
    return CorrectorState(dp, np.conj(dp), np.full((1, M), float(j)), eps)


# ---------------------------------------------------------------- init

def test_homogeneous_gives_zero_correctors():
    f0 = PhaseSpaceGrid.from_family(InitialDensity("bump", 1, 0.0), M, 128, 1.0, 0.1)
    st_ = corrector_init(f0, 0.1)
    assert np.max(np.abs(st_.d_plus)) < 1e-14


def test_sine_field_gives_half_amplitude_real_corrector():
    a = 0.7
    st_ = corrector_init_fields((a * np.sin(2 * np.pi * X))[None], np.zeros((1, M)), 0.1)
    assert np.allclose(st_.d_plus, a / 2 * np.sin(2 * np.pi * X), atol=1e-15)
    assert np.max(np.abs(st_.d_plus.imag)) < 1e-16


def test_init_from_grid_matches_closed_form():
    # rho0 - 1 = a eps cos(2 pi x): eps E(0) = a sin(2 pi x) / (2 pi), so d+ = a sin / (4 pi)
    a, eps = 0.5, 0.1
    f0 = PhaseSpaceGrid.from_family(quasineutral_family(a, eps), M, 128, 1.0, eps)
    st_ = corrector_init(f0, eps)
    assert np.allclose(st_.d_plus[0], a * np.sin(2 * np.pi * X) / (4 * np.pi), atol=1e-14)


@given(seed=st.integers(0, 2**32 - 1))
def test_conjugate_pairing(seed):
    rng = np.random.default_rng(seed)
    st_ = corrector_init_fields(rng.standard_normal((1, M)), rng.standard_normal((1, M)), 0.2)
    assert np.array_equal(st_.d_minus, np.conj(st_.d_plus))
    R, _ = corrector_R(st_, float(rng.uniform(0, 3)))
    assert np.isrealobj(R.values)


def test_init_rejects_unnormalized():
    f0 = PhaseSpaceGrid(np.full((M, 16), 0.6), 1.0)
    with pytest.raises(NormalizationError):
        corrector_init(f0, 0.1)


def test_unknown_frequency():
    with pytest.raises(DomainError):
        corrector_init_fields(np.zeros((1, M)), np.zeros((1, M)), 0.1, frequency="bad")


@given(seed=st.integers(0, 2**32 - 1))
def test_two_dimensional_init_is_curl_free(seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((2, 16, 16))
    st_ = corrector_init_fields(w, rng.standard_normal((2, 16, 16)), 0.1)
    assert curl_max(st_.d_plus) <= 1e-8
    assert np.allclose(gradient_projection(st_.d_plus), st_.d_plus, atol=1e-12)


# ---------------------------------------------------------------- R

def test_zero_correctors_give_zero_R():
    R, g = corrector_R(const_state(0.0), 1.3)
    assert np.all(R.values == 0) and g == 0


@given(t=st.floats(0, 10), eps=st.floats(0.01, 1.0))
def test_constant_correctors_give_cosine(t, eps):
    st_ = CorrectorState(np.full((1, M), 0.5j), np.full((1, M), -0.5j), np.zeros((1, M)), eps)
    R, _ = corrector_R(st_, t)
    assert np.allclose(R.values, np.cos(t / eps), atol=1e-12)


@given(t=st.floats(0, 5))
def test_R_period(t):
    eps = 0.1
    st_ = corrector_init_fields((0.3 * np.sin(2 * np.pi * X))[None],
                                (0.2 * np.cos(2 * np.pi * X))[None], eps)
    R1, _ = corrector_R(st_, t)
    R2, _ = corrector_R(st_, t + 2 * np.pi * eps)
    assert np.allclose(R1.values, R2.values, atol=1e-10)


def test_R_imaginary_residue_rejected():
    dp = np.full((1, M), 0.5 + 0.1j)
    bad = CorrectorState(dp, dp.copy(), np.zeros((1, M)), 0.1)
    with pytest.raises(DomainError, match="imaginary"):
        corrector_R(bad, 0.3)


def test_sqrt_eps_frequency():
    st_ = CorrectorState(np.full((1, M), 0.5j), np.full((1, M), -0.5j), np.zeros((1, M)),
                         0.04, frequency="sqrt_eps")
    R, _ = corrector_R(st_, 0.3)
    assert np.allclose(R.values, np.cos(0.3 / 0.2), atol=1e-14)
    assert st_.omega == pytest.approx(5.0)


def test_grad_R_bounded_uniformly_in_eps():
    sups = []
    for eps in (0.2, 0.1, 0.05, 0.025):
        st_ = corrector_init_fields((0.3 * np.sin(2 * np.pi * X))[None], np.zeros((1, M)), eps)
        sups.append(max(corrector_R(st_, t)[1] for t in np.linspace(0, 1, 101)))
    assert max(sups) <= 2 * np.pi * 0.3 * 1.01


# ---------------------------------------------------------------- evolution

def test_zero_momentum_is_stationary():
    st_ = corrector_init_fields((0.3 * np.sin(2 * np.pi * X))[None], np.zeros((1, M)), 0.1)
    traj = corrector_evolve(st_, 1.0, 0.05)
    assert all(np.array_equal(s.d_plus, st_.d_plus) for s in traj.states)


@given(u=st.floats(-1.0, 1.0), T=st.floats(0.1, 1.0))
def test_constant_momentum_translates(u, T):
    d0 = np.exp(2j * np.pi * X) * 0.3 + 0.1 * np.sin(4 * np.pi * X)
    st_ = CorrectorState(d0[None], np.conj(d0)[None], np.full((1, M), u), 0.1)
    dt = T / 20
    traj = corrector_evolve(st_, T, dt)
    Tn = traj.times[-1]
    ref = np.exp(2j * np.pi * (X - u * Tn)) * 0.3 + 0.1 * np.sin(4 * np.pi * (X - u * Tn))
    assert np.allclose(traj.states[-1].d_plus[0], ref, atol=1e-12)


def test_variable_momentum_preserves_mean_and_conjugacy():
    d0 = 0.2 + 0.3 * np.exp(2j * np.pi * X)
    j = 0.3 * np.cos(2 * np.pi * X)
    st_ = CorrectorState(d0[None], np.conj(d0)[None], j[None], 0.1)
    traj = corrector_evolve(st_, 1.0, 0.01)
    for s in traj.states:
        assert abs(s.d_plus.mean() - d0.mean()) <= 1e-10
        assert np.array_equal(s.d_minus, np.conj(s.d_plus))
    assert traj.at(0.5).time == pytest.approx(0.5)


def test_cfl_violation():
    st_ = const_state(0.1, j=5.0)
    with pytest.raises(CFLError):
        corrector_evolve(st_, 1.0, 0.1)


def test_evolution_is_one_dimensional():
    st_ = corrector_init_fields(np.zeros((2, 8, 8)), np.zeros((2, 8, 8)), 0.1)
    with pytest.raises(DomainError):
        corrector_evolve(st_, 1.0, 0.1)
