"""Plasma-oscillation correctors d+-, the oscillating field R and its diagnostics.

d+-(0) is the gradient (curl-free, zero-mean) part of (eps E(0) +- i j(0)) / 2;
in one dimension this is simply the zero-mean part.  d- = conj(d+) is enforced so
that R(t, x) = (1/i)(d+ e^{i w t} - d- e^{-i w t}) = 2 Im(d+ e^{i w t}) is real.
The default frequency is w = 1/eps; 'sqrt_eps' selects w = 1/sqrt(eps).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import CFLError, DomainError
from .kernels import wavenumbers
from .vlasov import SpatialField, moments, poisson_solve

FREQUENCIES = ("eps", "sqrt_eps")


@dataclass(frozen=True)
class CorrectorState:
    d_plus: np.ndarray
    d_minus: np.ndarray
    j: np.ndarray
    eps: float
    time: float = 0.0
    frequency: str = "eps"

    @property
    def omega(self):
        return 1.0 / (self.eps if self.frequency == "eps" else np.sqrt(self.eps))


def gradient_projection(w):
    """Curl-free, zero-mean part of a complex vector field w of shape (d, M, ..., M).

    Fourier symbol k (k . what) / |k|^2; in 1D it removes the mean.
    """
    w = np.asarray(w, dtype=complex)
    d = w.shape[0]
    M = w.shape[1]
    ks = wavenumbers(M, d)
    k2 = sum(k * k for k in ks)
    W = np.stack([np.fft.fftn(w[a]) for a in range(d)])
    div = sum(ks[a] * W[a] for a in range(d))
    with np.errstate(invalid="ignore", divide="ignore"):
        proj = [np.where(k2 > 0, ks[a] * div / np.where(k2 > 0, k2, 1), 0) for a in range(d)]
    return np.stack([np.fft.ifftn(p) for p in proj])


def curl_max(u):
    """Max modulus of the spectral curl components of a vector field (d >= 2)."""
    u = np.asarray(u)
    d, M = u.shape[0], u.shape[1]
    ks = wavenumbers(M, d)
    U = [np.fft.fftn(u[a]) for a in range(d)]
    out = 0.0
    for a in range(d):
        for b in range(a + 1, d):
            c = np.fft.ifftn(2j * np.pi * (ks[a] * U[b] - ks[b] * U[a]))
            out = max(out, float(np.abs(c).max()))
    return out


def corrector_init_fields(epsE, j, eps, limit_j=None, frequency="eps"):
    """d+-(0) from eps E(0) and j(0) given as (d, M, ..., M) arrays (any d)."""
    if frequency not in FREQUENCIES:
        raise DomainError(f"frequency must be one of {FREQUENCIES}")
    epsE = np.asarray(epsE, dtype=float)
    j = np.asarray(j, dtype=float)
    dp = gradient_projection((epsE + 1j * j) / 2)
    jl = j if limit_j is None else np.asarray(limit_j, dtype=float)
    return CorrectorState(dp, np.conj(dp), jl, float(eps), 0.0, frequency)


def corrector_init(f0, eps, limit_j=None, frequency="eps"):
    """Correctors of a 1D PhaseSpaceGrid f0; fields are stored as (1, Mx) arrays.

    limit_j is the momentum density of the limit solution transporting d+-;
    by default the initial momentum j(0) of f0 is used.
    """
    rho, j, _ = moments(f0)
    _, E = poisson_solve(rho, eps)
    jl = None if limit_j is None else np.atleast_2d(limit_j)
    return corrector_init_fields(eps * E.values[None, :], j.values[None, :], eps, jl, frequency)


class CorrectorTrajectory(NamedTuple):
    times: np.ndarray
    states: list

    def at(self, t):
        """State at the stored time nearest to t."""
        i = int(np.argmin(np.abs(self.times - t)))
        return self.states[i]


def corrector_evolve(state, T, dt, cfl_max=4.0):
    """Transport d+- by the limit momentum: d_t d + j d_x d = c(t), mean preserved (1D).

    Constant j is done exactly by a spectral shift; otherwise semi-Lagrangian with
    a midpoint foot and periodic cubic splines, then the mean is restored.
    """
    if state.d_plus.shape[0] != 1:
        raise DomainError("corrector evolution is implemented in one dimension")
    j = state.j[0]
    M = j.size
    dx = 1.0 / M
    cfl = float(np.abs(j).max()) * dt / dx
    if cfl > cfl_max:
        raise CFLError(f"corrector CFL {cfl:.3g} exceeds {cfl_max}")
    nsteps = int(round(T / dt))
    times = [state.time]
    states = [state]
    d = state.d_plus[0].copy()
    mean0 = d.mean()
    const = np.ptp(j) <= 1e-14 * max(1.0, np.abs(j).max())
    k = np.fft.fftfreq(M, 1.0 / M)
    idx = np.arange(M, dtype=float)
    still = not np.any(j)
    for n in range(1, nsteps + 1):
        if still:
            pass
        elif const:
            d = np.fft.ifft(np.fft.fft(d) * np.exp(-2j * np.pi * k * j[0] * dt))
        else:
            jmid = np.interp(idx - 0.5 * j * dt / dx, idx, j, period=M)
            foot = idx - jmid * dt / dx
            re = ndimage.map_coordinates(d.real, [foot], order=3, mode="grid-wrap")
            im = ndimage.map_coordinates(d.imag, [foot], order=3, mode="grid-wrap")
            d = re + 1j * im
        if not still:
            d = d - (d.mean() - mean0)
        t = state.time + n * dt
        times.append(t)
        states.append(replace(state, d_plus=d[None, :].copy(), d_minus=np.conj(d)[None, :],
                              time=t))
    return CorrectorTrajectory(np.array(times), states)


def corrector_R(state, t, frequency=None, tol=1e-12):
    """R(t, x) and the sup of its central-difference gradient.

    Returns (SpatialField with values of shape (d, M, ...), grad_sup).
    """
    freq = frequency or state.frequency
    w = 1.0 / (state.eps if freq == "eps" else np.sqrt(state.eps))
    Rc = -1j * (state.d_plus * np.exp(1j * w * t) - state.d_minus * np.exp(-1j * w * t))
    scale = max(1.0, float(np.abs(Rc).max()))
    resid = float(np.abs(Rc.imag).max())
    if resid > tol * scale:
        raise DomainError(f"R has imaginary residue {resid:.3g}; d- is not conj(d+)")
    R = Rc.real
    M = R.shape[1]
    h = 1.0 / M
    g = 0.0
    for a in range(R.shape[0]):
        for b in range(1, R.ndim):
            diff = (np.roll(R[a], -1, axis=b - 1) - np.roll(R[a], 1, axis=b - 1)) / (2 * h)
            g = max(g, float(np.abs(diff).max()))
    return SpatialField(R, "R"), g
