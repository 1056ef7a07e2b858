"""Torus Green function, mollifiers and tabulated mollified force kernels.

Conventions
-----------
Fourier coefficients are taken with g(x) = sum_k ghat(k) exp(2 pi i k.x), so
ghat = fftn(g_grid) / M**d for samples on the grid x_j = j/M.  The Green
function solves Laplace G = delta_0 - 1 with zero mean, hence
Ghat(k) = -1 / (4 pi^2 |k|^2), and K = grad G.

Tables keep modes with |k_a| < M/2 on every axis; the Nyquist shell is set to
zero so that odd fields stay exactly odd and real on the grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .errors import DomainError, ResolutionError

MIN_CELLS_PER_R = 8


# ---------------------------------------------------------------------------
# closed-form 1D kernel
# ---------------------------------------------------------------------------

def green_kernel_1d(x):
    """Closed-form G and K = G' on T^1 for x in [-1/2, 1/2].

    G(x) = -x^2/2 + |x|/2 - 1/12,  K(x) = -x + sign(x)/2, with K(0) = 0.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 0.5):
        raise DomainError("green_kernel_1d expects x in [-1/2, 1/2]")
    G = -0.5 * x * x + 0.5 * np.abs(x) - 1.0 / 12.0
    K = -x + 0.5 * np.sign(x)
    if G.ndim == 0:
        return float(G), float(K)
    return G, K


# ---------------------------------------------------------------------------
# wavenumber helpers
# ---------------------------------------------------------------------------

def wavenumbers(M, d, real=False):
    """Integer wavevector components in FFT layout, broadcastable.

    With real=True the last axis follows the rfftn half-spectrum layout.
    """
    ks = []
    for a in range(d):
        if real and a == d - 1:
            k = np.arange(M // 2 + 1, dtype=float)
        else:
            k = np.fft.fftfreq(M, 1.0 / M)
        shape = [1] * d
        shape[a] = k.size
        ks.append(k.reshape(shape))
    return ks


def _irfftn(a, shape):
    """Inverse real FFT over the trailing len(shape) axes."""
    return np.fft.irfftn(a, s=shape, axes=tuple(range(-len(shape), 0)))


def _nyquist_mask(ks, M):
    mask = np.zeros(np.broadcast_shapes(*[k.shape for k in ks]), dtype=bool)
    for k in ks:
        mask = mask | (np.abs(k) >= M / 2)
    return mask


def _check_M(M):
    if M < 2 or M % 2:
        raise DomainError(f"grid size must be even and >= 2, got {M}")


def kernel_fourier(d, M):
    """Fourier tables (Ghat, Khat) on the full FFT grid of M**d modes.

    Khat has shape (d, M, ..., M).  Ghat(0) = Khat(0) = 0.  Nyquist modes are
    kept here (this is the bare symbol); tables built from it zero them.
    """
    _check_M(M)
    if d not in (1, 2, 3):
        raise DomainError(f"dimension must be 1, 2 or 3, got {d}")
    ks = wavenumbers(M, d)
    k2 = sum(k * k for k in ks)
    Ghat = np.zeros(k2.shape)
    nz = k2 > 0
    Ghat[nz] = -1.0 / (4.0 * np.pi**2 * k2[nz])
    Khat = np.stack([2j * np.pi * np.broadcast_to(k, k2.shape) * Ghat for k in ks])
    return Ghat, Khat


# ---------------------------------------------------------------------------
# mollifier
# ---------------------------------------------------------------------------

def _bump(rho):
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    inside = rho < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - rho[inside] ** 2))
    return out


PROFILES = {"bump": _bump}
_SURFACE = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}


def _gauss_legendre01(n):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


def _radial_weight(t, d):
    return _SURFACE[d] * t ** (d - 1)


def _radial_kernel(s, t, d):
    # angular average of exp(-2 pi i s.x) at radius t, times surface measure
    z = 2.0 * np.pi * np.multiply.outer(s, t)
    if d == 1:
        return 2.0 * np.cos(z)
    if d == 2:
        return 2.0 * np.pi * t * special.j0(z)
    return 4.0 * np.pi * t * t * np.sinc(z / np.pi)


@dataclass(frozen=True)
class MollifierSpec:
    """Scaled radial mollifier chi_r(x) = r^-d chi(x/r), mass one."""

    r: float
    profile: str = "bump"

    def __post_init__(self):
        if not (0.0 < self.r < 0.5):
            raise DomainError(f"mollification radius must lie in (0, 1/2), got {self.r}")
        if self.profile not in PROFILES:
            raise DomainError(f"unknown mollifier profile {self.profile!r}")

    def _norm(self, d):
        t, w = _gauss_legendre01(400)
        return float(np.sum(w * PROFILES[self.profile](t) * _radial_weight(t, d)))

    def __call__(self, x):
        """Evaluate chi_r at points x of shape (..., d)."""
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        rho = np.linalg.norm(x, axis=-1) / self.r
        return PROFILES[self.profile](rho) / (self._norm(d) * self.r**d)

    def mass(self, d):
        """Mass of chi_r by adaptive quadrature (independent of the GL normalization)."""
        prof = PROFILES[self.profile]
        val, _ = integrate.quad(lambda t: float(prof(t)) * _radial_weight(t, d), 0.0, 1.0,
                                epsabs=1e-14, epsrel=1e-13, limit=200)
        return val / self._norm(d)

    def hat(self, knorm, d):
        """Fourier coefficient chihat_r(|k|) for integer-valued wavevector norms."""
        knorm = np.asarray(knorm, dtype=float)
        s = self.r * knorm
        return _profile_hat(s, d, self.profile)


def _profile_hat_direct(s, d, profile):
    s = np.asarray(s, dtype=float)
    smax = float(s.max()) if s.size else 0.0
    n = int(80 + 4 * smax)
    t, w = _gauss_legendre01(n)
    phi = PROFILES[profile](t) * w
    Z = float(np.sum(phi * _radial_weight(t, d)))
    out = np.empty(s.shape)
    flat = s.ravel()
    res = out.reshape(-1)
    step = max(1, 2_000_000 // n)
    for i in range(0, flat.size, step):
        res[i:i + step] = _radial_kernel(flat[i:i + step], t, d) @ phi / Z
    return out


# beyond this argument |chihat| < 1e-17 for the bump profile
_S_CUT = 160.0


def _profile_hat(s, d, profile):
    s = np.asarray(s, dtype=float)
    flat = s.ravel()
    uniq, inv = np.unique(flat, return_inverse=True)
    if uniq.size <= 60000:
        return _profile_hat_direct(uniq, d, profile)[inv].reshape(s.shape)
    # many distinct radii (large d>=2 grids): dense table + cubic spline
    top = min(float(uniq[-1]), _S_CUT)
    grid = np.linspace(0.0, top, int(512 * top) + 2)
    spline = CubicSpline(grid, _profile_hat_direct(grid, d, profile))
    vals = np.where(uniq <= top, spline(np.minimum(uniq, top)), 0.0)
    return vals[inv].reshape(s.shape)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelTable:
    """Tabulated eps^-2 chi_r*chi_r*K (kind='force') or eps^-2 chi_r*G*chi_r (kind='green').

    Spectral data use the rfftn layout.  `values` and `coeffs` are computed lazily
    and cached; the table is otherwise immutable.
    """

    d: int
    M: int
    eps: float
    r: float
    profile: str = "bump"
    kind: str = "force"
    chi_hat: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def grid_size(self):
        return self.M

    @property
    def x(self):
        return np.arange(self.M) / self.M

    @cached_property
    def _k(self):
        return wavenumbers(self.M, self.d, real=True)

    @cached_property
    def _ghat(self):
        ks = self._k
        k2 = sum(k * k for k in ks)
        G = np.zeros(k2.shape)
        nz = k2 > 0
        G[nz] = -1.0 / (4.0 * np.pi**2 * k2[nz])
        G[_nyquist_mask(ks, self.M)] = 0.0
        return G

    @cached_property
    def green_coeffs(self):
        """eps^-2 chihat^2 Ghat (real, rfftn layout)."""
        return self._ghat * self.chi_hat**2 / self.eps**2

    @cached_property
    def coeffs(self):
        """Spectral coefficients of the tabulated field, rfftn layout.

        kind='force': shape (d, ...) with eps^-2 chihat^2 2 pi i k Ghat.
        kind='green': eps^-2 chihat^2 Ghat.
        """
        if self.kind == "green":
            return self.green_coeffs
        gc = self.green_coeffs
        return np.stack([2j * np.pi * k * gc for k in self._k])

    @cached_property
    def green_full(self):
        """eps^-2 chihat^2 Ghat on the full FFT grid."""
        ks = wavenumbers(self.M, self.d)
        k2 = sum(k * k for k in ks)
        G = np.zeros(k2.shape)
        nz = k2 > 0
        G[nz] = -1.0 / (4.0 * np.pi**2 * k2[nz])
        G[_nyquist_mask(ks, self.M)] = 0.0
        chi = MollifierSpec(self.r, self.profile).hat(np.sqrt(k2), self.d)
        return G * chi**2 / self.eps**2

    @property
    def fourier_coeffs(self):
        """Force coefficients on the full FFT grid, shape (d, M, ..., M)."""
        ks = wavenumbers(self.M, self.d)
        return np.stack([2j * np.pi * k * self.green_full for k in ks])

    @cached_property
    def half_modes(self):
        """(kv, ghat): non-Nyquist wavevectors of one half-space and eps^-2 chihat^2 Ghat."""
        ks = wavenumbers(self.M, self.d)
        grids = np.meshgrid(*[k.ravel() for k in ks], indexing="ij")
        kv = np.stack([g.ravel() for g in grids], axis=1)
        first = np.zeros(len(kv))
        for a in range(self.d - 1, -1, -1):
            first = np.where(kv[:, a] != 0, kv[:, a], first)
        keep = (first > 0) & (np.abs(kv) < self.M / 2).all(axis=1)
        kv = kv[keep]
        k2 = (kv**2).sum(axis=1)
        chi = MollifierSpec(self.r, self.profile).hat(np.sqrt(k2), self.d)
        return kv, -chi**2 / (4 * np.pi**2 * k2 * self.eps**2)

    @cached_property
    def values(self):
        """Field sampled at x_j = j/M (FFT order); shape (d, M, ...) or (M, ...)."""
        shape = (self.M,) * self.d
        scale = float(self.M) ** self.d
        if self.kind == "green":
            return _irfftn(self.coeffs, shape) * scale
        return np.stack([_irfftn(c, shape) * scale for c in self.coeffs])

    def convolve(self, density):
        """Apply the tabulated kernel to (density - 1) sampled on the table grid."""
        density = np.asarray(density, dtype=float)
        if density.shape != (self.M,) * self.d:
            raise ResolutionError(f"density shape {density.shape} does not match table grid")
        rh = np.fft.rfftn(density)
        shape = density.shape
        if self.kind == "green":
            return _irfftn(self.coeffs * rh, shape)
        return np.stack([_irfftn(c * rh, shape) for c in self.coeffs])


def _build_table(spec, eps, M, d, kind):
    _check_M(M)
    if d not in (1, 2, 3):
        raise DomainError(f"dimension must be 1, 2 or 3, got {d}")
    if eps <= 0:
        raise DomainError("eps must be positive")
    if spec.r >= 0.25:
        raise DomainError(f"r = {spec.r} >= 1/4: two mollifications do not fit the fundamental domain")
    if M * spec.r < MIN_CELLS_PER_R:
        need = int(np.ceil(MIN_CELLS_PER_R / spec.r))
        need += need % 2
        raise ResolutionError(
            f"grid of {M} cells resolves r = {spec.r} with {M * spec.r:.2f} cells; "
            f"need at least {MIN_CELLS_PER_R} (M >= {need})")
    ks = wavenumbers(M, d, real=True)
    knorm = np.sqrt(sum(k * k for k in ks))
    chi = spec.hat(knorm, d)
    return KernelTable(d=d, M=M, eps=float(eps), r=float(spec.r), profile=spec.profile,
                       kind=kind, chi_hat=chi)


def mollified_force_table(spec, eps, grid_size, d=1):
    """Tabulate eps^-2 chi_r*chi_r*K through chihat_r^2 Khat."""
    return _build_table(spec, eps, grid_size, d, "force")


def mollified_green_table(spec, eps, grid_size, d=1):
    """Tabulate eps^-2 chi_r*G*chi_r (used for the regularized potential energy)."""
    return _build_table(spec, eps, grid_size, d, "green")


# ---------------------------------------------------------------------------
# Lipschitz estimate of chi_r * K * h
# ---------------------------------------------------------------------------

def _smoothed_field(table, density):
    """Components of chi_r*K*h on the table grid (single mollification, no eps)."""
    shape = (table.M,) * table.d
    hh = np.fft.rfftn(np.asarray(density, dtype=float))
    base = table._ghat * table.chi_hat * hh
    del hh
    comps = []
    for k in table._k:
        comps.append(_irfftn(2j * np.pi * k * base, shape))
    return comps


def _sigma_max_2x2(a, b, c, d):
    s = a * a + b * b + c * c + d * d
    det = a * d - b * c
    return np.sqrt(0.5 * (s + np.sqrt(np.maximum(s * s - 4.0 * det * det, 0.0))))


def lipschitz_estimate(table, density, block=512):
    """Sup over grid nodes of the central-difference Jacobian norm of chi_r*K*h.

    The Jacobian norm is the spectral (operator) norm.  Work is done in row blocks
    so that 8192^2 grids in d=2 stay within a few GB.
    """
    density = np.asarray(density, dtype=float)
    if density.shape != (table.M,) * table.d:
        raise ResolutionError("density must be sampled on the table grid")
    if density.min() < 0:
        raise DomainError("density must be nonnegative")
    M, d = table.M, table.d
    h = 1.0 / M
    F = _smoothed_field(table, density)
    if d == 1:
        f = F[0]
        return float(np.max(np.abs(np.roll(f, -1) - np.roll(f, 1))) / (2 * h))
    best = 0.0
    for i0 in range(0, M, block):
        i1 = min(M, i0 + block)
        rows = np.arange(i0 - 1, i1 + 1) % M
        J = []
        for comp in F:
            loc = comp[rows]
            J.append([(loc[2:] - loc[:-2]) / (2 * h)]
                     + [(np.roll(loc[1:-1], -1, axis=b) - np.roll(loc[1:-1], 1, axis=b)) / (2 * h)
                        for b in range(1, d)])
        if d == 2:
            sig = _sigma_max_2x2(J[0][0], J[0][1], J[1][0], J[1][1])
        else:
            mat = np.stack([np.stack(row, axis=-1) for row in J], axis=-2)
            sig = np.linalg.norm(mat, ord=2, axis=(-2, -1))
        best = max(best, float(sig.max()))
    return best


# ---------------------------------------------------------------------------
# analytic norm
# ---------------------------------------------------------------------------

class AnalyticNorm(NamedTuple):
    value: float
    tail_bound: float
    kmax: float
    dropped: int


def fourier_coeffs(values):
    """Fourier coefficients ghat(k) of grid samples (FFT layout)."""
    values = np.asarray(values)
    return np.fft.fftn(values) / values.size


def analytic_norm(coeffs, delta0, rtol=1e-14):
    """sum_k |ghat(k)| delta0^|k| over the resolved modes, with a tail estimate.

    Coefficients below rtol * max|ghat| are treated as round-off and dropped
    (their count is reported).  The tail estimate extrapolates the geometric
    decay of the outer shells; it is inf when no decay is visible.
    """
    if not delta0 > 1:
        raise DomainError("analytic norm needs delta0 > 1")
    c = np.abs(np.asarray(coeffs))
    M = c.shape[0]
    ks = wavenumbers(M, c.ndim)
    knorm = np.sqrt(sum(np.broadcast_to(k, c.shape) ** 2 for k in ks))
    keep = c > rtol * c.max() if c.max() > 0 else np.zeros(c.shape, bool)
    dropped = int(np.count_nonzero((c > 0) & ~keep))
    logd = np.log(delta0)
    big = knorm * logd > np.log(np.finfo(float).max) - np.log(max(c.max(), 1e-300)) - 1
    bad = keep & big
    if np.any(bad):
        idx = np.unravel_index(np.argmin(np.where(bad, knorm, np.inf)), c.shape)
        mode = tuple(int(k.ravel()[i] if k.size > 1 else k.ravel()[0])
                     for k, i in zip(ks, idx))
        raise OverflowError(f"delta0**|k| overflows at mode k={mode}")
    terms = np.where(keep, c * np.exp(knorm * logd), 0.0)
    value = float(terms.sum())
    # tail: radial shell maxima over the outer half of the spectrum
    shells = np.rint(knorm).astype(int)
    nmax = int(shells.max())
    prof = np.zeros(nmax + 1)
    np.maximum.at(prof, shells.ravel(), terms.ravel())
    lo = max(1, nmax // 2)
    tail_part = prof[lo:]
    nz = np.nonzero(tail_part > 0)[0]
    if nz.size == 0:
        tail = 0.0
    elif nz.size < 2:
        tail = float("inf")
    else:
        n = (nz + lo).astype(float)
        slope = np.polyfit(n, np.log(tail_part[nz]), 1)[0]
        if slope >= 0:
            tail = float("inf")
        else:
            q = np.exp(slope)
            per_shell = 2.0 * c.ndim * max(nmax, 1) ** (c.ndim - 1)
            tail = float(prof[-1] * per_shell * q / (1 - q))
    return AnalyticNorm(value, tail, float(knorm.max()), dropped)
