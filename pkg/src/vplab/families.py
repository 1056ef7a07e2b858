"""Initial-density families: separable densities rho0(x) g(v) on T^d x R^d.

rho0(x) = 1 + amplitude * cos(2 pi mode x_1) and g is a product of identical
one-dimensional velocity profiles, optionally shifted by a drift v0.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

FAMILIES = ("uniform", "bump", "monokinetic", "custom")


def _bump1(v):
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    m = np.abs(v) < 1
    out[m] = np.exp(-1.0 / (1.0 - v[m] ** 2))
    return out


def _bump_cdf_table(n=20001):
    t = np.linspace(-1.0, 1.0, n)
    y = _bump1(t)
    c = np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))])
    return t, c / c[-1]


_BUMP_T, _BUMP_C = _bump_cdf_table()
_GL_T, _GL_W = np.polynomial.legendre.leggauss(400)
_BUMP_Z = float(np.sum(_GL_W * _bump1(_GL_T)))


@dataclass(frozen=True)
class InitialDensity:
    """Named separable initial density.

    family: 'uniform' (g uniform on [v0-vwidth, v0+vwidth]), 'bump' (smooth
    compact bump of radius vwidth centred at v0), 'monokinetic' (g = Dirac at v0)
    or 'custom' (rejection sampling of `custom(x, v)` bounded by `envelope`
    on T^d x [-vwidth, vwidth]^d; x and v have shape (..., d) and the callable
    returns shape (...)).
    """

    family: str = "bump"
    d: int = 1
    amplitude: float = 0.0
    mode: int = 1
    vwidth: float = 0.5
    v0: float = 0.0
    custom: Optional[Callable] = None
    envelope: float = 1.0
    min_efficiency: float = 0.05

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if abs(self.amplitude) > 1:
            raise DomainError("|amplitude| > 1 makes rho0 negative")
        if self.vwidth <= 0:
            raise DomainError("vwidth must be positive")
        if self.family == "custom" and self.custom is None:
            raise DomainError("custom family needs a density callable")

    def describe(self):
        out = asdict(self)
        out.pop("custom")
        return out

    @property
    def homogeneous(self):
        return self.amplitude == 0.0 and self.family != "custom"

    @property
    def vsupport(self):
        """Largest |v| carrying mass."""
        if self.family == "monokinetic":
            return abs(self.v0)
        return abs(self.v0) + self.vwidth

    # --- densities -------------------------------------------------------
    def rho0(self, x1):
        return 1.0 + self.amplitude * np.cos(2 * np.pi * self.mode * np.asarray(x1, dtype=float))

    def vprofile(self, v):
        """One-dimensional velocity density (monokinetic has none)."""
        u = (np.asarray(v, dtype=float) - self.v0) / self.vwidth
        if self.family == "uniform":
            return np.where(np.abs(u) <= 1, 0.5 / self.vwidth, 0.0)
        if self.family == "bump":
            return _bump1(u) / (_BUMP_Z * self.vwidth)
        raise DomainError(f"family {self.family!r} has no velocity density")

    # --- sampling --------------------------------------------------------
    def _sample_x1(self, n, rng):
        u = rng.random(n)
        if self.amplitude == 0:
            return u - 0.5
        a, m = self.amplitude, self.mode
        lo = np.full(n, -0.5)
        hi = np.full(n, 0.5)
        # bisection on F(x) = x + 1/2 + a sin(2 pi m x)/(2 pi m), monotone for |a| <= 1
        for _ in range(55):
            mid = 0.5 * (lo + hi)
            F = mid + 0.5 + a * np.sin(2 * np.pi * m * mid) / (2 * np.pi * m)
            below = F < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def _sample_v1(self, n, rng):
        if self.family == "monokinetic":
            return np.full(n, float(self.v0))
        u = rng.random(n)
        if self.family == "uniform":
            return self.v0 + self.vwidth * (2 * u - 1)
        return self.v0 + self.vwidth * np.interp(u, _BUMP_C, _BUMP_T)

    def sample(self, n, rng):
        """n i.i.d. draws, returned as (positions (n,d), velocities (n,d))."""
        if n < 1:
            raise DomainError("need at least one sample")
        if self.family == "custom":
            return self._sample_rejection(n, rng)
        x = np.empty((n, self.d))
        v = np.empty((n, self.d))
        x[:, 0] = self._sample_x1(n, rng)
        for a in range(1, self.d):
            x[:, a] = rng.random(n) - 0.5
        for a in range(self.d):
            v[:, a] = self._sample_v1(n, rng)
        return x, v

    def _sample_rejection(self, n, rng):
        d, w = self.d, self.vwidth
        box = (2 * w) ** d
        pilot = 4096
        xs = rng.random((pilot, d)) - 0.5
        vs = w * (2 * rng.random((pilot, d)) - 1)
        acc = rng.random(pilot) * self.envelope <= self.custom(xs, vs)
        eff = acc.mean()
        if eff < self.min_efficiency:
            raise DomainError(
                f"rejection efficiency {eff:.3g} below {self.min_efficiency}; "
                f"tighten the envelope (current {self.envelope}, box volume {box:.3g})")
        out_x, out_v = [xs[acc]], [vs[acc]]
        have = int(acc.sum())
        while have < n:
            m = int(1.2 * (n - have) / max(eff, 1e-3)) + 16
            xs = rng.random((m, d)) - 0.5
            vs = w * (2 * rng.random((m, d)) - 1)
            acc = rng.random(m) * self.envelope <= self.custom(xs, vs)
            out_x.append(xs[acc])
            out_v.append(vs[acc])
            have += int(acc.sum())
        return np.concatenate(out_x)[:n], np.concatenate(out_v)[:n]

    # --- gridding (d = 1) ------------------------------------------------
    def on_grid(self, x, v):
        """f(x_i, v_j) on a 1D phase grid, normalized so that sum_j g dv = 1 exactly."""
        if self.d != 1:
            raise DomainError("phase-space grids are one-dimensional in x and v")
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        dv = v[1] - v[0]
        if self.family == "monokinetic":
            g = np.zeros_like(v)
            j = int(np.argmin(np.abs(v - self.v0)))
            g[j] = 1.0 / dv
        elif self.family == "custom":
            X, V = np.meshgrid(x, v, indexing="ij")
            f = np.asarray(self.custom(X[..., None], V[..., None]), dtype=float)
            return f / (f.sum() * (x[1] - x[0]) * dv)
        else:
            g = self.vprofile(v)
            g = g / (g.sum() * dv)
        rho = self.rho0(x)
        rho = rho / rho.mean()
        return rho[:, None] * g[None, :]


def quasineutral_family(a, eps, vwidth=0.5, mode=1, family="bump"):
    """Perturbed equilibrium whose density perturbation scales like a*eps.

    With rho0 - 1 = a eps cos(2 pi x) the initial field satisfies
    eps E(0) = a sin(2 pi x) / (2 pi): an O(1) plasma oscillation that the
    filtering corrector removes, while f0 -> g0 as eps -> 0.
    """
    return InitialDensity(family=family, amplitude=a * eps, mode=mode, vwidth=vwidth)
