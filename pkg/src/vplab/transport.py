"""Wasserstein distances between weighted point clouds and phase-space densities,
plus the measure operators used in the stability lemmas (mollification,
filtering, velocity scaling) and the anisotropic coupling functional D.

Point clouds live on T^d x R^d with points stored as [x (d columns), v (d columns)].
The default cost is Euclidean on the fundamental domain [-1/2, 1/2)^d x R^d;
'torus' uses the geodesic distance in the x columns.
"""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from itertools import permutations
from typing import NamedTuple, Optional

import numpy as np
from scipy import sparse

for _b in ("PYTORCH", "JAX", "TENSORFLOW", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_b}", "1")
import ot  # noqa: E402

from .errors import DomainError, SizeError  # noqa: E402

METRICS = ("euclidean", "torus")
LP_MAX_ENTRIES = 4_000_000


@dataclass
class WeightedPointCloud:
    points: np.ndarray
    weights: Optional[np.ndarray] = None
    d: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        self.points = pts
        K = pts.shape[0]
        if self.weights is None:
            self.weights = np.full(K, 1.0 / K)
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (K,):
            raise ValueError("one weight per point required")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {w.sum():.15g}, not 1")
        self.weights = w / w.sum()
        if not np.isfinite(pts).all():
            raise ValueError("points must be finite")
        if self.d is None:
            self.d = max(1, pts.shape[1] // 2)

    @property
    def K(self):
        return self.points.shape[0]

    @classmethod
    def from_ensemble(cls, ens):
        return cls(ens.phase_points(), None, ens.d)


class TransportPlan(NamedTuple):
    plan: sparse.coo_matrix
    cost: float
    p: float
    metric: str
    source: WeightedPointCloud
    target: WeightedPointCloud


# ---------------------------------------------------------------------------
# costs
# ---------------------------------------------------------------------------

def pairwise_distance(a, b, d, metric="euclidean"):
    """Distance matrix between point sets a (K, m) and b (K', m)."""
    if metric not in METRICS:
        raise DomainError(f"metric must be one of {METRICS}")
    diff = a[:, None, :] - b[None, :, :]
    if metric == "torus":
        dx = diff[..., :d]
        diff[..., :d] = dx - np.rint(dx)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _cost(mu, nu, p, metric):
    if mu.points.shape[1] != nu.points.shape[1]:
        raise DomainError("clouds live in different dimensions")
    D = pairwise_distance(mu.points, nu.points, mu.d, metric)
    return D**p


# ---------------------------------------------------------------------------
# exact solvers
# ---------------------------------------------------------------------------

def wasserstein_discrete(mu, nu, p=2, metric="euclidean"):
    """Exact W_p and optimal plan by network simplex."""
    if mu.K * nu.K > LP_MAX_ENTRIES:
        raise SizeError(f"{mu.K} x {nu.K} plan exceeds {LP_MAX_ENTRIES} entries; "
                        "use sliced_w2 for a surrogate")
    C = _cost(mu, nu, p, metric)
    a = mu.weights
    b = nu.weights * (a.sum() / nu.weights.sum())
    G = ot.emd(a, b, C, numItermax=10_000_000)
    val = float(np.sum(G * C))
    plan = sparse.coo_matrix(np.where(G > 0, G, 0.0))
    return max(val, 0.0) ** (1.0 / p), TransportPlan(plan, val, p, metric, mu, nu)


def w2_discrete(mu, nu, metric="euclidean"):
    return wasserstein_discrete(mu, nu, 2, metric)


def brute_force_wasserstein(mu, nu, p=2, metric="euclidean"):
    """Exhaustive search over permutation couplings (uniform, equal-size clouds).

    For uniform weights the optimal plan can be taken to be a permutation
    (Birkhoff), so this is an exact oracle for K <= 8.
    """
    if mu.K != nu.K or not (np.allclose(mu.weights, 1 / mu.K) and np.allclose(nu.weights, 1 / nu.K)):
        raise DomainError("brute force needs uniform clouds of equal size")
    if mu.K > 8:
        raise SizeError("brute force limited to 8 atoms")
    C = _cost(mu, nu, p, metric)
    idx = np.arange(mu.K)
    best = min(C[idx, list(perm)].sum() for perm in permutations(range(mu.K)))
    return (best / mu.K) ** (1.0 / p)


def _quantile_pieces(x, w):
    order = np.argsort(x, kind="stable")
    return x[order], np.cumsum(w[order])


def wp_1d(mu_x, mu_w, nu_x, nu_w, p=1):
    """Exact W_p between 1D discrete measures via their quantile functions."""
    xa, ca = _quantile_pieces(np.asarray(mu_x, float), np.asarray(mu_w, float) / np.sum(mu_w))
    xb, cb = _quantile_pieces(np.asarray(nu_x, float), np.asarray(nu_w, float) / np.sum(nu_w))
    ca[-1] = cb[-1] = 1.0
    u = np.union1d(ca, cb)
    du = np.diff(np.concatenate([[0.0], u]))
    qa = xa[np.minimum(np.searchsorted(ca, u, side="left"), xa.size - 1)]
    qb = xb[np.minimum(np.searchsorted(cb, u, side="left"), xb.size - 1)]
    return float(np.sum(du * np.abs(qa - qb) ** p)) ** (1.0 / p)


def _circle_cost(theta, xa, ca, xb, cb, p):
    # int_0^1 |F^-1(u) - G^-1(u + theta)|^p du with G^-1 lifted periodically
    shifted = (cb - theta) % 1.0
    u = np.union1d(ca, shifted[(shifted > 0) & (shifted < 1)])
    lo = np.concatenate([[0.0], u[:-1]])
    du = u - lo
    mid = lo + 0.5 * du
    qa = xa[np.minimum(np.searchsorted(ca, mid), xa.size - 1)]
    up = mid + theta
    n = np.floor(up)
    qb = xb[np.minimum(np.searchsorted(cb, up - n), xb.size - 1)] + n
    return float(np.sum(du * np.abs(qa - qb) ** p))


def wp_circle(mu_x, mu_w, nu_x, nu_w, p=2, n_coarse=64):
    """Exact W_p on the unit circle between discrete measures.

    Uses the lifted-quantile formula W_p^p = min_theta int_0^1 |F^-1(u) -
    G^-1(u + theta)|^p du; the objective is convex in theta, so a coarse scan
    followed by bounded Brent refinement finds the minimum.
    """
    from scipy.optimize import minimize_scalar
    xa, ca = _quantile_pieces(np.asarray(mu_x, float) % 1.0, np.asarray(mu_w, float) / np.sum(mu_w))
    xb, cb = _quantile_pieces(np.asarray(nu_x, float) % 1.0, np.asarray(nu_w, float) / np.sum(nu_w))
    ca[-1] = cb[-1] = 1.0
    grid = np.linspace(-1.0, 1.0, n_coarse + 1)
    vals = [_circle_cost(t, xa, ca, xb, cb, p) for t in grid]
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_coarse)]
    res = minimize_scalar(_circle_cost, bounds=(lo, hi), args=(xa, ca, xb, cb, p),
                          method="bounded", options={"xatol": 1e-13})
    best = min(vals[i], float(res.fun))
    # the objective is a polynomial of degree p between the breakpoints
    # theta = cb_j - ca_i (mod 1): finish exactly on the pieces around the minimizer
    t0 = float(res.x)
    bp = np.subtract.outer(np.concatenate([[0.0], cb]), np.concatenate([[0.0], ca])).ravel()
    bp = np.unique(np.concatenate([bp - 1, bp, bp + 1]))
    j = int(np.searchsorted(bp, t0))
    knots = bp[max(j - 3, 0):j + 3]
    for a, b in zip(knots[:-1], knots[1:]):
        ends = [_circle_cost(a, xa, ca, xb, cb, p), _circle_cost(b, xa, ca, xb, cb, p)]
        best = min(best, *ends)
        if p == 2 and b > a:
            m = 0.5 * (a + b)
            fm = _circle_cost(m, xa, ca, xb, cb, p)
            curv = ends[0] - 2 * fm + ends[1]
            if curv > 0:
                tv = m + 0.25 * (b - a) * (ends[0] - ends[1]) / curv
                if a < tv < b:
                    best = min(best, _circle_cost(tv, xa, ca, xb, cb, p))
    return max(best, 0.0) ** (1.0 / p)


def _cell_segments(edges, mass):
    """Linear pieces of the quantile function of a piecewise-constant density:
    on [c_lo, c_hi] it runs linearly from x_lo to x_hi (empty cells skipped)."""
    mass = np.asarray(mass, float)
    edges = np.asarray(edges, float)
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    cdf /= cdf[-1]
    m = mass > 0
    return cdf[:-1][m], cdf[1:][m], edges[:-1][m], edges[1:][m]


def _eval_segments(seg, u_lo, u_hi):
    c0, c1, x0, x1 = seg
    mid = 0.5 * (u_lo + u_hi)
    i = np.minimum(np.searchsorted(c1, mid), c1.size - 1)
    slope = (x1[i] - x0[i]) / (c1[i] - c0[i])
    return x0[i] + slope * (u_lo - c0[i]), x0[i] + slope * (u_hi - c0[i])


def wp_1d_density(edges_a, mass_a, edges_b, mass_b, p=2):
    """Exact W_p (p in {1, 2}) between piecewise-constant 1D densities."""
    sa = _cell_segments(edges_a, mass_a)
    sb = _cell_segments(edges_b, mass_b)
    u = np.union1d(np.concatenate([sa[0], sa[1]]), np.concatenate([sb[0], sb[1]]))
    lo, hi = u[:-1], u[1:]
    ok = hi > lo
    lo, hi = lo[ok], hi[ok]
    a0, a1 = _eval_segments(sa, lo, hi)
    b0, b1 = _eval_segments(sb, lo, hi)
    d0, d1 = a0 - b0, a1 - b1
    h = hi - lo
    if p == 2:
        val = np.sum(h * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0)
        return float(np.sqrt(max(val, 0.0)))
    if p == 1:
        same = d0 * d1 >= 0
        a0, a1 = np.abs(d0), np.abs(d1)
        val_same = h * 0.5 * (a0 + a1)
        tot = a0 + a1
        with np.errstate(invalid="ignore", divide="ignore"):
            val_cross = h * 0.5 * (a0**2 + a1**2) / np.where(tot > 0, tot, 1)
        return float(np.sum(np.where(same, val_same, val_cross)))
    raise DomainError("exact density quantile formula implemented for p in {1, 2}")


def w1_1d(mu, nu, metric="euclidean"):
    """Exact W1 in one dimension (quantile L1 difference).

    Accepts WeightedPointCloud with one column, or (edges, masses) tuples for
    piecewise-constant densities.  Only the fundamental-domain metric applies.
    """
    if metric != "euclidean":
        raise DomainError("w1_1d uses the Euclidean fundamental-domain metric only")
    if isinstance(mu, tuple) and isinstance(nu, tuple):
        return wp_1d_density(mu[0], mu[1], nu[0], nu[1], p=1)
    if isinstance(mu, WeightedPointCloud) and isinstance(nu, WeightedPointCloud):
        if mu.points.shape[1] != 1 or nu.points.shape[1] != 1:
            raise DomainError("w1_1d needs one-dimensional clouds")
        return wp_1d(mu.points[:, 0], mu.weights, nu.points[:, 0], nu.weights, p=1)
    raise DomainError("w1_1d needs two clouds or two (edges, masses) densities")


def sliced_w2(mu, nu, n_projections=64, seed=0):
    """Monte-Carlo sliced W2: sqrt(mean_theta W2^2(theta#mu, theta#nu)), with stderr.

    A surrogate: SW2 <= W2.  Euclidean fundamental-domain coordinates only.
    """
    if n_projections < 16:
        raise DomainError("use at least 16 projections")
    m = mu.points.shape[1]
    rng = np.random.default_rng(seed)
    th = rng.standard_normal((n_projections, m))
    th /= np.linalg.norm(th, axis=1, keepdims=True)
    pa = mu.points @ th.T
    pb = nu.points @ th.T
    vals = np.array([wp_1d(pa[:, i], mu.weights, pb[:, i], nu.weights, p=2) ** 2
                     for i in range(n_projections)])
    est = float(np.sqrt(vals.mean()))
    se2 = vals.std(ddof=1) / np.sqrt(n_projections)
    stderr = float(se2 / (2 * est)) if est > 0 else 0.0
    return est, stderr


# ---------------------------------------------------------------------------
# grids and clouds
# ---------------------------------------------------------------------------

class GridDistance(NamedTuple):
    value: float
    quantization_error: float
    method: str
    metric: str
    p: float


def quantize_grid(f, qx=32, qv=32):
    """Aggregate a PhaseSpaceGrid onto qx x qv coarse cells; atoms at cell centres."""
    if f.Mx % qx or f.Mv % qv:
        raise DomainError("coarse cells must tile the grid")
    bx, bv = f.Mx // qx, f.Mv // qv
    mass = f.f.reshape(qx, bx, qv, bv).sum(axis=(1, 3)) * f.dx * f.dv
    xc = -0.5 + (np.arange(qx) + 0.5) / qx
    vc = -f.vmax + (np.arange(qv) + 0.5) * 2 * f.vmax / qv
    X, V = np.meshgrid(xc, vc, indexing="ij")
    keep = mass.ravel() > 0
    w = mass.ravel()[keep]
    cloud = WeightedPointCloud(np.stack([X.ravel()[keep], V.ravel()[keep]], axis=1),
                               w / w.sum(), 1)
    half_diag = 0.5 * np.hypot(1.0 / qx, 2 * f.vmax / qv)
    return cloud, half_diag


def bin_cloud(cloud, f, qx=32, qv=32):
    """Bin a 1D phase-space cloud onto the coarse cells of quantize_grid.

    Atoms outside the velocity box are kept as they are (no error incurred).
    """
    x = cloud.points[:, 0]
    v = cloud.points[:, 1]
    x0 = -0.5
    ix = np.floor((x - x0) * qx).astype(int) % qx
    iv = np.floor((v + f.vmax) / (2 * f.vmax) * qv).astype(int)
    inside = (iv >= 0) & (iv < qv)
    mass = np.bincount(ix[inside] * qv + iv[inside], weights=cloud.weights[inside],
                       minlength=qx * qv)
    xc = x0 + (np.arange(qx) + 0.5) / qx
    vc = -f.vmax + (np.arange(qv) + 0.5) * 2 * f.vmax / qv
    X, V = np.meshgrid(xc, vc, indexing="ij")
    keep = mass > 0
    pts = np.concatenate([np.stack([X.ravel()[keep], V.ravel()[keep]], axis=1),
                          cloud.points[~inside]])
    w = np.concatenate([mass[keep], cloud.weights[~inside]])
    half_diag = 0.5 * np.hypot(1.0 / qx, 2 * f.vmax / qv)
    return WeightedPointCloud(pts, w / w.sum(), 1), half_diag


def grid_vs_cloud_w(f, cloud, p=1, qx=32, qv=32, binning="auto", metric="euclidean",
                    max_entries=LP_MAX_ENTRIES):
    """W_p between a PhaseSpaceGrid and a cloud via quantization, then exact LP.

    binning: 'never', 'always' or 'auto' (bin the cloud only when the plan would
    exceed max_entries).  quantization_error bounds |value - W_p(f, cloud)|.
    """
    gq, err_g = quantize_grid(f, qx, qv)
    err_c = 0.0
    method = "lp"
    if binning == "always" or (binning == "auto" and gq.K * cloud.K > max_entries):
        cloud, err_c = bin_cloud(cloud, f, qx, qv)
        method = "lp-binned"
    if gq.K * cloud.K > max_entries:
        warnings.warn("plan over budget after binning; falling back to sliced W2 surrogate")
        val, _ = sliced_w2(gq, cloud, 64, 0)
        return GridDistance(val, err_g + err_c, "sliced", "euclidean", 2)
    val, _ = wasserstein_discrete(gq, cloud, p, metric)
    return GridDistance(val, err_g + err_c, method, metric, p)


def grid_vs_grid_w(f, g, p=1, qx=32, qv=32, metric="euclidean"):
    """W_p between two PhaseSpaceGrids on the same box via common quantization."""
    a, ea = quantize_grid(f, qx, qv)
    b, eb = quantize_grid(g, qx, qv)
    val, _ = wasserstein_discrete(a, b, p, metric)
    return GridDistance(val, ea + eb, "lp", metric, p)


# ---------------------------------------------------------------------------
# anisotropic coupling functional
# ---------------------------------------------------------------------------

def anisotropic_D(traj_a, traj_b, lam, weights=None, metric="euclidean"):
    """D(t) = (1/2) sum_i w_i (lam^2 |x_i - y_i|^2 + |v_i - w_i|^2) along paired flows.

    traj_a, traj_b: sequences of (positions, velocities) with the same pairing.
    Note W2^2 <= 2 D whenever lam^2 >= 1; the factor 2 comes from the 1/2 in
    front of the velocity term.
    """
    if lam**2 <= 2:
        warnings.warn("lam^2 <= 2: the comparison of D with W2^2 assumes lam^2 > 2")
    out = []
    for (xa, va), (xb, vb) in zip(traj_a, traj_b):
        xa, xb = np.atleast_2d(xa), np.atleast_2d(xb)
        va, vb = np.atleast_2d(va), np.atleast_2d(vb)
        w = np.full(xa.shape[0], 1.0 / xa.shape[0]) if weights is None else weights
        dx = xa - xb
        if metric == "torus":
            dx = dx - np.rint(dx)
        out.append(0.5 * float(np.sum(w * (lam**2 * np.sum(dx**2, axis=1)
                                          + np.sum((va - vb) ** 2, axis=1)))))
    return np.array(out)


def truncate_D(D, lam, r, d):
    """Dhat(t) = min(1, lam^-2 r^-(d+2) sup_{s<=t} D(s))."""
    D = np.asarray(D, dtype=float)
    return np.minimum(1.0, np.maximum.accumulate(D) / (lam**2 * r ** (d + 2)))


# ---------------------------------------------------------------------------
# measure operators
# ---------------------------------------------------------------------------

def mollifier_nodes(r, d, n=8, profile="bump"):
    """Discrete probability measure approximating chi_r, supported in the ball B_r.

    Product Gauss-Legendre rule in polar coordinates (d = 1: symmetric nodes on
    (-r, r)); weights proportional to chi.  Exactly centred and radially balanced.
    """
    from .kernels import PROFILES, _gauss_legendre01
    t, w = _gauss_legendre01(n)
    prof = PROFILES[profile](t)
    if d == 1:
        y = np.concatenate([-t[::-1], t])[:, None]
        wt = np.concatenate([(w * prof)[::-1], w * prof])
    elif d == 2:
        na = 2 * n
        ang = 2 * np.pi * (np.arange(na) + 0.5) / na
        y = (t[:, None, None] * np.stack([np.cos(ang), np.sin(ang)], axis=-1)[None]).reshape(-1, 2)
        wt = np.repeat(w * prof * t, na)
    else:
        mu_, wmu = np.polynomial.legendre.leggauss(n)
        na = 2 * n
        ang = 2 * np.pi * (np.arange(na) + 0.5) / na
        s = np.sqrt(1 - mu_**2)
        dirs = np.stack([s[:, None] * np.cos(ang)[None], s[:, None] * np.sin(ang)[None],
                         np.broadcast_to(mu_[:, None], (n, na))], axis=-1).reshape(-1, 3)
        dw = np.repeat(wmu, na)
        y = (t[:, None, None] * dirs[None]).reshape(-1, 3)
        wt = (w * prof * t * t)[:, None] * dw[None, :]
        wt = wt.ravel()
    return r * y, wt / wt.sum()


def _wrap(x):
    y = x - np.floor(x + 0.5)
    return np.where(y >= 0.5, y - 1.0, y)


def mollify_measure(mu, r, mode="quadrature", seed=None, n=8, wrap=True, grid=None,
                    profile="bump"):
    """chi_r * mu (convolution in x).

    mode 'quadrature': convolve with the deterministic node measure of mollifier_nodes;
    mode 'stochastic': every atom receives one i.i.d. chi_r-distributed offset;
    mode 'grid': spatial density on `grid` cells (position marginal only); the
    density is band-limited, so it can undershoot zero slightly near atoms.
    """
    if not (0 < r < 0.25):
        raise DomainError("mollification radius must lie in (0, 1/4)")
    d = mu.d
    if mode == "grid":
        from .kernels import MollifierSpec
        M = grid or 256
        ks = np.fft.fftfreq(M, 1.0 / M)
        kk = np.meshgrid(*([ks] * d), indexing="ij")
        S = np.zeros((M,) * d, dtype=complex)
        for a in range(0, mu.K, 4096):
            ph = np.exp(-2j * np.pi * sum(np.multiply.outer(mu.points[a:a + 4096, i], kk[i])
                                          for i in range(d)))
            S += np.tensordot(mu.weights[a:a + 4096], ph, axes=1)
        chi = MollifierSpec(r, profile).hat(np.sqrt(sum(k**2 for k in kk)), d)
        dens = np.real(np.fft.ifftn(S * chi)) * M**d
        return dens
    if mode == "quadrature":
        y, wy = mollifier_nodes(r, d, n, profile)
    elif mode == "stochastic":
        rng = np.random.default_rng(seed)
        y = sample_mollifier(r, d, mu.K, rng, profile)
        pts = mu.points.copy()
        pts[:, :d] += y
        if wrap:
            pts[:, :d] = _wrap(pts[:, :d])
        return WeightedPointCloud(pts, mu.weights.copy(), d, {"mode": "stochastic", "r": r})
    else:
        raise DomainError(f"unknown mollification mode {mode!r}")
    pts = np.repeat(mu.points, len(wy), axis=0)
    pts[:, :d] += np.tile(y, (mu.K, 1))
    if wrap:
        pts[:, :d] = _wrap(pts[:, :d])
    w = np.outer(mu.weights, wy).ravel()
    return WeightedPointCloud(pts, w / w.sum(), d, {"mode": "quadrature", "r": r})


def sample_mollifier(r, d, n, rng, profile="bump"):
    """n i.i.d. draws from chi_r by rejection from the uniform ball."""
    from .kernels import PROFILES
    out = []
    have = 0
    while have < n:
        m = 2 * (n - have) + 16
        y = rng.uniform(-1, 1, (m, d))
        rho = np.linalg.norm(y, axis=1)
        ok = (rho < 1) & (rng.random(m) * np.exp(-1.0) <= PROFILES[profile](rho))
        out.append(y[ok])
        have += int(ok.sum())
    return r * np.concatenate(out)[:n]


def filter_measure(mu, R, x_grid=None):
    """Push mu forward by (x, v) -> (x, v - R(x)).

    R is a callable of positions (K, d) -> (K, d), a constant, or samples on the
    periodic x-grid (1D, periodic linear interpolation).
    """
    d = mu.d
    x = mu.points[:, :d]
    if callable(R):
        shift = np.asarray(R(x), dtype=float).reshape(mu.K, d)
    elif np.ndim(R) == 0:
        shift = np.full((mu.K, d), float(R))
    else:
        if d != 1:
            raise DomainError("gridded R supported in d = 1")
        vals = np.asarray(getattr(R, "values", R), dtype=float)
        M = vals.size
        xg = x_grid if x_grid is not None else -0.5 + (np.arange(M) + 0.5) / M
        shift = np.interp(x[:, 0], xg, vals, period=1.0)[:, None]
    pts = mu.points.copy()
    pts[:, d:] -= shift
    return WeightedPointCloud(pts, mu.weights.copy(), d)


def filter_grid(f, R):
    """Filtered density f~(x, w) = f(x, w + R(x)) on a PhaseSpaceGrid (cubic spline)."""
    from .vlasov import spline_shift
    vals = np.asarray(getattr(R, "values", R), dtype=float)
    s = -vals / f.dv
    pad = int(np.ceil(np.abs(s).max())) + 40
    padded = np.pad(f.f, ((0, 0), (pad, pad)))
    g = spline_shift(padded, s, axis=1)[:, pad:pad + f.Mv]
    g = np.maximum(g, 0.0)
    g *= f.f.sum() / g.sum()
    return f.copy(f=g)


def scale_measure(mu, R_scale):
    """S_R: velocities divided by R_scale, positions unchanged."""
    if not R_scale > 0:
        raise DomainError("scale must be positive")
    pts = mu.points.copy()
    pts[:, mu.d:] /= R_scale
    return WeightedPointCloud(pts, mu.weights.copy(), mu.d)
