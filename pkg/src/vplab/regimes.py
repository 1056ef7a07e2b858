"""Parameter regimes: exponents, schedules, Gronwall-type bounds and the
concentration inequality, as pure calculators with admissibility verdicts.

Every unnamed multiplicative constant is a field of RegimeParams (default 1).
Log-space variants are provided where the direct value under- or overflows.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .errors import AdmissibilityError, DomainError


@dataclass(frozen=True)
class RegimeParams:
    d: int = 1
    eps: float = 0.5
    r: float = 0.0
    N: int = 1000
    gamma: float = 1.0
    delta: float = 2.5
    C: float = 1.0
    C_T: float = 1.0
    C_2: float = 1.0
    A: float = 1.0
    A_T: float = 1.0
    T: float = 1.0
    eta: float = 1.0
    eta_prime: float = 0.5
    alpha: float = 0.01
    beta: float = 0.25
    lam: Optional[float] = None
    kappa: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        validate(self)

    def to_dict(self):
        return asdict(self)


def validate(p):
    if p.d not in (1, 2, 3):
        raise DomainError("d must be 1, 2 or 3")
    for name in ("eps", "gamma", "C", "C_T", "C_2", "A", "A_T", "T", "eta", "eta_prime",
                 "alpha", "beta", "kappa", "c"):
        if not getattr(p, name) > 0:
            raise DomainError(f"{name} must be positive")
    if p.r < 0:
        raise DomainError("r must be nonnegative")
    if p.N < 1:
        raise DomainError("N must be >= 1")
    if p.d == 2 and not p.delta > 2:
        raise DomainError("delta must exceed 2 in two dimensions")
    if not (p.beta < p.eta_prime < p.eta):
        raise DomainError(f"exponents must satisfy beta < eta' < eta, got "
                          f"{p.beta}, {p.eta_prime}, {p.eta}")
    if p.lam is not None and not p.lam**2 > 2:
        raise DomainError("lambda^2 must exceed 2")


def zeta(d, gamma, delta=None):
    """Density-growth exponent: max(gamma, delta) in 2D, max(gamma, 38/3) in 3D."""
    if d == 2:
        if delta is None or not delta > 2:
            raise DomainError("two dimensions need delta > 2")
        return max(gamma, delta)
    if d == 3:
        return max(gamma, 38.0 / 3.0)
    raise DomainError(f"zeta is defined for d = 2, 3 (got d = {d})")


def _zeta_or_zero(p):
    return 0.0 if p.d == 1 else zeta(p.d, p.gamma, p.delta)


def density_bound(p):
    """M = C_T eps^(-zeta d); in 1D (no zeta) M = C_T."""
    return p.C_T * p.eps ** (-_zeta_or_zero(p) * p.d)


def log_r_max(eps, d, zeta_, C_T):
    return -C_T * eps ** (-2.0 - d * zeta_)


def r_max(eps, d, zeta_, C_T=1.0):
    return math.exp(log_r_max(eps, d, zeta_, C_T))


def eps_min(N, A=1.0):
    if N <= 1:
        return math.inf
    return A / math.log(N)


def r_min(N, d, A_T=1.0, alpha=0.01):
    return A_T * N ** (-1.0 / (d * (d + 2)) + alpha)


def log_phi(eps, p):
    """log of the perturbation budget phi(eps).

    1D: phi = C eps^-1 exp(-C/eps).  2D/3D: the decreasing reading
    phi = exp(-exp(C / eps^k)), k = 2(1 + max(delta, gamma)) in 2D and
    2 + max(38, 3 gamma) in 3D.
    """
    if p.d == 1:
        return math.log(p.C) - math.log(eps) - p.C / eps
    return -_safe_exp(log_neg_log_phi(eps, p))


def log_neg_log_phi(eps, p):
    """log(-log phi) = C / eps^k in 2D/3D; finite where log_phi itself saturates."""
    if p.d == 1:
        raise DomainError("log(-log phi) is only used for d = 2, 3")
    k = 2 * (1 + max(p.delta, p.gamma)) if p.d == 2 else 2 + max(38.0, 3 * p.gamma)
    return p.C / eps**k


def phi(eps, p):
    return math.exp(log_phi(eps, p))


def placement_budget(p):
    """eps^-gamma r^(1 + d/2 + eta/2)."""
    return p.eps ** (-p.gamma) * p.r ** (1 + p.d / 2 + p.eta / 2)


def schedules(p):
    """All schedule quantities at (N, eps, r) plus the admissibility verdict."""
    z = _zeta_or_zero(p)
    out = {
        "zeta": z if p.d > 1 else None,
        "M": density_bound(p),
        "eps_min": eps_min(p.N, p.A),
        "log_phi": log_phi(p.eps, p),
        "phi": phi(p.eps, p),
    }
    if p.d > 1:
        out["log_neg_log_phi"] = log_neg_log_phi(p.eps, p)
        out["log_r_max"] = log_r_max(p.eps, p.d, z, p.C_T)
        out["r_max"] = math.exp(out["log_r_max"])
        out["r_min"] = r_min(p.N, p.d, p.A_T, p.alpha)
        out["placement_budget"] = placement_budget(p) if p.r > 0 else None
    else:
        out["placement_budget"] = placement_budget(p) if p.r > 0 else None
    out["verdict"] = admissibility(p, out)
    return out


def admissibility(p, sched=None, particles=True):
    """Verdict on (N, eps, r).  particles=False skips the N-dependent schedules
    (PDE-only runs)."""
    sched = sched or {}
    violations = []
    if p.eps > 1:
        violations.append(f"eps = {p.eps} > 1")
    if not particles:
        return {"admissible": not violations, "violations": violations}
    em = sched.get("eps_min", eps_min(p.N, p.A))
    if p.eps < em:
        violations.append(f"eps = {p.eps} < eps_min(N) = A/log N = {em:.6g}")
    if p.d > 1:
        z = _zeta_or_zero(p)
        lrm = log_r_max(p.eps, p.d, z, p.C_T)
        if p.r <= 0 or math.log(p.r) > lrm:
            violations.append(f"r = {p.r} exceeds r_max = exp({lrm:.6g})")
        rmn = r_min(p.N, p.d, p.A_T, p.alpha)
        if p.r < rmn:
            violations.append(f"r = {p.r} < r_min(N) = {rmn:.6g}")
    return {"admissible": not violations, "violations": violations}


def require_admissible(p, force=False, particles=True):
    v = admissibility(p, particles=particles)
    if not v["admissible"] and not force:
        raise AdmissibilityError("; ".join(v["violations"]))
    return v


# ---------------------------------------------------------------------------
# Gronwall-type bounds
# ---------------------------------------------------------------------------

def stability_exponent_1d(t, rho_sup_integral):
    """alpha(t) = sqrt(2) t + 8 int_0^t ||rho||_inf."""
    return math.sqrt(2.0) * t + 8.0 * rho_sup_integral


def _abs_log_r(r):
    if not (0 < r < 1):
        raise DomainError("|log r| needs 0 < r < 1")
    return -math.log(r)


def gronwall_bounds(p, sup_density_history=None, t=None):
    """bound_1d, growth factor, rur bound and the optimal (lambda, alpha).

    sup_density_history: (times, sup rho) samples on [0, t] (trapezoid rule).
    Values are returned together with their logarithms.
    """
    t = p.T if t is None else t
    if sup_density_history is not None:
        ts, sup = (np.asarray(a, dtype=float) for a in sup_density_history)
        integral = float(np.sum(0.5 * (sup[1:] + sup[:-1]) * np.diff(ts)))
    else:
        integral = density_bound(p) * t
    a1 = stability_exponent_1d(t, integral)
    out = {"alpha_1d": a1, "log_bound_1d": -math.log(p.eps) + a1 / p.eps}
    out["bound_1d"] = _safe_exp(out["log_bound_1d"])
    if p.r > 0:
        L = _abs_log_r(p.r)
        M = density_bound(p)
        lam = p.C / p.eps * math.sqrt(L * M)
        out["lambda_opt"] = lam
        out["alpha_opt"] = p.C * p.eps**-2 * L * M / lam
        out["log_growth"] = p.C / p.eps * math.sqrt(L * M) * t
        out["growth_factor"] = _safe_exp(out["log_growth"])
        out["log_rur_bound"] = (math.log(p.C) - 1.5 * math.log(p.eps) + 0.75 * math.log(M)
                                + math.log(p.r) - 0.25 * math.log(L) + out["log_growth"])
        out["rur_bound"] = _safe_exp(out["log_rur_bound"])
    return out


def _safe_exp(x):
    return math.exp(x) if x < 709.0 else math.inf


# ---------------------------------------------------------------------------
# concentration
# ---------------------------------------------------------------------------

def concentration_bound(m, p, x, N, C=1.0, c=1.0):
    """Upper bound for P(W_p^p(nu, nu^N) >= kappa x), nu supported in [-1, 1]^m."""
    if not x > 0:
        raise DomainError("x must be positive")
    if x > 1:
        return 0.0
    if p > m / 2:
        e = x * x
    elif p == m / 2:
        e = (x / math.log(2 + 1 / x)) ** 2
    else:
        e = x ** (m / p)
    return C * math.exp(-c * N * e)


def calibrate_multiplier(measured, formula, margin=1.0):
    """Smallest constant K with measured <= K * formula on all samples, times margin."""
    measured = np.asarray(measured, dtype=float)
    formula = np.asarray(formula, dtype=float)
    return margin * float(np.max(measured / formula))


def regime_report(p, sup_density_history=None):
    """JSON-ready record of inputs, derived quantities, verdicts and constants."""
    rep = {"params": p.to_dict(), "schedules": schedules(p)}
    rep["gronwall"] = gronwall_bounds(p, sup_density_history)
    rep["constants"] = {k: getattr(p, k) for k in ("C", "C_T", "C_2", "A", "A_T", "kappa", "c")}
    return rep


def with_schedule(p, N):
    """Parameters at sample size N on the eps(N) = A / log N schedule."""
    return replace(p, N=N, eps=eps_min(N, p.A))
