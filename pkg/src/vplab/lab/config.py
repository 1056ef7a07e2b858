"""Experiment configuration: a flat, typed key-value TOML file.

Schema (all keys optional except `experiment` and `seed`):

  experiment      str    meanfield | quasineutral | combined | lemmas | concentration
                         | lipschitz
  seed            int    master seed (mandatory)
  out             str    output directory
  force           bool   run even if the regime verdict is negative (recorded)

  family          str    bump | uniform | monokinetic
  amplitude       float  density perturbation a (quasineutral/combined: rho0 - 1 = a eps cos)
  vwidth, v0      float  velocity profile width and centre
  mode            int    spatial mode of the perturbation

  Mx, Mv, vmax    grid of the PDE solver
  kernel_M        grid of the particle force table
  dt              float  time step (default dt_over_eps * eps)
  dt_over_eps     float
  snapshot_every  float  spacing of the distance evaluations

  N_list, eps_list  arrays of sample sizes / Debye lengths for the sweeps
  n_seeds         int    Monte-Carlo repetitions per point
  force_method    str    pic | direct | spectral | exact1d
  frequency       str    eps | sqrt_eps  (corrector oscillation frequency)
  p, qx, qv       int    Wasserstein order and coarse quantization cells
  metric          str    torus | euclidean
  trials          int    lemma-suite trials per lemma
  resamples       int    concentration resamples per phase
  x_grid          array  concentration thresholds
  conc_N          int    sample size for the concentration check
  r_exponents     array  Lipschitz law: r = 2^-k for each k
  cells_per_r     int    Lipschitz law: grid cells per mollifier radius

Any key that names a RegimeParams field (d, eps, r, N, gamma, delta, C, C_T, C_2,
A, A_T, T, eta, eta_prime, alpha, beta, lam, kappa, c) configures the regime.
"""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

from ..errors import DomainError
from ..regimes import RegimeParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXPERIMENTS = ("meanfield", "quasineutral", "combined", "lemmas", "concentration",
               "lipschitz")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    regime: RegimeParams = field(default_factory=RegimeParams)
    out: str = "runs"
    force: bool = False
    family: str = "bump"
    amplitude: float = 0.5
    vwidth: float = 0.5
    v0: float = 0.0
    mode: int = 1
    Mx: int = 128
    Mv: int = 192
    vmax: float = 1.5
    kernel_M: int = 128
    dt: Optional[float] = None
    dt_over_eps: float = 0.05
    snapshot_every: float = 0.1
    N_list: tuple = (1000, 4000, 16000)
    eps_list: tuple = (0.2, 0.1, 0.05)
    n_seeds: int = 5
    force_method: str = "pic"
    frequency: str = "eps"
    p: int = 1
    qx: int = 32
    qv: int = 32
    metric: str = "torus"
    trials: int = 1000
    resamples: int = 200
    x_grid: tuple = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
    conc_N: int = 256
    r_exponents: tuple = (4, 5, 6, 7, 8, 9, 10)
    cells_per_r: int = 8

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.seed is None:
            raise DomainError("seed is mandatory")
        if int(self.seed) < 0 or int(self.seed) >= 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")

    def time_step(self, eps):
        return self.dt if self.dt is not None else self.dt_over_eps * eps

    def to_dict(self):
        out = asdict(self)
        out["regime"] = self.regime.to_dict()
        return out


_REGIME_KEYS = {f.name for f in fields(RegimeParams)}
_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)} - {"regime"}


def config_from_dict(flat, **overrides):
    """Build a config from flat keys; unknown keys are an error."""
    flat = {**flat, **{k: v for k, v in overrides.items() if v is not None}}
    unknown = set(flat) - _REGIME_KEYS - _CONFIG_KEYS
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    reg = RegimeParams(**{k: v for k, v in flat.items() if k in _REGIME_KEYS})
    kw = {k: (tuple(v) if isinstance(v, list) else v)
          for k, v in flat.items() if k in _CONFIG_KEYS}
    if "seed" not in kw:
        raise DomainError("seed is mandatory (config key `seed` or --seed)")
    return ExperimentConfig(regime=reg, **kw)


def load_config(path, **overrides):
    with open(path, "rb") as fh:
        flat = tomllib.load(fh)
    return config_from_dict(flat, **overrides)


def with_regime(cfg, **kw):
    return replace(cfg, regime=replace(cfg.regime, **kw))
