"""Numerical laboratory for the regularized N-particle Vlasov-Poisson system,
its mean-field and quasineutral limits, and Wasserstein diagnostics."""

__version__ = "0.1.0"
