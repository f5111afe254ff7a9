"""Priors on the number of nonzero coordinates.

Every constructor returns a normalized log-pmf over {0, ..., n} with strictly
positive mass everywhere.  The posterior engine consumes these through the
per-model log-weights  lambda_p = log pi_n(p) - log C(n, p).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import gammaln, logsumexp


class DimensionFamily(str, Enum):
    COMPLEXITY = "complexity"
    BETABIN_POWER = "betabin"
    BINOMIAL = "binomial"
    POISSON = "poisson"
    GEOMETRIC = "geometric"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DimensionPrior:
    n: int
    log_pmf: np.ndarray
    family: DimensionFamily = DimensionFamily.CUSTOM
    params: tuple = field(default_factory=tuple)

    def __post_init__(self):
        lp = np.asarray(self.log_pmf, dtype=float)
        object.__setattr__(self, "log_pmf", lp)
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if lp.shape != (self.n + 1,):
            raise ValueError(f"log_pmf must have length n + 1 = {self.n + 1}")
        if np.any(np.isnan(lp)) or np.any(lp == np.inf):
            raise ValueError("log_pmf entries must be finite or -inf")
        total = logsumexp(lp)
        if abs(total) > 1e-10:
            raise ValueError(f"log_pmf is not normalized (log-sum-exp = {total:.3e})")

    def log_model_weight(self, p: int) -> float:
        """log pi_n(p) - log C(n, p) for a single model size p."""
        if not 0 <= p <= self.n:
            raise ValueError(f"model size {p} outside 0..{self.n}")
        return float(self.log_model_weights()[p])

    def log_model_weights(self) -> np.ndarray:
        """Vector of log pi_n(p) - log C(n, p), p = 0..n, via log-gamma."""
        p = np.arange(self.n + 1)
        log_binom = gammaln(self.n + 1) - gammaln(p + 1) - gammaln(self.n - p + 1)
        return self.log_pmf - log_binom


def _normalized(n: int, log_weights: np.ndarray, family: DimensionFamily, params: tuple) -> DimensionPrior:
    log_weights = np.asarray(log_weights, dtype=float)
    return DimensionPrior(n, log_weights - logsumexp(log_weights), family, params)


def complexity_prior(n: int, kappa: float, b: float = 3.0) -> DimensionPrior:
    """pi_n(p) proportional to exp(-kappa * p * log(b n / p)).

    The p = 0 weight is the continuity limit exp(0) = 1.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if kappa <= 0 or b <= 0:
        raise ValueError("kappa and b must be positive")
    p = np.arange(n + 1, dtype=float)
    w = np.zeros(n + 1)
    w[1:] = -kappa * p[1:] * np.log(b * n / p[1:])
    return _normalized(n, w, DimensionFamily.COMPLEXITY, (kappa, b))


def betabin_power_prior(n: int, kappa: float) -> DimensionPrior:
    """pi_n(p) proportional to C(2n - p, n)^kappa.

    kappa = 1 is the Beta-binomial(1, n + 1) hierarchical prior, with
    pi_n(p) / pi_n(p - 1) = (n - p + 1) / (2n - p + 1) <= 1/2.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    p = np.arange(n + 1, dtype=float)
    w = kappa * (gammaln(2 * n - p + 1) - gammaln(n + 1) - gammaln(n - p + 1))
    return _normalized(n, w, DimensionFamily.BETABIN_POWER, (kappa,))


def binomial_prior(n: int, alpha: float) -> DimensionPrior:
    """Binomial(n, alpha) prior on dimension; alpha strictly inside (0, 1)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly in (0, 1)")
    p = np.arange(n + 1, dtype=float)
    log_binom = gammaln(n + 1) - gammaln(p + 1) - gammaln(n - p + 1)
    w = log_binom + p * np.log(alpha) + (n - p) * np.log1p(-alpha)
    return _normalized(n, w, DimensionFamily.BINOMIAL, (alpha,))


def poisson_prior(n: int, alpha: float) -> DimensionPrior:
    """Poisson(alpha) truncated to {0, ..., n} and renormalized."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    p = np.arange(n + 1, dtype=float)
    w = p * np.log(alpha) - gammaln(p + 1)
    return _normalized(n, w, DimensionFamily.POISSON, (alpha,))


def geometric_prior(n: int, succ_prob: float) -> DimensionPrior:
    """Geometric on {0, 1, ...} with the given success probability, truncated."""
    if not 0.0 < succ_prob < 1.0:
        raise ValueError("success probability must lie strictly in (0, 1)")
    p = np.arange(n + 1, dtype=float)
    w = p * np.log1p(-succ_prob)
    return _normalized(n, w, DimensionFamily.GEOMETRIC, (succ_prob,))


def custom_prior(n: int, log_weights) -> DimensionPrior:
    """User-supplied unnormalized log-weights over {0, ..., n}."""
    return _normalized(n, np.asarray(log_weights, dtype=float), DimensionFamily.CUSTOM, ())


def log_model_weight(prior: DimensionPrior, p: int) -> float:
    return prior.log_model_weight(p)
