"""Closed-form g-prior Bayes factors with a beta-prime hyperprior on g.

Everything is kept on the natural-log scale.  The closed form is checked
against an independent route that integrates the conditional (fixed-g)
Bayes factor against the hyperprior numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DegenerateFitError, HyperparameterError, OracleFailureError, ValidationError
from .regression import FitSummary, ModelSpec

DEFAULT_A = -0.5
_LOG_MAX = math.log(np.finfo(float).max)
_LOG_TINY = math.log(np.finfo(float).tiny)


@dataclass(frozen=True)
class HyperParams:
    """Beta-prime hyperprior shape ``a``; ``b`` is tied to (n, j)."""

    a: float = DEFAULT_A

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > -1.0):
            raise HyperparameterError(f"a must exceed -1, got {self.a}")

    def b(self, n: int, j: int) -> float:
        return (n - j - 1) / 2.0 - self.a - 2.0

    def check(self, n: int, j: int) -> None:
        if not n > j + 2.0 * self.a + 3.0:
            raise HyperparameterError(
                f"need n > j + 2a + 3 so that b > -1; got n={n}, j={j}, a={self.a}"
            )


@dataclass(frozen=True)
class BayesFactorResult:
    """log BF[model : base] split into its gamma-ratio and fit parts."""

    log_bf: float
    gamma_term: float
    fit_term: float
    model: ModelSpec
    base: ModelSpec

    @property
    def bf_display(self) -> float | str:
        return display_bf(self.log_bf)


def display_bf(log_bf: float) -> float | str:
    """Linear-scale BF for humans, with markers past the float range."""
    if log_bf > _LOG_MAX:
        return "+inf"
    if log_bf < _LOG_TINY:
        return "0 (underflow)"
    return math.exp(log_bf)


def _log_one_minus_r2(fit: FitSummary) -> float:
    if not fit.rss > 0.0 or fit.r_squared >= 1.0:
        raise DegenerateFitError(f"R^2 = {fit.r_squared} for {fit.model}: exact fit")
    if fit.r_squared < 0.0:
        raise ValidationError(f"R^2 must be non-negative, got {fit.r_squared}")
    return math.log(fit.rss) - math.log(fit.tss)


def log_bf_vs_null(n: int, fit: FitSummary, hp: HyperParams = HyperParams()) -> BayesFactorResult:
    """log BF[M_j : M_0] in closed form."""
    j, a = fit.dim, hp.a
    hp.check(n, j)
    log1mr2 = _log_one_minus_r2(fit)
    if j == 0:
        return BayesFactorResult(0.0, 0.0, 0.0, fit.model, fit.model)
    gamma_term = float(
        gammaln(j / 2.0 + a + 1.0) + gammaln((n - j - 1) / 2.0)
        - gammaln(a + 1.0) - gammaln((n - 1) / 2.0)
    )
    fit_term = (-(n - j - 1) / 2.0 + a + 1.0) * log1mr2
    return BayesFactorResult(gamma_term + fit_term, gamma_term, fit_term, fit.model, ModelSpec())


def log_bf_pair(
    n: int, fit_j: FitSummary, fit_i: FitSummary, hp: HyperParams = HyperParams()
) -> BayesFactorResult:
    """log BF[M_j : M_i] as the ratio of the two null-based factors."""
    bj = log_bf_vs_null(n, fit_j, hp)
    bi = log_bf_vs_null(n, fit_i, hp)
    gamma_term = bj.gamma_term - bi.gamma_term
    fit_term = bj.fit_term - bi.fit_term
    return BayesFactorResult(gamma_term + fit_term, gamma_term, fit_term, fit_j.model, fit_i.model)


def log_bf_schwarz(n: int, fit: FitSummary) -> float:
    """Schwarz (BIC-type) approximation: -(j/2) log n - (n/2) log(1 - R^2)."""
    if n < 2:
        raise ValidationError(f"n must be at least 2, got {n}")
    return -(fit.dim / 2.0) * math.log(n) - (n / 2.0) * _log_one_minus_r2(fit)


def log_bf_given_g(n: int, fit: FitSummary, g: float) -> float:
    """log BF[M_j : M_0] conditional on g.

    With flat priors on the intercept and log sigma and beta_j ~ N(0, g s2 (X'X)^-1)
    the marginal is proportional to (1+g)^((n-1-j)/2) (1 + g(1-R^2))^(-(n-1)/2).
    """
    if not g > 0.0:
        raise ValidationError(f"g must be positive, got {g}")
    j = fit.dim
    one_minus_r2 = math.exp(_log_one_minus_r2(fit))
    return ((n - 1 - j) / 2.0) * math.log1p(g) - ((n - 1) / 2.0) * math.log1p(g * one_minus_r2)


def _log_beta_fn(p: float, q: float) -> float:
    # stdlib lgamma keeps this route independent of the closed form's gammaln
    return math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q)


def log_bf_oracle_quadrature(
    n: int, fit: FitSummary, hp: HyperParams = HyperParams(), epsabs: float = 1e-10
) -> float:
    """log of the integral of BF(g) against the beta-prime prior on g.

    Substituting u = g/(1+g) turns the prior into a Beta(b+1, a+1) density
    on (0, 1).  The integrand is rescaled by its maximum on a grid so the
    absolute tolerance applies on a unit-peak scale.
    """
    j, a = fit.dim, hp.a
    hp.check(n, j)
    _log_one_minus_r2(fit)
    b = hp.b(n, j)
    log_norm = _log_beta_fn(b + 1.0, a + 1.0)

    def log_integrand(u: float) -> float:
        if u <= 0.0 or u >= 1.0:
            return -math.inf
        g = u / (1.0 - u)
        return (log_bf_given_g(n, fit, g) + b * math.log(u)
                + a * math.log1p(-u) - log_norm)

    grid = np.linspace(0.0, 1.0, 4097)[1:-1]
    vals = np.array([log_integrand(u) for u in grid])
    k = int(np.argmax(vals))
    shift, peak = float(vals[k]), float(grid[k])

    def f(u: float) -> float:
        v = log_integrand(u) - shift
        return math.exp(v) if v > -745.0 else 0.0

    total = 0.0
    for lo, hi in ((0.0, peak), (peak, 1.0)):
        val, err, info = _quad(f, lo, hi, epsabs)
        total += val
    if not total > 0.0:
        raise OracleFailureError(f"quadrature returned non-positive mass {total}")
    return math.log(total) + shift


def _quad(f, lo: float, hi: float, epsabs: float) -> tuple[float, float, dict]:
    out = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=1e-11, limit=500, full_output=1)
    val, err, info = out[0], out[1], out[2]
    if len(out) > 3 and out[3] and err > epsabs:
        raise OracleFailureError(f"quadrature on [{lo}, {hi}] failed: {out[3]} (err={err:.2e})")
    return val, err, info


def stirling_log_gamma(gamma1: float, gamma2: float, x: float) -> float:
    """Leading-order Stirling approximation to log Gamma(gamma1*x + gamma2)."""
    z = gamma1 * x
    if not (z > 0.0 and z + gamma2 > 0.0):
        raise ValidationError(
            f"need gamma1*x > 0 and gamma1*x + gamma2 > 0, got {z} and {z + gamma2}"
        )
    return 0.5 * math.log(2.0 * math.pi) - z + (z + gamma2 - 0.5) * math.log(z)
