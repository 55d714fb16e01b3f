"""Bayes factors under Zellner's g-prior with a beta-prime hyperprior on g.

Closed-form null-based and pairwise Bayes factors, the asymptotic
consistency regions for nonnested comparisons with growing dimensions,
the balanced two-way ANOVA application, and a seeded Monte Carlo harness.
"""

from .asymptotics import (
    ConsistencyVerdict, LimitDistances, Scenario, ScenarioConfig, Theorem, Truth,
    delta_threshold, eta, intrinsic_verdict_s2, kappa, lemma1_limit, phi,
    t5a_condition, t5a_lower_bound, t5b_condition, verdict, xi,
)
from .bayesfactor import (
    BayesFactorResult, HyperParams, log_bf_given_g, log_bf_oracle_quadrature, log_bf_pair,
    log_bf_schwarz, log_bf_vs_null, stirling_log_gamma,
)
from .regression import Dataset, FitSummary, ModelSpec, center_columns, fit, projection_quadform

__version__ = "0.1.0"
