"""Balanced two-way ANOVA as a centered linear model.

Factor A has p levels, factor B has q levels, and each cell holds
``r_cell`` observations.  Effects are coded with sum-to-zero contrasts (the
last level is minus the sum of the others), which under balance makes every
column exactly mean-zero and the A, B and A x B blocks mutually orthogonal.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numpy.typing import NDArray
from scipy import optimize

from .asymptotics import kappa
from .bayesfactor import BayesFactorResult, HyperParams, log_bf_pair
from .errors import RootFailureError, ValidationError
from .regression import Dataset, ModelSpec, fit


class AnovaModel(str, enum.Enum):
    M0 = "M0"  # no effects
    M1 = "M1"  # A only
    M2 = "M2"  # B only
    M3 = "M3"  # additive A + B
    M4 = "M4"  # full, with interaction


@dataclass(frozen=True)
class TwoWayDesign:
    p: int
    q: int
    r_cell: int

    def __post_init__(self) -> None:
        for name in ("p", "q"):
            v = getattr(self, name)
            if int(v) != v or v < 2:
                raise ValidationError(f"{name} must be an integer >= 2, got {v}")
        if int(self.r_cell) != self.r_cell or self.r_cell < 1:
            raise ValidationError(f"r_cell must be an integer >= 1, got {self.r_cell}")

    @property
    def n(self) -> int:
        return self.p * self.q * self.r_cell

    @property
    def n_columns(self) -> int:
        return self.p * self.q - 1

    def levels(self) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
        """Factor levels per row; rows run over A, then B, then replicate."""
        a = np.repeat(np.arange(self.p), self.q * self.r_cell)
        b = np.tile(np.repeat(np.arange(self.q), self.r_cell), self.p)
        return a, b

    def blocks(self) -> dict[str, tuple[int, ...]]:
        pa, qb = self.p - 1, self.q - 1
        return {
            "A": tuple(range(pa)),
            "B": tuple(range(pa, pa + qb)),
            "AB": tuple(range(pa + qb, pa + qb + pa * qb)),
        }

    def submodels(self) -> dict[AnovaModel, ModelSpec]:
        bl = self.blocks()
        return {
            AnovaModel.M0: ModelSpec(),
            AnovaModel.M1: ModelSpec(bl["A"]),
            AnovaModel.M2: ModelSpec(bl["B"]),
            AnovaModel.M3: ModelSpec(bl["A"] + bl["B"]),
            AnovaModel.M4: ModelSpec(bl["A"] + bl["B"] + bl["AB"]),
        }


def _effects_coding(level: NDArray[np.int64], k: int) -> NDArray[np.float64]:
    out = np.zeros((level.shape[0], k - 1))
    for c in range(k - 1):
        out[level == c, c] = 1.0
    out[level == k - 1, :] = -1.0
    return out


def build_design(design: TwoWayDesign) -> NDArray[np.float64]:
    """n x (pq - 1) matrix: A block, B block, then elementwise A x B products."""
    a, b = design.levels()
    xa = _effects_coding(a, design.p)
    xb = _effects_coding(b, design.q)
    xab = (xa[:, :, None] * xb[:, None, :]).reshape(design.n, -1)
    return np.hstack([xa, xb, xab])


def anova_bf(
    dataset: Dataset, design: TwoWayDesign, model: AnovaModel | str, base: AnovaModel | str,
    hp: HyperParams = HyperParams(),
) -> BayesFactorResult:
    """log BF[model : base] for two of the five submodels."""
    specs = design.submodels()
    if dataset.p != design.n_columns or dataset.n != design.n:
        raise ValidationError("dataset does not match the two-way design")
    fj = fit(dataset, specs[AnovaModel(model)])
    fi = fit(dataset, specs[AnovaModel(base)])
    return log_bf_pair(dataset.n, fj, fi, hp)


def all_pairwise_bf(
    dataset: Dataset, design: TwoWayDesign, hp: HyperParams = HyperParams()
) -> dict[tuple[AnovaModel, AnovaModel], BayesFactorResult]:
    """The ten log BF[M_b : M_a] for a < b."""
    specs = design.submodels()
    fits = {m: fit(dataset, s) for m, s in specs.items()}
    return {
        (hi, lo): log_bf_pair(dataset.n, fits[hi], fits[lo], hp)
        for lo, hi in combinations(list(AnovaModel), 2)
    }


def h_root(r: float, c: float, xtol: float = 1e-12, maxiter: int = 200) -> float:
    """Unique x > 0 solving (x+1)^r / r - (x+1) - c = 0.

    Solved for u = x + 1 on [1, u_hi] with u_hi doubled until the left side
    is positive; f(u) = u^r/r - u - c is strictly increasing for u > 1.
    """
    if not (math.isfinite(r) and r > 1.0):
        raise ValidationError(f"r must be > 1, got {r}")
    if not (math.isfinite(c) and c > 0.0):
        raise ValidationError(f"c must be positive, got {c}")

    def f(u: float) -> float:
        return u**r / r - u - c

    u_hi = 2.0
    while f(u_hi) <= 0.0:
        u_hi *= 2.0
        if u_hi > 1e300:
            raise RootFailureError(f"could not bracket root for r={r}, c={c}")
    try:
        u, info = optimize.brentq(f, 1.0, u_hi, xtol=xtol, rtol=4 * np.finfo(float).eps,
                                  maxiter=maxiter, full_output=True, disp=False)
    except (RuntimeError, ValueError) as exc:  # pragma: no cover - brentq contract
        raise RootFailureError(str(exc)) from exc
    if not info.converged:
        raise RootFailureError(f"no convergence after {info.iterations} iterations ({info.flag})")
    return u - 1.0


def m4_consistency_boundary(r: float, delta_10: float, delta_20: float) -> float:
    """Boundary H(r, delta_10 + delta_20) for delta*_43 when sampling from M4.

    The root is cross-checked against the fixed-point form
    x = kappa(r, delta_10 + delta_20 + x).
    """
    if delta_10 < 0.0 or delta_20 < 0.0:
        raise ValidationError("main-effect distances must be non-negative")
    c = delta_10 + delta_20
    x = h_root(r, c)
    fixed = kappa(r, c + x)
    if abs(fixed - x) > 1e-8 * max(1.0, x):
        raise RootFailureError(f"root {x} fails the kappa fixed-point check ({fixed})")
    return x


def quadratic_boundary(c: float) -> float:
    """Closed form of h_root(2, c): sqrt(1 + 2c)."""
    return math.sqrt(1.0 + 2.0 * c)


def simulate_response(
    design: TwoWayDesign, effect_a: float, effect_b: float, effect_ab: float,
    sigma: float, rng: np.random.Generator, mu: float = 0.0,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Response with every coefficient in a block equal to that block's effect.

    Returns (y, beta) where beta is the full coefficient vector.
    """
    if sigma < 0.0:
        raise ValidationError(f"sigma must be non-negative, got {sigma}")
    x = build_design(design)
    bl = design.blocks()
    beta = np.zeros(design.n_columns)
    beta[list(bl["A"])] = effect_a
    beta[list(bl["B"])] = effect_b
    beta[list(bl["AB"])] = effect_ab
    y = mu + x @ beta + sigma * rng.standard_normal(design.n)
    return y, beta
