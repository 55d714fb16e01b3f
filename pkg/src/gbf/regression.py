"""Least-squares layer: centering, submodel fits and projection quadratic forms.

All designs are column-centered, so the intercept is orthogonal to every
predictor and never has to be carried as an explicit column.  Fits use a
thin QR factorization of the selected columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InsufficientDataError, SingularDesignError, ValidationError

#: Singular values below ``RANK_RTOL * s_max`` flag rank deficiency.
RANK_RTOL = 1e-10


def center_columns(raw_design: ArrayLike) -> NDArray[np.float64]:
    """Subtract each column's mean.

    Raises ValidationError for fewer than two rows or non-finite entries.
    """
    x = np.array(raw_design, dtype=np.float64, copy=True)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValidationError(f"design must be 2-D, got shape {x.shape}")
    if x.shape[0] < 2:
        raise ValidationError(f"need at least 2 rows to center, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("design contains NaN or Inf")
    x -= x.mean(axis=0)
    return x


@dataclass(frozen=True)
class ModelSpec:
    """A submodel: sorted, duplicate-free 0-based predictor column indices.

    The empty spec is the intercept-only null model.
    """

    columns: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        cols = tuple(int(c) for c in self.columns)
        if any(c < 0 for c in cols):
            raise ValidationError(f"negative column index in {cols}")
        if any(b <= a for a, b in zip(cols, cols[1:])):
            raise ValidationError(f"columns must be strictly increasing: {cols}")
        object.__setattr__(self, "columns", cols)

    @classmethod
    def of(cls, columns: Iterable[int]) -> "ModelSpec":
        """Build from an arbitrary iterable (sorted and deduplicated)."""
        return cls(tuple(sorted(set(int(c) for c in columns))))

    @property
    def dim(self) -> int:
        return len(self.columns)

    def issubset(self, other: "ModelSpec") -> bool:
        return set(self.columns) <= set(other.columns)

    def __str__(self) -> str:
        return "M{" + ",".join(map(str, self.columns)) + "}"


NULL_MODEL = ModelSpec()


@dataclass(frozen=True, eq=False)
class Dataset:
    """Response plus centered design.  Columns are centered on construction."""

    y: NDArray[np.float64]
    x: NDArray[np.float64]

    def __post_init__(self) -> None:
        y = np.array(self.y, dtype=np.float64).ravel()
        x = center_columns(self.x)
        n, p = x.shape
        if y.shape[0] != n:
            raise ValidationError(f"y has {y.shape[0]} rows but x has {n}")
        if not np.all(np.isfinite(y)):
            raise ValidationError("response contains NaN or Inf")
        if n < p + 2:
            raise InsufficientDataError(f"need n >= p + 2, got n={n}, p={p}")
        y.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def check_spec(self, model: ModelSpec) -> None:
        if model.columns and model.columns[-1] >= self.p:
            raise ValidationError(
                f"{model} references column {model.columns[-1]} but p={self.p}"
            )

    def submatrix(self, model: ModelSpec) -> NDArray[np.float64]:
        self.check_spec(model)
        return self.x[:, list(model.columns)]


@dataclass(frozen=True)
class FitSummary:
    """Outcome of regressing y on the intercept plus a submodel's columns."""

    r_squared: float
    rss: float
    tss: float
    model: ModelSpec = field(default=NULL_MODEL)

    def __post_init__(self) -> None:
        if not (self.tss > 0.0 and self.rss >= 0.0):
            raise ValidationError(f"need tss > 0 and rss >= 0, got tss={self.tss}, rss={self.rss}")
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValidationError(f"r_squared must lie in [0, 1], got {self.r_squared}")
        if self.model.dim == 0 and self.r_squared != 0.0:
            raise ValidationError("the null model has R^2 = 0 by definition")

    @property
    def dim(self) -> int:
        return self.model.dim

    @classmethod
    def synthetic(cls, r_squared: float, dim: int) -> "FitSummary":
        """A fit with prescribed R^2 (tss = 1), for evaluating formulas directly."""
        if not 0.0 <= r_squared <= 1.0:
            raise ValidationError(f"r_squared must lie in [0, 1], got {r_squared}")
        return cls(float(r_squared), 1.0 - float(r_squared), 1.0, ModelSpec(tuple(range(dim))))


class Projector:
    """Thin-QR factorization of centered columns, reusable across responses.

    ``Projector(None)`` (or a zero-column matrix) represents the null model
    whose hat matrix is zero on the centered subspace.
    """

    def __init__(self, x_sub: NDArray[np.float64] | None, n: int | None = None):
        if x_sub is None or x_sub.shape[1] == 0:
            if n is None:
                n = 0 if x_sub is None else x_sub.shape[0]
            self.n, self.dim, self.q = n, 0, None
            return
        n, j = x_sub.shape
        self.n, self.dim = n, j
        if j >= n - 1:
            raise InsufficientDataError(f"model dimension j={j} needs n > j + 1, got n={n}")
        q, r = np.linalg.qr(x_sub, mode="reduced")
        sv = np.linalg.svd(r, compute_uv=False)
        if not np.isfinite(sv[0]) or sv[0] == 0.0 or sv[-1] < RANK_RTOL * sv[0]:
            raise SingularDesignError(
                f"design of dimension {j} is rank deficient "
                f"(singular value ratio {sv[-1] / sv[0] if sv[0] else 0.0:.3e})"
            )
        self.q = q

    @classmethod
    def for_model(cls, dataset: Dataset, model: ModelSpec) -> "Projector":
        if model.dim == 0:
            dataset.check_spec(model)
            return cls(None, dataset.n)
        return cls(dataset.submatrix(model))

    def residualize(self, v: NDArray[np.float64]) -> NDArray[np.float64]:
        """(I - H) v for centered v; works column-wise on 2-D input."""
        if self.q is None:
            return np.array(v, dtype=np.float64, copy=True)
        return v - self.q @ (self.q.T @ v)

    def rss(self, y_centered: NDArray[np.float64]) -> NDArray[np.float64] | float:
        resid = self.residualize(y_centered)
        return np.einsum("i...,i...->...", resid, resid)


def _summary(rss: float, tss: float, model: ModelSpec) -> FitSummary:
    if tss <= 0.0:
        raise ValidationError("response has zero variance")
    if model.dim == 0:
        rss = tss
    rss = min(max(float(rss), 0.0), float(tss))
    return FitSummary(1.0 - rss / tss, rss, float(tss), model)


def fit(dataset: Dataset, model: ModelSpec) -> FitSummary:
    """Least-squares fit of y on [1, X_model]; returns R^2, RSS and TSS."""
    proj = Projector.for_model(dataset, model)
    yc = dataset.y - dataset.y.mean()
    tss = float(yc @ yc)
    return _summary(float(proj.rss(yc)), tss, model)


def fit_many(
    dataset_x: NDArray[np.float64], model: ModelSpec, responses: NDArray[np.float64],
    projector: Projector | None = None,
) -> list[FitSummary]:
    """Fit every column of ``responses`` (n x k) against one centered design.

    The factorization is computed once; pass ``projector`` to reuse it.
    """
    if projector is None:
        projector = Projector(dataset_x[:, list(model.columns)] if model.dim else None,
                              dataset_x.shape[0])
    yc = responses - responses.mean(axis=0)
    tss = np.einsum("ij,ij->j", yc, yc)
    rss = projector.rss(yc)
    return [_summary(float(r), float(t), model) for r, t in zip(np.atleast_1d(rss), tss)]


def projection_quadform(
    dataset: Dataset,
    numer: ModelSpec,
    denom: ModelSpec,
    beta: Sequence[float] | NDArray[np.float64],
    sigma2: float,
) -> float:
    """Finite-n pseudo-distance beta' X_num' (I - H_den) X_num beta / (n sigma^2).

    ``beta`` holds the coefficients of the ``numer`` columns, in order.
    H_den is built from the centered denominator columns; centering makes
    the intercept orthogonal to them, so this equals the hat matrix of
    [1, X_den] on centered vectors.
    """
    beta = np.asarray(beta, dtype=np.float64).ravel()
    if beta.shape[0] != numer.dim:
        raise ValidationError(f"beta has length {beta.shape[0]}, {numer} has dim {numer.dim}")
    if not sigma2 > 0.0:
        raise ValidationError(f"sigma2 must be positive, got {sigma2}")
    dataset.check_spec(numer)
    if numer.dim == 0:
        return 0.0
    signal = dataset.submatrix(numer) @ beta
    resid = Projector.for_model(dataset, denom).residualize(signal)
    return max(float(resid @ resid), 0.0) / (dataset.n * sigma2)
