"""Seeded Monte Carlo harness for nonnested consistency.

For each n on the grid a design with X'X = n I is drawn once, the two
competing submodels share ``shared`` leading columns and each owns a
disjoint block of extra columns.  With an orthogonal design the finite-n
pseudo-distances equal their targets exactly, so the theoretical regions
become experiment knobs.

Random streams are derived with :class:`numpy.random.SeedSequence` from
``(seed, stream, n[, replicate])``.  Replicates are processed in fixed-size
chunks, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import jsonschema
import numpy as np
from numpy.typing import NDArray

from .asymptotics import (
    ConsistencyVerdict, LimitDistances, Scenario, ScenarioConfig, Truth, lemma1_limit, verdict,
)
from .bayesfactor import HyperParams, log_bf_pair
from .errors import GBFError, ValidationError
from .regression import Dataset, ModelSpec, Projector, fit_many, projection_quadform

CHUNK = 25
MAX_N = 4000
MAX_REPLICATES = 500


def default_workers() -> int:
    env = os.environ.get("GBF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"GBF_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


@dataclass(frozen=True)
class DimRule:
    """i = ceil(c1 n^a1), j = ceil(c2 n^a2); linear growth uses n/s and n/r instead."""

    c1: float = 1.0
    c2: float = 1.0
    shared: int = 0


@dataclass(frozen=True)
class BetaRule:
    """Target total signal delta*_t0 and cross distance (delta*_ji or delta*_ij)."""

    delta_t0: float
    delta_cross: float


@dataclass(frozen=True)
class SimPlan:
    scenario: ScenarioConfig
    n_grid: tuple[int, ...]
    truth: Truth
    beta: BetaRule
    dims: DimRule = field(default_factory=DimRule)
    sigma: float = 1.0
    replicates: int = 200
    seed: int = 0
    a: float = -0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "truth", Truth(self.truth))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValidationError(f"n_grid must be non-empty and increasing: {self.n_grid}")
        if self.n_grid[-1] > MAX_N:
            raise ValidationError(f"n_grid is capped at {MAX_N}")
        if not (1 <= self.replicates <= MAX_REPLICATES):
            raise ValidationError(f"replicates must lie in [1, {MAX_REPLICATES}]")
        if not self.sigma > 0.0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        b = self.beta
        if not (0.0 <= b.delta_cross <= b.delta_t0):
            raise ValidationError("need 0 <= delta_cross <= delta_t0")
        if self.dims.shared < 0:
            raise ValidationError("shared must be non-negative")
        if b.delta_t0 > b.delta_cross and self.dims.shared == 0:
            raise ValidationError("delta_t0 > delta_cross needs at least one shared column")
        HyperParams(self.a)
        for n in self.n_grid:
            i, j = self.dims_at(n)
            if min(i, j) <= self.dims.shared:
                raise ValidationError(
                    f"n={n}: models need extra columns beyond the {self.dims.shared} shared ones "
                    f"(i={i}, j={j})"
                )
            if not i + j + 2 < n:
                raise ValidationError(f"n={n}: need i + j + 2 < n, got i={i}, j={j}")

    def dims_at(self, n: int) -> tuple[int, int]:
        sc, d = self.scenario, self.dims
        if sc.scenario is Scenario.S3:
            return math.ceil(n / sc.s), math.ceil(n / sc.r)
        i = math.ceil(d.c1 * n**sc.a1)
        j = math.ceil(n / sc.r) if sc.scenario is Scenario.S2 else math.ceil(d.c2 * n**sc.a2)
        return i, j

    def limit_distances(self) -> LimitDistances:
        b = self.beta
        if self.truth is Truth.Mj:
            return LimitDistances(delta_j0=b.delta_t0, delta_ji=b.delta_cross)
        return LimitDistances(delta_i0=b.delta_t0, delta_ij=b.delta_cross)

    def theory(self) -> ConsistencyVerdict:
        return verdict(self.scenario, self.truth, self.limit_distances())

    def lemma_limit(self) -> float:
        """Predicted limit of (1 - R_j^2)/(1 - R_i^2) under the plan's truth."""
        cross = self.beta.delta_cross
        if self.truth is Truth.Mj:
            return lemma1_limit(self.scenario, 0.0, cross)
        return lemma1_limit(self.scenario, cross, 0.0)

    def to_dict(self) -> dict[str, Any]:
        sc = self.scenario
        scen = {"scenario": sc.scenario.value, "a1": sc.a1, "a2": sc.a2}
        if sc.r is not None:
            scen["r"] = sc.r
        if sc.s is not None:
            scen["s"] = sc.s
        return {
            "scenario": scen,
            "n_grid": list(self.n_grid),
            "truth": self.truth.value,
            "beta": asdict(self.beta),
            "dims": asdict(self.dims),
            "sigma": self.sigma,
            "replicates": self.replicates,
            "seed": self.seed,
            "a": self.a,
        }


PLAN_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["scenario", "n_grid", "truth", "beta"],
    "additionalProperties": False,
    "properties": {
        "scenario": {
            "type": "object",
            "required": ["scenario"],
            "additionalProperties": False,
            "properties": {
                "scenario": {"enum": ["S1", "S2", "S3"]},
                "a1": {"type": "number", "minimum": 0, "maximum": 1},
                "a2": {"type": "number", "minimum": 0, "maximum": 1},
                "r": {"type": "number", "exclusiveMinimum": 1},
                "s": {"type": "number", "exclusiveMinimum": 1},
            },
        },
        "n_grid": {
            "type": "array", "minItems": 1,
            "items": {"type": "integer", "minimum": 4, "maximum": MAX_N},
        },
        "truth": {"enum": ["Mi", "Mj"]},
        "beta": {
            "type": "object",
            "required": ["delta_t0", "delta_cross"],
            "additionalProperties": False,
            "properties": {
                "delta_t0": {"type": "number", "minimum": 0},
                "delta_cross": {"type": "number", "minimum": 0},
            },
        },
        "dims": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "c1": {"type": "number", "exclusiveMinimum": 0},
                "c2": {"type": "number", "exclusiveMinimum": 0},
                "shared": {"type": "integer", "minimum": 0},
            },
        },
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "replicates": {"type": "integer", "minimum": 1, "maximum": MAX_REPLICATES},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "a": {"type": "number", "exclusiveMinimum": -1},
    },
}


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def plan_from_dict(d: Any) -> SimPlan:
    """Validate a JSON plan and build a :class:`SimPlan`.

    Errors carry the JSON-pointer path of the offending value.
    """
    validator = jsonschema.Draft202012Validator(PLAN_SCHEMA)
    errors = sorted(validator.iter_errors(d), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = "; ".join(f"{_pointer(e.absolute_path)}: {e.message}" for e in errors)
        raise ValidationError(f"invalid plan: {msgs}")
    sc = d["scenario"]
    name = sc["scenario"]
    a_default = {"S1": (0.0, 0.0), "S2": (0.0, 1.0), "S3": (1.0, 1.0)}[name]
    try:
        scenario = ScenarioConfig(
            Scenario(name), sc.get("a1", a_default[0]), sc.get("a2", a_default[1]),
            sc.get("r"), sc.get("s"),
        )
    except ValidationError as exc:
        raise ValidationError(f"invalid plan: /scenario: {exc}") from None
    return SimPlan(
        scenario=scenario,
        n_grid=tuple(d["n_grid"]),
        truth=Truth(d["truth"]),
        beta=BetaRule(**d["beta"]),
        dims=DimRule(**d.get("dims", {})),
        sigma=d.get("sigma", 1.0),
        replicates=d.get("replicates", 200),
        seed=d.get("seed", 0),
        a=d.get("a", -0.5),
    )


# ---------------------------------------------------------------------------
# Data generation
# ---------------------------------------------------------------------------


def _rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    return np.random.default_rng(seed)


def make_design(n: int, p_total: int, seed: int | np.random.SeedSequence) -> NDArray[np.float64]:
    """Centered n x p design with X'X = n I."""
    if not n > p_total + 1:
        raise ValidationError(f"need n > p_total + 1, got n={n}, p_total={p_total}")
    z = _rng(seed).standard_normal((n, p_total))
    z -= z.mean(axis=0)
    q, _ = np.linalg.qr(z, mode="reduced")
    x = q * math.sqrt(n)
    x -= x.mean(axis=0)
    return x


def generate_response(
    design: NDArray[np.float64], true_spec: ModelSpec, beta: NDArray[np.float64],
    sigma: float, seed: int | np.random.SeedSequence,
) -> NDArray[np.float64]:
    """y = X_T beta + sigma z, intercept fixed at zero."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (true_spec.dim,):
        raise ValidationError(f"beta has shape {beta.shape}, expected ({true_spec.dim},)")
    if true_spec.dim and true_spec.columns[-1] >= design.shape[1]:
        raise ValidationError(f"{true_spec} exceeds design width {design.shape[1]}")
    if sigma < 0.0:
        raise ValidationError(f"sigma must be non-negative, got {sigma}")
    signal = design[:, list(true_spec.columns)] @ beta
    if sigma == 0.0:
        return signal
    return signal + sigma * _rng(seed).standard_normal(design.shape[0])


@dataclass
class _Slice:
    """Everything fixed at one n: design, specs, true coefficients, factorizations."""

    n: int
    i: int
    j: int
    x: NDArray[np.float64]
    spec_i: ModelSpec
    spec_j: ModelSpec
    true_spec: ModelSpec
    other_spec: ModelSpec
    beta: NDArray[np.float64]
    proj_i: Projector
    proj_j: Projector


def _build_slice(plan: SimPlan, n: int) -> _Slice:
    i, j = plan.dims_at(n)
    sh = plan.dims.shared
    p_total = i + j - sh
    x = make_design(n, p_total, np.random.SeedSequence(plan.seed, spawn_key=(0, n)))
    spec_i = ModelSpec(tuple(range(i)))
    spec_j = ModelSpec(tuple(range(sh)) + tuple(range(i, i + j - sh)))
    true_spec, other = (spec_j, spec_i) if plan.truth is Truth.Mj else (spec_i, spec_j)
    n_extra = true_spec.dim - sh
    s2 = plan.sigma**2
    core = plan.beta.delta_t0 - plan.beta.delta_cross
    beta = np.empty(true_spec.dim)
    beta[:sh] = math.sqrt(core * s2 / sh) if sh else 0.0
    beta[sh:] = math.sqrt(plan.beta.delta_cross * s2 / n_extra)
    return _Slice(
        n, i, j, x, spec_i, spec_j, true_spec, other, beta,
        Projector(x[:, list(spec_i.columns)]), Projector(x[:, list(spec_j.columns)]),
    )


def _replicate_seed(plan: SimPlan, n: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(plan.seed, spawn_key=(1, n, rep))


def _run_chunk(plan: SimPlan, sl: _Slice, reps: range) -> tuple[np.ndarray, np.ndarray]:
    hp = HyperParams(plan.a)
    ys = np.column_stack([
        generate_response(sl.x, sl.true_spec, sl.beta, plan.sigma, _replicate_seed(plan, sl.n, r))
        for r in reps
    ])
    fits_i = fit_many(sl.x, sl.spec_i, ys, sl.proj_i)
    fits_j = fit_many(sl.x, sl.spec_j, ys, sl.proj_j)
    log_bf = np.empty(len(reps))
    ratio = np.empty(len(reps))
    for k, (fj, fi) in enumerate(zip(fits_j, fits_i)):
        try:
            log_bf[k] = log_bf_pair(sl.n, fj, fi, hp).log_bf
        except GBFError as exc:
            raise type(exc)(f"n={sl.n}, replicate={reps[k]}: {exc}") from exc
        ratio[k] = fj.rss / fi.rss
    return log_bf, ratio


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NRecord:
    n: int
    i: int
    j: int
    frac_favor_truth: float
    mean_log_bf: float
    sd_log_bf: float
    theory_consistent: bool
    mean_r2_ratio: float
    se_r2_ratio: float
    lemma1_limit: float
    delta_target: float
    delta_realized: float


CSV_COLUMNS = ("n", "i", "j", "frac_favor_truth", "mean_log_bf", "sd_log_bf", "theory_consistent")


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


@dataclass(frozen=True)
class SimResult:
    plan: SimPlan
    theory: ConsistencyVerdict
    records: tuple[NRecord, ...]

    def fractions(self) -> list[float]:
        return [r.frac_favor_truth for r in self.records]

    def to_dict(self) -> dict[str, Any]:
        return {
            "plan": self.plan.to_dict(),
            "theory": self.theory.to_dict(),
            "records": [asdict(r) for r in self.records],
        }

    def to_json(self, **extra: Any) -> str:
        d = self.to_dict()
        d.update(extra)
        return json.dumps(d, indent=2, allow_nan=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()


def _mean_sd(values: np.ndarray) -> tuple[float, float]:
    m = math.fsum(values) / len(values)
    if len(values) < 2:
        return m, 0.0
    return m, math.sqrt(math.fsum((values - m) ** 2) / (len(values) - 1))


def run_plan(plan: SimPlan, workers: int | None = None) -> SimResult:
    """Run every replicate at every n and tally how often the truth is favored."""
    workers = default_workers() if workers is None else max(1, int(workers))
    theory = plan.theory()
    lemma = plan.lemma_limit()
    records = []
    sign = 1.0 if plan.truth is Truth.Mj else -1.0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for n in plan.n_grid:
            sl = _build_slice(plan, n)
            chunks = [range(s, min(s + CHUNK, plan.replicates))
                      for s in range(0, plan.replicates, CHUNK)]
            outs = list(pool.map(lambda c: _run_chunk(plan, sl, c), chunks))
            log_bf = np.concatenate([o[0] for o in outs])
            ratio = np.concatenate([o[1] for o in outs])
            favor = int(np.count_nonzero(sign * log_bf > 0.0))
            m_bf, sd_bf = _mean_sd(log_bf)
            m_ra, sd_ra = _mean_sd(ratio)
            probe = Dataset(np.zeros(n), sl.x)
            realized = projection_quadform(probe, sl.true_spec, sl.other_spec, sl.beta,
                                           plan.sigma**2)
            records.append(NRecord(
                n, sl.i, sl.j, favor / plan.replicates, m_bf, sd_bf, theory.consistent,
                m_ra, sd_ra / math.sqrt(plan.replicates), lemma,
                plan.beta.delta_cross, realized,
            ))
    return SimResult(plan, theory, tuple(records))


def empirical_r2_ratio(plan: SimPlan, n: int, replicate: int) -> float:
    """(1 - R_j^2)/(1 - R_i^2) for one (n, replicate) slice of a plan."""
    if n not in plan.n_grid:
        raise ValidationError(f"n={n} is not on the plan's grid")
    if not 0 <= replicate < plan.replicates:
        raise ValidationError(f"replicate {replicate} out of range")
    sl = _build_slice(plan, n)
    _, ratio = _run_chunk(plan, sl, range(replicate, replicate + 1))
    return float(ratio[0])


def with_seed(plan: SimPlan, seed: int) -> SimPlan:
    return replace(plan, seed=seed)
