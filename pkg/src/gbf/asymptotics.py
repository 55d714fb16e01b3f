"""Limit theory for nonnested comparisons: region boundaries and verdicts.

Notation follows the usual growth regimes for the two model dimensions
i = O(n^a1), j = O(n^a2):

* S1: 0 <= a1 <= a2 < 1 (fixed dimensions are the a1 = a2 = 0 case)
* S2: 0 <= a1 < a2 = 1, with r = lim n/j > 1
* S3: a1 = a2 = 1, with r = lim n/j and s = lim n/i, 1 < r <= s

Pseudo-distances are the limiting values delta*_ji of
beta_j' X_j' (I - H_i) X_j beta_j / (n sigma^2).  Every boundary function is
evaluated through logs (``expm1``/``log1p``) so that large r or s neither
overflow nor cancel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

from .errors import ValidationError

# Relative slack used only to flag verdicts that sit on a boundary.
_BOUNDARY_RTOL = 1e-12


class Scenario(str, enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"


class Truth(str, enum.Enum):
    Mi = "Mi"
    Mj = "Mj"


class Theorem(str, enum.Enum):
    T3 = "T3"
    T4a = "T4a"
    T4b = "T4b"
    T5a = "T5a"
    T5b = "T5b"


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario
    a1: float = 0.0
    a2: float = 0.0
    r: float | None = None
    s: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        a1, a2 = float(self.a1), float(self.a2)
        if not (0.0 <= a1 <= 1.0 and 0.0 <= a2 <= 1.0):
            raise ValidationError(f"growth exponents must lie in [0, 1], got a1={a1}, a2={a2}")
        sc = self.scenario
        if sc is Scenario.S1 and not (a1 <= a2 < 1.0):
            raise ValidationError(f"S1 needs 0 <= a1 <= a2 < 1, got a1={a1}, a2={a2}")
        if sc is Scenario.S2:
            if not (a1 < a2 == 1.0):
                raise ValidationError(f"S2 needs 0 <= a1 < a2 = 1, got a1={a1}, a2={a2}")
            if self.r is None or not self.r > 1.0:
                raise ValidationError(f"S2 needs r > 1, got r={self.r}")
        if sc is Scenario.S3:
            if not (a1 == a2 == 1.0):
                raise ValidationError(f"S3 needs a1 = a2 = 1, got a1={a1}, a2={a2}")
            if self.r is None or self.s is None:
                raise ValidationError("S3 needs both r and s")
            if not (1.0 < self.r <= self.s):
                raise ValidationError(f"S3 needs 1 < r <= s, got r={self.r}, s={self.s}")

    @classmethod
    def fixed_dims(cls) -> "ScenarioConfig":
        return cls(Scenario.S1, 0.0, 0.0)


@dataclass(frozen=True)
class LimitDistances:
    """Limiting pseudo-distances; only those relevant to the truth are read."""

    delta_j0: float = 0.0
    delta_i0: float = 0.0
    delta_ji: float = 0.0
    delta_ij: float = 0.0

    def __post_init__(self) -> None:
        for name, v in asdict(self).items():
            if not (math.isfinite(v) and v >= 0.0):
                raise ValidationError(f"{name} must be finite and non-negative, got {v}")
        if self.delta_ji > self.delta_j0:
            raise ValidationError(
                f"delta_ji={self.delta_ji} exceeds delta_j0={self.delta_j0}: "
                "M_0 is nested in M_i, so delta_ji <= delta_j0"
            )
        if self.delta_ij > self.delta_i0:
            raise ValidationError(
                f"delta_ij={self.delta_ij} exceeds delta_i0={self.delta_i0}: "
                "M_0 is nested in M_j, so delta_ij <= delta_i0"
            )


@dataclass(frozen=True)
class ConsistencyVerdict:
    truth: Truth
    consistent: bool
    lower_bound: float
    upper_bound: float
    condition_met: bool
    theorem: Theorem
    queried: float
    boundary: bool = False
    method: str = "g-prior"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["truth"] = self.truth.value
        d["theorem"] = self.theorem.value
        return d


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


def _check_r(r: float) -> None:
    _need(math.isfinite(r) and r > 1.0, f"r must be a finite number > 1, got {r}")


def _check_rs(r: float, s: float) -> None:
    _check_r(r)
    _need(math.isfinite(s) and s >= r, f"need 1 < r <= s, got r={r}, s={s}")


def _check_nonneg(name: str, v: float) -> None:
    _need(math.isfinite(v) and v >= 0.0, f"{name} must be finite and non-negative, got {v}")


# ---------------------------------------------------------------------------
# Limit of (1 - R_p^2) / (1 - R_i^2)
# ---------------------------------------------------------------------------


def lemma1_limit(scenario: ScenarioConfig, delta_tp: float, delta_ti: float) -> float:
    """Predicted probability limit of (1 - R_p^2)/(1 - R_i^2) under the truth M_t.

    ``p`` is the larger-growth model (ratio n/p -> r), ``i`` the other one
    (n/i -> s in S3).
    """
    num, den = 1.0 + delta_tp, 1.0 + delta_ti
    if scenario.scenario is not Scenario.S1:
        num -= 1.0 / scenario.r
    if scenario.scenario is Scenario.S3:
        den -= 1.0 / scenario.s
    _need(num > 0.0 and den > 0.0, f"non-positive limit terms: numerator {num}, denominator {den}")
    return num / den


# ---------------------------------------------------------------------------
# Scenario 2 boundaries
# ---------------------------------------------------------------------------


def delta_threshold(r: float) -> float:
    """delta(r) = r^(1/(r-1)) - 1: smallest delta*_j0 with a nonempty region."""
    _check_r(r)
    return math.expm1(math.log(r) / (r - 1.0))


def kappa(r: float, s: float) -> float:
    """kappa(r, s) = [r(1+s)]^(1/r) - 1."""
    _check_r(r)
    _check_nonneg("s", s)
    return math.expm1((math.log(r) + math.log1p(s)) / r)


def xi(r: float) -> float:
    """Intrinsic-BF analogue of delta(r): (r-1)/((r+1)^((r-1)/r) - 1) - 1."""
    _check_r(r)
    return (r - 1.0) / math.expm1((r - 1.0) / r * math.log1p(r)) - 1.0


def eta(r: float, s: float) -> float:
    """Intrinsic-BF analogue of kappa: (r+s)/(1+r)^((r-1)/r) - 1."""
    _check_r(r)
    _check_nonneg("s", s)
    return (r + s) * math.exp(-(r - 1.0) / r * math.log1p(r)) - 1.0


# ---------------------------------------------------------------------------
# Scenario 3 boundaries
# ---------------------------------------------------------------------------


def _t5_log_base(a: float, b: float, c: float) -> float:
    # log of (a^(1/a) / b^(1/b)) (1+c)^(1/a - 1/b)
    return math.log(a) / a - math.log(b) / b + (1.0 / a - 1.0 / b) * math.log1p(c)


def phi(a: float, b: float, c: float) -> float:
    """Lower edge of the S3 consistency region under M_j.

    ((b-1)/b) {[(a^(1/a)/b^(1/b)) (1+c)^(1/a-1/b)]^(b/(b-1)) - 1}, clamped at 0.
    A non-positive value means the whole interval (0, c] is consistent.
    """
    _need(math.isfinite(a) and a > 1.0, f"a must be > 1, got {a}")
    _need(math.isfinite(b) and b > 1.0, f"b must be > 1, got {b}")
    _check_nonneg("c", c)
    val = (b - 1.0) / b * math.expm1(b / (b - 1.0) * _t5_log_base(a, b, c))
    return max(val, 0.0)


def _t5a_margin(r: float, s: float, delta_i0: float) -> float:
    lhs = (1.0 - 1.0 / r) * math.log1p(delta_i0 / (1.0 - 1.0 / r))
    rhs = _t5_log_base(s, r, delta_i0)
    return lhs - rhs


def _t5b_margin(r: float, s: float, delta_j0: float) -> float:
    lhs = (1.0 - 1.0 / s) * math.log1p(delta_j0 / (1.0 - 1.0 / s))
    rhs = _t5_log_base(r, s, delta_j0)
    return lhs - rhs


def t5a_condition(r: float, s: float, delta_i0: float) -> bool:
    """Nonempty-region condition under M_i in S3 (strict inequality)."""
    _check_rs(r, s)
    _check_nonneg("delta_i0", delta_i0)
    return _t5a_margin(r, s, delta_i0) > 0.0


def t5a_lower_bound(r: float, s: float, delta_i0: float) -> float:
    """Lower edge of the S3 consistency region for delta*_ij under M_i, clamped at 0."""
    _check_rs(r, s)
    _check_nonneg("delta_i0", delta_i0)
    val = (r - 1.0) / r * math.expm1(r / (r - 1.0) * _t5_log_base(s, r, delta_i0))
    return max(val, 0.0)


def t5b_condition(r: float, s: float, delta_j0: float) -> bool:
    """Nonempty-region condition under M_j in S3 (strict inequality)."""
    _check_rs(r, s)
    _check_nonneg("delta_j0", delta_j0)
    return _t5b_margin(r, s, delta_j0) > 0.0


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


def _on_edge(x: float, edge: float) -> bool:
    return abs(x - edge) <= _BOUNDARY_RTOL * max(1.0, abs(edge))


def _interval_verdict(
    truth: Truth, theorem: Theorem, query: float, lower: float, upper: float,
    condition: bool, cond_margin: float = math.inf, method: str = "g-prior",
) -> ConsistencyVerdict:
    inside = lower < query <= upper
    consistent = bool(condition and inside and lower < upper)
    boundary = _on_edge(query, lower) or abs(cond_margin) <= _BOUNDARY_RTOL
    return ConsistencyVerdict(
        truth, consistent, lower, upper, bool(condition), theorem, query, boundary, method
    )


def verdict(scenario: ScenarioConfig, truth: Truth | str, d: LimitDistances) -> ConsistencyVerdict:
    """Asymptotic consistency of BF[M_j : M_i] when ``truth`` generated the data."""
    truth = Truth(truth)
    sc = scenario.scenario
    if sc is Scenario.S1:
        if truth is Truth.Mj:
            return _interval_verdict(truth, Theorem.T3, d.delta_ji, 0.0, d.delta_j0, True)
        return _interval_verdict(truth, Theorem.T3, d.delta_ij, 0.0, d.delta_i0, True)
    r = scenario.r
    if sc is Scenario.S2:
        if truth is Truth.Mi:
            return _interval_verdict(truth, Theorem.T4a, d.delta_ij, 0.0, d.delta_i0, True)
        margin = d.delta_j0 - delta_threshold(r)
        return _interval_verdict(
            truth, Theorem.T4b, d.delta_ji, kappa(r, d.delta_j0), d.delta_j0, margin > 0.0, margin
        )
    s = scenario.s
    if truth is Truth.Mi:
        margin = _t5a_margin(r, s, d.delta_i0)
        cond = d.delta_i0 > 0.0 and margin > 0.0
        return _interval_verdict(
            truth, Theorem.T5a, d.delta_ij, t5a_lower_bound(r, s, d.delta_i0), d.delta_i0, cond, margin
        )
    margin = _t5b_margin(r, s, d.delta_j0)
    cond = d.delta_j0 > 0.0 and margin > 0.0
    return _interval_verdict(
        truth, Theorem.T5b, d.delta_ji, phi(r, s, d.delta_j0), d.delta_j0, cond, margin
    )


def intrinsic_verdict_s2(
    r: float, delta_j0: float, delta_ji: float, delta_ij: float, truth: Truth | str,
    delta_i0: float | None = None,
) -> ConsistencyVerdict:
    """Scenario-2 verdict for the intrinsic Bayes factor (xi/eta in place of delta/kappa)."""
    _check_r(r)
    truth = Truth(truth)
    for name, v in (("delta_j0", delta_j0), ("delta_ji", delta_ji), ("delta_ij", delta_ij)):
        _check_nonneg(name, v)
    if truth is Truth.Mi:
        upper = math.inf if delta_i0 is None else delta_i0
        return _interval_verdict(truth, Theorem.T4a, delta_ij, 0.0, upper, True, method="intrinsic")
    _need(delta_ji <= delta_j0, f"delta_ji={delta_ji} exceeds delta_j0={delta_j0}")
    margin = delta_j0 - xi(r)
    return _interval_verdict(
        truth, Theorem.T4b, delta_ji, eta(r, delta_j0), delta_j0, margin > 0.0, margin,
        method="intrinsic",
    )
