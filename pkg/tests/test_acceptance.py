"""Acceptance criteria 1-9, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with its measured margin
and runtime; the lines are repeated in the pytest terminal summary.  Run
directly with ``python tests/test_acceptance.py`` for the bare report.
"""

from __future__ import annotations

import contextlib
import csv
import io
import itertools
import json
import math
import time
from importlib import resources

import numpy as np
import pytest

from gbf.anova import h_root, quadratic_boundary
from gbf.asymptotics import delta_threshold, kappa, phi, t5b_condition, xi
from gbf.bayesfactor import HyperParams, log_bf_oracle_quadrature, log_bf_schwarz, log_bf_vs_null
from gbf.cli import main
from gbf.regression import Dataset, FitSummary, ModelSpec, projection_quadform
from gbf.simulation import plan_from_dict, run_plan

REPORT: list[str] = []


def _report(num: int, ok: bool, detail: str, elapsed: float, budget: float) -> None:
    within = elapsed < budget
    line = (f"{'PASS' if ok and within else 'FAIL'}  criterion {num}: {detail} "
            f"[{elapsed:.2f}s / budget {budget:g}s]")
    REPORT.append(line)
    print(line)
    assert ok, line
    assert within, line


def _plan(name: str):
    text = resources.files("gbf").joinpath("plans", name + ".json").read_text()
    return plan_from_dict(json.loads(text))


def _nondecreasing(xs):
    return all(b >= a for a, b in zip(xs, xs[1:]))


def test_criterion_1_closed_form_vs_quadrature():
    t0 = time.perf_counter()
    worst = 0.0
    for n, j, a, r2 in itertools.product((20, 50, 100), range(1, 6), (-0.5, 0.0, 1.0), (0.0, 0.3, 0.9)):
        f, hp = FitSummary.synthetic(r2, j), HyperParams(a)
        diff = abs(log_bf_vs_null(n, f, hp).log_bf - log_bf_oracle_quadrature(n, f, hp))
        worst = max(worst, diff)
    _report(1, worst <= 1e-6, f"max |closed form - quadrature| = {worst:.2e} (tol 1e-6, 135 points)",
            time.perf_counter() - t0, 10)


def test_criterion_2_schwarz_equivalence():
    t0 = time.perf_counter()
    f = FitSummary.synthetic(0.3, 3)
    gaps = []
    for n in (100, 1_000, 10_000):
        s = log_bf_schwarz(n, f)
        gaps.append(abs(log_bf_vs_null(n, f).log_bf - s) / abs(s))
    ok = gaps[0] > gaps[1] > gaps[2] and gaps[2] < 0.02
    _report(2, ok, "relative gaps " + ", ".join(f"{g:.3e}" for g in gaps)
            + " (decreasing, last < 0.02)", time.perf_counter() - t0, 1)


def test_criterion_3_region_identities():
    t0 = time.perf_counter()
    rs = (1.1, 1.5, 2.0, math.e, 5.0, 50.0)
    fp = max(abs(kappa(r, delta_threshold(r)) - delta_threshold(r)) for r in rs)
    lim = max(abs(phi(r, 1e6, c) - kappa(r, c)) for r in (1.5, 2.0, 5.0) for c in (0.1, 1.0, 10.0))
    diag = all(phi(r, r, c) == 0.0 for r in (1.1, 1.5, 2.0, 5.0, 50.0) for c in (0.0, 0.1, 1.0, 10.0))
    cond = all(
        t5b_condition(r, 1e8, delta_threshold(r) + h) == (h > 0) for r in rs for h in (1e-3, -1e-3)
    )
    ok = fp <= 1e-10 and lim < 1e-3 and diag and cond
    _report(3, ok, f"fixed point {fp:.1e}; |phi(r,1e6,c) - kappa| <= {lim:.2e}; "
            f"phi(r,r,c)=0: {diag}; t5b threshold switch: {cond}", time.perf_counter() - t0, 1)


def _regions_csv(*argv: str) -> list[dict]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["regions", *argv])
    assert code == 0
    return list(csv.DictReader(io.StringIO(buf.getvalue())))


def test_criterion_4_figure_orderings():
    t0 = time.perf_counter()
    low = _regions_csv("--r", "2:10:33", "--delta", "0.5")
    high = _regions_csv("--r", "2:10:33", "--delta", "20")
    low_ok = all(float(r["kappa"]) >= float(r["eta"]) for r in low)
    high_ok = all(float(r["kappa"]) <= float(r["eta"]) for r in high)
    fig1 = _regions_csv("--r", "2:50:97", "--delta", "1")
    gaps = [abs(float(r["delta_threshold"]) - float(r["xi"])) for r in fig1]
    shrink = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = low_ok and high_ok and shrink
    _report(4, ok, f"kappa >= eta at 0.5: {low_ok}; kappa <= eta at 20: {high_ok}; "
            f"|delta(r) - xi(r)| {gaps[0]:.3f} -> {gaps[-1]:.3f} strictly decreasing: {shrink}",
            time.perf_counter() - t0, 1)


def test_criterion_5_fixed_dims_consistency():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name in ("corollary1_mj", "corollary1_mi"):
        res = run_plan(_plan(name))
        fr = res.fractions()
        mb = [abs(r.mean_log_bf) for r in res.records]
        good = (res.records[-1].n == 2000 and fr[-1] >= 0.95 and _nondecreasing(fr)
                and res.theory.consistent and all(b > a for a, b in zip(mb, mb[1:])))
        ok &= good
        parts.append(f"{res.plan.truth.value}: fractions {fr}")
    _report(5, ok, "; ".join(parts) + " (>= 0.95 at n=2000)", time.perf_counter() - t0, 60)


def test_criterion_6_scenario2_regions():
    start = time.perf_counter()
    parts, ok = [], True
    for name, want_consistent in (("s2_inconsistent", False), ("s2_consistent", True)):
        t0 = time.perf_counter()
        res = run_plan(_plan(name))
        fr = res.fractions()
        signed = [r.mean_log_bf for r in res.records]
        if want_consistent:
            good = fr[-1] >= 0.9 and _nondecreasing(fr) and all(b > a for a, b in zip(signed, signed[1:]))
        else:
            good = fr[-1] <= 0.1 and _nondecreasing(fr[::-1]) and all(b < a for a, b in zip(signed, signed[1:]))
        good &= res.theory.consistent == want_consistent
        elapsed = time.perf_counter() - t0
        ok &= good and elapsed < 180
        parts.append(f"delta_ji={res.plan.beta.delta_cross:g}: fractions {fr} ({elapsed:.1f}s)")
    _report(6, ok, "; ".join(parts) + f" vs kappa(2,20)={kappa(2, 20):.4f}",
            time.perf_counter() - start, 360)


def test_criterion_7_lemma1_limits():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name in ("lemma_s1", "lemma_s2", "lemma_s3"):
        rec = run_plan(_plan(name)).records[-1]
        z = abs(rec.mean_r2_ratio - rec.lemma1_limit) / rec.se_r2_ratio
        ok &= z <= 3.0
        parts.append(f"{name} n={rec.n}: {rec.mean_r2_ratio:.5f} vs {rec.lemma1_limit:.5f} ({z:.2f} SE)")
    _report(7, ok, "; ".join(parts), time.perf_counter() - t0, 120)


def test_criterion_8_anova_boundary():
    t0 = time.perf_counter()
    h = h_root(2.0, 4.0)
    quad_ok = abs(h - 3.0) <= 1e-10 and abs(h - quadratic_boundary(4.0)) <= 1e-10
    worst = 0.0
    for r in (1.5, 2.0, 3.0, 5.0, 10.0):
        for c in (0.1, 1.0, 4.0, 10.0, 100.0):
            x = h_root(r, c)
            worst = max(worst, abs(math.expm1(math.log(r * (1.0 + c + x)) / r) - x))
    _report(8, quad_ok and worst <= 1e-8,
            f"h_root(2,4) = {h!r}; max |[r(1+c+x)]^(1/r) - 1 - x| = {worst:.1e}",
            time.perf_counter() - t0, 1)


def test_criterion_9_pseudo_distance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20150609)
    worst_self = worst_nested = 0.0
    mono_ok = True
    for _ in range(100):
        ds = Dataset(rng.standard_normal(60), rng.standard_normal((60, 8)))
        perm = rng.permutation(8)
        k_i, k_j = sorted(rng.choice(np.arange(1, 7), size=2, replace=False))
        spec_i = ModelSpec.of(perm[:k_i])
        spec_j = ModelSpec.of(perm[:k_j])
        spec_k = ModelSpec.of(rng.choice(8, size=int(rng.integers(1, 6)), replace=False))
        b_j = rng.standard_normal(spec_j.dim)
        b_i = rng.standard_normal(spec_i.dim)
        b_k = rng.standard_normal(spec_k.dim)
        s2 = float(rng.uniform(0.5, 2.0))
        worst_self = max(worst_self, projection_quadform(ds, spec_j, spec_j, b_j, s2))
        worst_nested = max(worst_nested, projection_quadform(ds, spec_i, spec_j, b_i, s2))
        d_ki = projection_quadform(ds, spec_k, spec_i, b_k, s2)
        d_kj = projection_quadform(ds, spec_k, spec_j, b_k, s2)
        mono_ok &= d_ki >= d_kj - 1e-12
    ok = worst_self <= 1e-12 and worst_nested <= 1e-12 and mono_ok
    _report(9, ok, f"max delta_jj = {worst_self:.1e}; max nested delta_ij = {worst_nested:.1e}; "
            f"delta_ki >= delta_kj on all 100: {mono_ok}", time.perf_counter() - t0, 5)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
