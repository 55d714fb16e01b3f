"""Command-line interface.

    gbf bf DATA.csv --model x1,x3
    gbf compare DATA.csv --model-j x1,x2 --model-i x3
    gbf regions --scenario S2 --r 2:50:49 --delta 0.5,20 --format csv
    gbf simulate PLAN.json --out results/plan
    gbf anova --p 3 --q 3 --r-cell 4 --effect-a 0.5 --sigma 1 --seed 7

Exit codes: 0 success, 2 usage/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import anova as anova_mod
from .asymptotics import (
    delta_threshold, eta, kappa, phi, t5a_condition, t5a_lower_bound, t5b_condition, xi,
)
from .bayesfactor import HyperParams, display_bf, log_bf_pair, log_bf_schwarz, log_bf_vs_null
from .dataio import read_csv
from .errors import NumericalError, ValidationError
from .regression import Dataset, fit, projection_quadform
from .simulation import default_workers, plan_from_dict, run_plan, with_seed

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def _emit_json(obj: dict, args: argparse.Namespace, out: Path | None = None) -> str:
    if not args.deterministic:
        obj = {**obj, "generated_at": datetime.now(timezone.utc).isoformat()}
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    if out is not None:
        out.write_text(text, encoding="utf-8")
    return text


def _rows_to_csv(columns: Sequence[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def parse_grid(text: str) -> list[float]:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            k = int(num)
            if k < 1:
                raise ValueError
            return [float(v) for v in np.linspace(float(start), float(stop), k)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse grid {text!r}; use start:stop:num or a,b,c") from None


# ---------------------------------------------------------------------------
# bf / compare
# ---------------------------------------------------------------------------


def cmd_bf(args: argparse.Namespace) -> str:
    data = read_csv(args.data)
    names = _names(args.model)
    spec = data.spec(names)
    hp = HyperParams(args.a)
    ds = data.dataset
    f = fit(ds, spec)
    res = log_bf_vs_null(ds.n, f, hp)
    return _emit_json({
        "model": names,
        "n": ds.n,
        "j": spec.dim,
        "a": hp.a,
        "r_squared": f.r_squared,
        "log_bf": res.log_bf,
        "bf_display": display_bf(res.log_bf),
        "gamma_term": res.gamma_term,
        "fit_term": res.fit_term,
        "log_bf_schwarz": log_bf_schwarz(ds.n, f),
    }, args)


def cmd_compare(args: argparse.Namespace) -> str:
    data = read_csv(args.data)
    nj, ni = _names(args.model_j), _names(args.model_i)
    sj, si = data.spec(nj), data.spec(ni)
    hp = HyperParams(args.a)
    ds = data.dataset
    fj, fi = fit(ds, sj), fit(ds, si)
    res = log_bf_pair(ds.n, fj, fi, hp)
    return _emit_json({
        "model_j": nj,
        "model_i": ni,
        "n": ds.n,
        "j": sj.dim,
        "i": si.dim,
        "a": hp.a,
        "r_squared_j": fj.r_squared,
        "r_squared_i": fi.r_squared,
        "log_bf": res.log_bf,
        "bf_display": display_bf(res.log_bf),
        "gamma_term": res.gamma_term,
        "fit_term": res.fit_term,
        "favors": "Mj" if res.log_bf > 0 else ("Mi" if res.log_bf < 0 else "tie"),
    }, args)


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

S2_COLUMNS = ("r", "delta_j0", "delta_threshold", "kappa", "xi", "eta",
              "proposed_nonempty", "intrinsic_nonempty", "error")
S3_COLUMNS = ("r", "s", "delta_j0", "delta_threshold", "kappa", "phi",
              "t5a_lower_bound", "t5a_condition", "t5b_condition", "error")


def region_rows(scenario: str, r_grid: list[float], deltas: list[float],
                s_grid: list[float] | None = None, strict: bool = False) -> list[dict]:
    """Boundary table rows; domain errors are kept per row unless ``strict``."""
    rows = []
    for r in r_grid:
        for s in (s_grid if scenario == "S3" else [None]):
            for d in deltas:
                row: dict[str, Any] = {"r": r, "delta_j0": d}
                try:
                    row.update(delta_threshold=delta_threshold(r), kappa=kappa(r, d))
                    if scenario == "S2":
                        k, e, x = row["kappa"], eta(r, d), xi(r)
                        row.update(
                            xi=x, eta=e,
                            proposed_nonempty=d > row["delta_threshold"] and k < d,
                            intrinsic_nonempty=d > x and e < d,
                        )
                    else:
                        row.update(
                            s=s, phi=phi(r, s, d),
                            t5a_lower_bound=t5a_lower_bound(r, s, d),
                            t5a_condition=t5a_condition(r, s, d),
                            t5b_condition=t5b_condition(r, s, d),
                        )
                except ValidationError as exc:
                    if strict:
                        raise
                    row = {"r": r, "delta_j0": d, "error": str(exc)}
                    if scenario == "S3":
                        row["s"] = s
                rows.append(row)
    return rows


def cmd_regions(args: argparse.Namespace) -> str:
    r_grid = parse_grid(args.r)
    deltas = parse_grid(args.delta)
    s_grid = parse_grid(args.s) if args.s else None
    if args.scenario == "S3" and not s_grid:
        raise ValidationError("S3 tables need --s")
    rows = region_rows(args.scenario, r_grid, deltas, s_grid, args.strict)
    columns = S2_COLUMNS if args.scenario == "S2" else S3_COLUMNS
    if args.format == "csv":
        text = _rows_to_csv(columns, rows)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        return text
    clean = [{c: row.get(c) for c in columns if c in row} for row in rows]
    return _emit_json({"scenario": args.scenario, "columns": list(columns), "rows": clean},
                      args, Path(args.output) if args.output else None)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def bundled_plans() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("gbf").joinpath("plans").iterdir()
                  if p.name.endswith(".json"))


def _load_plan_text(ref: str) -> str:
    path = Path(ref)
    if path.exists():
        return path.read_text(encoding="utf-8")
    if ref in bundled_plans():
        return resources.files("gbf").joinpath("plans", ref + ".json").read_text(encoding="utf-8")
    raise ValidationError(f"plan {ref!r} is neither a file nor a bundled plan "
                          f"({', '.join(bundled_plans())})")


def cmd_simulate(args: argparse.Namespace) -> str:
    if args.list_plans:
        return "\n".join(bundled_plans()) + "\n"
    if not args.plan:
        raise ValidationError("simulate needs a plan file or bundled plan name")
    try:
        raw = json.loads(_load_plan_text(args.plan))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed plan JSON: {exc}") from None
    plan = plan_from_dict(raw)
    if args.seed is not None:
        plan = with_seed(plan, args.seed)
    result = run_plan(plan, workers=args.workers)
    payload = result.to_dict()
    if args.out:
        prefix = Path(args.out)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        Path(str(prefix) + ".csv").write_text(result.to_csv(), encoding="utf-8")
        _emit_json(payload, args, Path(str(prefix) + ".json"))
    text = result.to_csv() if args.format == "csv" else _emit_json(payload, args)
    return text


# ---------------------------------------------------------------------------
# anova
# ---------------------------------------------------------------------------


def anova_report(p: int, q: int, r_cell: int, effect_a: float, effect_b: float,
                 effect_ab: float, sigma: float, seed: int, a: float = -0.5) -> dict:
    design = anova_mod.TwoWayDesign(p, q, r_cell)
    if not sigma > 0.0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    hp = HyperParams(a)
    rng = np.random.default_rng(seed)
    y, beta = anova_mod.simulate_response(design, effect_a, effect_b, effect_ab, sigma, rng)
    ds = Dataset(y, anova_mod.build_design(design))
    specs = design.submodels()
    fits = {m: fit(ds, s) for m, s in specs.items()}
    vs_null = {m.value: log_bf_vs_null(ds.n, f, hp).log_bf for m, f in fits.items()}
    top = max(vs_null.values())
    w = {m: math.exp(v - top) for m, v in vs_null.items()}
    total = math.fsum(w.values())
    pairs = anova_mod.all_pairwise_bf(ds, design, hp)

    s2 = sigma**2
    m = anova_mod.AnovaModel
    def dist(numer, denom):
        cols = list(specs[numer].columns)
        return projection_quadform(ds, specs[numer], specs[denom], beta[cols], s2)

    d10, d20, d43 = dist(m.M1, m.M0), dist(m.M2, m.M0), dist(m.M4, m.M3)
    boundary: dict[str, Any] = {"r": r_cell, "delta_10": d10, "delta_20": d20, "delta_43": d43}
    c = d10 + d20
    if r_cell <= 1:
        boundary.update(H=None, note="boundary needs r_cell > 1")
    elif c <= 0.0:
        boundary.update(H=None, note="boundary needs delta_10 + delta_20 > 0")
    else:
        h = anova_mod.m4_consistency_boundary(float(r_cell), d10, d20)
        boundary.update(H=h, c=c, delta_43_exceeds_H=d43 > h)
        if r_cell == 2:
            cf = anova_mod.quadratic_boundary(c)
            boundary.update(closed_form=cf, closed_form_abs_diff=abs(cf - h))
    return {
        "design": {"p": p, "q": q, "r_cell": r_cell, "n": design.n},
        "effects": {"a": effect_a, "b": effect_b, "ab": effect_ab},
        "sigma": sigma,
        "seed": seed,
        "a": hp.a,
        "r_squared": {k.value: f.r_squared for k, f in fits.items()},
        "log_bf_vs_null": vs_null,
        "posterior_weights": {k: v / total for k, v in w.items()},
        "best_model": max(vs_null, key=vs_null.get),
        "pairwise_log_bf": {f"{hi.value}:{lo.value}": r.log_bf for (hi, lo), r in pairs.items()},
        "boundary": boundary,
    }


def cmd_anova(args: argparse.Namespace) -> str:
    rep = anova_report(args.p, args.q, args.r_cell, args.effect_a, args.effect_b,
                       args.effect_ab, args.sigma, args.seed, args.a)
    return _emit_json(rep, args)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--deterministic", action="store_true",
                        help="omit the generated_at timestamp from JSON output")

    ap = argparse.ArgumentParser(prog="gbf", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bf", parents=[common], help="log BF of one model against the null")
    p.add_argument("data")
    p.add_argument("--model", default="", help="comma-separated predictor names")
    p.add_argument("--a", type=float, default=-0.5)
    p.set_defaults(func=cmd_bf)

    p = sub.add_parser("compare", parents=[common], help="log BF[M_j : M_i] for two models")
    p.add_argument("data")
    p.add_argument("--model-j", required=True)
    p.add_argument("--model-i", required=True)
    p.add_argument("--a", type=float, default=-0.5)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("regions", parents=[common], help="consistency-region boundary tables")
    p.add_argument("--scenario", choices=["S2", "S3"], default="S2")
    p.add_argument("--r", default="2:50:49", help="r grid: start:stop:num or a,b,c")
    p.add_argument("--s", default=None, help="s grid (S3 only)")
    p.add_argument("--delta", default="0.5,20", help="delta*_j0 values")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--strict", action="store_true", help="abort on the first domain error")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("simulate", parents=[common], help="run a Monte Carlo plan")
    p.add_argument("plan", nargs="?", help="plan JSON file or bundled plan name")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write PREFIX.json and PREFIX.csv")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker threads (default GBF_THREADS or cores, now {default_workers()})")
    p.add_argument("--list-plans", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("anova", parents=[common], help="two-way ANOVA Bayes factors")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--r-cell", type=int, required=True)
    p.add_argument("--effect-a", type=float, default=0.0)
    p.add_argument("--effect-b", type=float, default=0.0)
    p.add_argument("--effect-ab", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--a", type=float, default=-0.5)
    p.set_defaults(func=cmd_anova)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except ValidationError as exc:
        print(f"gbf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"gbf {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"gbf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
