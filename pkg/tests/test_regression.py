import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbf.errors import InsufficientDataError, SingularDesignError, ValidationError
from gbf.regression import (
    NULL_MODEL, Dataset, FitSummary, ModelSpec, Projector, center_columns, fit, fit_many,
    projection_quadform,
)


def _data(n=40, p=4, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    y = 1.5 + x @ np.arange(1, p + 1) * 0.3 + rng.standard_normal(n)
    return Dataset(y, x)


class TestModelSpec:
    def test_sorted_unique(self):
        assert ModelSpec.of([3, 0, 2]).columns == (0, 2, 3)
        with pytest.raises(ValidationError):
            ModelSpec((2, 1))
        assert ModelSpec.of([1, 1]).columns == (1,)
        with pytest.raises(ValidationError):
            ModelSpec((-1,))

    def test_subset(self):
        assert ModelSpec((0,)).issubset(ModelSpec((0, 2)))
        assert not ModelSpec((1,)).issubset(ModelSpec((0, 2)))
        assert NULL_MODEL.dim == 0


class TestDataset:
    def test_centers_and_freezes(self):
        ds = _data()
        np.testing.assert_allclose(ds.x.mean(axis=0), 0.0, atol=1e-14)
        with pytest.raises(ValueError):
            ds.x[0, 0] = 1.0

    def test_too_few_rows(self):
        with pytest.raises(InsufficientDataError):
            Dataset(np.zeros(4), np.ones((4, 3)))

    def test_nonfinite(self):
        x = np.ones((10, 2))
        x[3, 1] = np.nan
        with pytest.raises(ValidationError):
            center_columns(x)

    def test_spec_out_of_range(self):
        with pytest.raises(ValidationError):
            _data().check_spec(ModelSpec((7,)))


class TestFit:
    def test_null_model(self):
        f = fit(_data(), NULL_MODEL)
        assert f.r_squared == 0.0 and f.rss == f.tss

    def test_matches_lstsq(self):
        ds = _data()
        spec = ModelSpec((0, 2))
        design = np.column_stack([np.ones(ds.n), ds.x[:, [0, 2]]])
        coef, *_ = np.linalg.lstsq(design, ds.y, rcond=None)
        resid = ds.y - design @ coef
        f = fit(ds, spec)
        assert f.rss == pytest.approx(resid @ resid, rel=1e-12)
        assert f.r_squared == pytest.approx(1 - resid @ resid / f.tss, rel=1e-12)

    def test_perfect_fit(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((20, 2))
        f = fit(Dataset(3 * x[:, 0] - x[:, 1], x), ModelSpec((0, 1)))
        assert f.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_collinear_rejected(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((30, 3))
        x[:, 2] = x[:, 0] + x[:, 1]
        with pytest.raises(SingularDesignError):
            fit(Dataset(rng.standard_normal(30), x), ModelSpec((0, 1, 2)))

    def test_constant_response(self):
        with pytest.raises(ValidationError):
            fit(Dataset(np.ones(10), np.random.default_rng(0).standard_normal((10, 2))),
                ModelSpec((0,)))

    def test_fit_many_matches_fit(self):
        ds = _data()
        spec = ModelSpec((1, 3))
        rng = np.random.default_rng(5)
        ys = rng.standard_normal((ds.n, 4))
        many = fit_many(ds.x, spec, ys)
        for k in range(4):
            one = fit(Dataset(ys[:, k], ds.x), spec)
            assert many[k].r_squared == pytest.approx(one.r_squared, abs=1e-13)

    def test_projector_dimension_guard(self):
        with pytest.raises(InsufficientDataError):
            Projector(np.random.default_rng(0).standard_normal((5, 4)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_nested_r2_monotone(self, seed):
        ds = _data(n=25, p=5, seed=seed)
        r2 = [fit(ds, ModelSpec(tuple(range(k)))).r_squared for k in range(6)]
        assert all(b >= a - 1e-12 for a, b in zip(r2, r2[1:]))
        assert all(0.0 <= v <= 1.0 for v in r2)

    def test_fit_summary_validation(self):
        with pytest.raises(ValidationError):
            FitSummary(0.3, 0.7, 1.0, NULL_MODEL)
        with pytest.raises(ValidationError):
            FitSummary.synthetic(1.2, 2)


class TestProjectionQuadform:
    def test_self_is_zero(self):
        ds = _data()
        spec = ModelSpec((0, 1))
        assert projection_quadform(ds, spec, spec, [1.0, -2.0], 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_null_denominator_is_signal_energy(self):
        ds = _data()
        spec = ModelSpec((2,))
        expected = (ds.x[:, 2] @ ds.x[:, 2]) * 4.0 / (ds.n * 2.0)
        assert projection_quadform(ds, spec, NULL_MODEL, [2.0], 2.0) == pytest.approx(expected)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            projection_quadform(_data(), ModelSpec((0, 1)), NULL_MODEL, [1.0], 1.0)


class TestWorkedValues:
    def test_center_columns(self):
        out = center_columns(np.array([[1.0, -1.0, 5.0], [2.0, 0.0, 5.0], [3.0, 1.0, 5.0]]))
        np.testing.assert_array_equal(out, [[-1.0, -1.0, 0.0], [0.0, 0.0, 0.0], [1.0, 1.0, 0.0]])
        with pytest.raises(ValidationError):
            center_columns(np.ones((1, 2)))

    def test_noise_free_line(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((15, 2))
        f = fit(Dataset(1 + 2 * x[:, 0], x), ModelSpec((0,)))
        assert f.rss <= 1e-18 * f.tss

    def test_normal_equations_oracle(self):
        rng = np.random.default_rng(50)
        x = rng.standard_normal((50, 5))
        y = 0.7 + x @ np.array([1.0, 0.5, 0.0, 0.0, -0.8]) + rng.standard_normal(50)
        ds = Dataset(y, x)
        cols = [0, 1, 4]
        a = np.column_stack([np.ones(50), x[:, cols]])
        coef = np.linalg.inv(a.T @ a) @ (a.T @ y)
        resid = y - a @ coef
        tss = ((y - y.mean()) ** 2).sum()
        assert fit(ds, ModelSpec(tuple(cols))).r_squared == pytest.approx(1 - resid @ resid / tss, abs=1e-10)

    def test_column_order_invariance(self):
        ds = _data(n=30, p=5, seed=8)
        perm = np.array([3, 0, 4, 1, 2])
        shuffled = Dataset(ds.y, ds.x[:, perm])
        inv = {int(c): k for k, c in enumerate(perm)}
        a = fit(ds, ModelSpec((0, 1, 4))).r_squared
        b = fit(shuffled, ModelSpec.of(inv[c] for c in (0, 1, 4))).r_squared
        assert a == pytest.approx(b, abs=1e-10)

    def test_orthonormal_design_delta(self):
        n = 64
        rng = np.random.default_rng(2)
        z = rng.standard_normal((n, 2))
        z -= z.mean(axis=0)
        q, _ = np.linalg.qr(z)
        ds = Dataset(np.zeros(n), q * np.sqrt(n))
        val = projection_quadform(ds, ModelSpec((0, 1)), ModelSpec((0,)), [0.3, -1.7], 1.0)
        assert val == pytest.approx(1.7**2, abs=1e-10)
