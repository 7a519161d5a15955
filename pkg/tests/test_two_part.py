"""Two-part estimator: region structure, interpolation band, invariants."""

import numpy as np
import pytest

from semicontqr.errors import DomainError
from semicontqr.simulate import dgp_catalog, generate, true_quantile
from semicontqr.two_part import (
    classify_region,
    fit_two_part,
    predict_quantile,
    region_tags,
    scaled_level,
    true_quantile_copula,
)


@pytest.fixture(scope="module")
def gc_fit():
    dgp = dgp_catalog("gc", p0=0.3)
    data = generate(dgp, 800, seed=42)
    return fit_two_part(data.x, data.y, "gaussian", "clayton", delta=0.25)


class TestScaledLevel:
    def test_affine_map_endpoints(self):
        assert scaled_level(0.3 + 1e-12, 0.3) == pytest.approx(0.0, abs=1e-10)
        assert np.isclose(scaled_level(0.65, 0.3), 0.5)
        assert np.isclose(scaled_level(1.0 - 1e-12, 0.3), 1.0, atol=1e-11)

    def test_rejects_tau_at_or_below_pi0(self):
        with pytest.raises(DomainError):
            scaled_level(0.2, 0.3)
        with pytest.raises(DomainError):
            scaled_level(0.3, 0.3)


class TestRegions:
    def test_partition_covers_tau_axis(self, gc_fit):
        x0 = 0.55
        p = float(gc_fit.binary.pi0(x0))
        taus = np.linspace(0.01, 0.99, 99)
        tags = [classify_region(gc_fit, float(t), x0).tag for t in taus]
        # A1 strictly below pi0, then the band, then the copula region
        switches = [tags[i] + tags[i + 1] for i in range(len(tags) - 1)]
        assert set(tags) == {"A1", "A2", "A3"}
        assert "A2A1" not in switches and "A3A2" not in switches and "A3A1" not in switches
        for t, tag in zip(taus, tags):
            if t < p:
                assert tag == "A1"

    def test_vectorised_tags_match_scalar(self, gc_fit):
        grid = np.linspace(0.2, 0.9, 31)
        for tau in (0.2, 0.45, 0.8):
            vec = region_tags(gc_fit, tau, grid)
            scal = [classify_region(gc_fit, tau, float(g)).tag for g in grid]
            assert list(vec) == scal


class TestPredictQuantile:
    def test_zero_on_a1(self, gc_fit):
        grid = np.linspace(0.2, 0.9, 31)
        for tau in (0.05, 0.15, 0.3):
            q = predict_quantile(gc_fit, tau, grid)
            tags = region_tags(gc_fit, tau, grid)
            assert np.all(q[tags == "A1"] == 0.0)
            assert np.all(q >= 0.0)

    def test_nondecreasing_in_tau(self, gc_fit):
        taus = np.linspace(0.01, 0.99, 99)
        grid = np.linspace(0.15, 0.92, 21)
        qs = np.stack([predict_quantile(gc_fit, float(t), grid) for t in taus])
        assert np.all(np.diff(qs, axis=0) >= -1e-12)

    def test_continuous_at_band_edges(self, gc_fit):
        grid = np.linspace(0.2, 0.9, 21)
        pi0_vals = np.atleast_1d(gc_fit.binary.pi0(grid))
        eps = 1e-10
        for g, p in zip(grid, pi0_vals):
            top = min(p + gc_fit.band_width, 1.0 - 1e-6)
            if eps < p < 1.0 - eps:
                below = float(predict_quantile(gc_fit, p - eps, float(g)))
                above = float(predict_quantile(gc_fit, p + eps, float(g)))
                assert abs(above - below) < 1e-6
            if eps < top < 1.0 - 2e-6:
                below = float(predict_quantile(gc_fit, top - eps, float(g)))
                above = float(predict_quantile(gc_fit, top + eps, float(g)))
                assert abs(above - below) < 1e-6

    def test_band_midpoint_is_half_right_endpoint(self, gc_fit):
        grid = np.linspace(0.25, 0.85, 11)
        pi0_vals = np.atleast_1d(gc_fit.binary.pi0(grid))
        for g, p in zip(grid, pi0_vals):
            top = p + gc_fit.band_width
            if top >= 1.0 - 1e-6:
                continue
            mid = float(predict_quantile(gc_fit, (p + top) / 2.0, float(g)))
            right = float(predict_quantile(gc_fit, top, float(g)))
            assert abs(mid - 0.5 * right) < 1e-12

    def test_scalar_array_agreement(self, gc_fit):
        grid = np.linspace(0.3, 0.8, 7)
        vec = predict_quantile(gc_fit, 0.7, grid)
        scal = [float(predict_quantile(gc_fit, 0.7, float(g))) for g in grid]
        assert np.allclose(vec, scal, atol=0.0)

    def test_tau_domain_checked(self, gc_fit):
        with pytest.raises(DomainError):
            predict_quantile(gc_fit, 0.0, 0.5)
        with pytest.raises(DomainError):
            predict_quantile(gc_fit, 1.0, 0.5)


class TestFitValidation:
    def test_delta_domain(self):
        data = generate(dgp_catalog("gc", p0=0.2), 200, seed=1)
        for bad in (0.0, 0.5, -0.1, 0.9):
            with pytest.raises(DomainError):
                fit_two_part(data.x, data.y, "gaussian", "clayton", delta=bad)

    def test_band_truncation_warns(self):
        # heavy zero mass pushes pi0 + delta past 1 at small x
        data = generate(dgp_catalog("gc", p0=0.6), 600, seed=3)
        fit = fit_two_part(data.x, data.y, "gaussian", "clayton", delta=0.45)
        with pytest.warns(UserWarning, match="band"):
            predict_quantile(fit, 0.97, np.linspace(0.1, 0.9, 31))

    def test_zero_free_degenerates_to_positive_part(self):
        rng = np.random.default_rng(8)
        x = rng.uniform(0.2, 0.9, 300)
        y = 0.2 + x + rng.gamma(2.0, 0.1, 300)
        with pytest.warns(UserWarning, match="no zeros"):
            fit = fit_two_part(x, y, "gaussian", "clayton")
        assert fit.degenerate
        q = predict_quantile(fit, 0.5, np.linspace(0.3, 0.8, 9))
        assert np.all(q > 0.0)
        assert list(region_tags(fit, 0.1, np.array([0.5]))) == ["A3"]


class TestTruthCurve:
    """true_quantile_copula against brute-force simulation."""

    def test_matches_empirical_conditional_quantiles(self):
        dgp = dgp_catalog("gc", p0=0.3)
        x0 = float(dgp.margin_x.quantile(0.6))
        u0 = 0.6
        rng = np.random.default_rng(31)
        n = 400_000
        # draw (v, u) pairs conditional on U = u0 via the h-inverse, then
        # apply the zero-mass cut and the response margin
        from semicontqr.copulas import CopulaSpec, hfunc_inv

        spec_c = CopulaSpec(dgp.family_c, dgp.theta1)
        spec_d = CopulaSpec(dgp.family_d, dgp.theta2)
        v = np.asarray(hfunc_inv(spec_c, rng.random(n), np.full(n, u0)))
        w = np.asarray(hfunc_inv(spec_d, rng.random(n), np.full(n, u0)))
        y = np.where(v >= dgp.p0, dgp.margin_y.quantile(w), 0.0)
        for tau in (0.4, 0.7, 0.9):
            want = float(np.quantile(y, tau))
            got = true_quantile(dgp, tau, x0)
            assert abs(got - want) < 0.01, tau

    def test_copula_truth_exposed_directly(self):
        dgp = dgp_catalog("cf", p0=0.1)
        x = np.linspace(0.3, 0.8, 11)
        a = true_quantile(dgp, 0.7, x)
        b = true_quantile_copula(dgp, 0.7, x)
        assert np.allclose(a, b, atol=0.0)
