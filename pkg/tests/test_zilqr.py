"""Logistic/linear quantile baseline: exact-solver oracle and invariants."""

import numpy as np
import pytest
from scipy import optimize as sp_opt
from scipy import special

from semicontqr.errors import DataError, DomainError, EstimationError
from semicontqr.zilqr import (
    ZilqrModel,
    fit_linquant,
    fit_logistic,
    zilqr_predict,
)


def _check_loss(x, y, b0, b1, alpha):
    r = y - b0 - b1 * x
    return float(np.sum(r * (alpha - (r < 0.0))))


def _enumerate_vertices(x, y, alpha):
    """Brute-force oracle: best line through every pair of data points,
    plus every horizontal line through a single point."""
    m = x.shape[0]
    best = np.inf
    for i in range(m):
        best = min(best, _check_loss(x, y, y[i], 0.0, alpha))
        for j in range(i + 1, m):
            if x[i] == x[j]:
                continue
            b1 = (y[j] - y[i]) / (x[j] - x[i])
            b0 = y[i] - b1 * x[i]
            best = min(best, _check_loss(x, y, b0, b1, alpha))
    return best


class TestLinQuant:
    def test_matches_vertex_enumeration_oracle(self):
        rng = np.random.default_rng(2024)
        for k in range(25):
            m = int(rng.integers(10, 41))
            x = rng.uniform(-2.0, 2.0, m)
            y = rng.normal(0.5 * x, 1.0) + rng.standard_t(3, m) * 0.3
            alpha = float(rng.uniform(0.05, 0.95))
            fit = fit_linquant(x, y, alpha)
            got = _check_loss(x, y, fit.beta0, fit.beta1, alpha)
            want = _enumerate_vertices(x, y, alpha)
            assert got <= want + 1e-9, (k, got, want)

    def test_median_line_through_clean_data(self):
        x = np.linspace(0.0, 1.0, 21)
        y = 1.0 + 2.0 * x
        fit = fit_linquant(x, y, 0.5)
        assert np.isclose(fit.beta0, 1.0, atol=1e-9)
        assert np.isclose(fit.beta1, 2.0, atol=1e-9)

    def test_constant_covariate_degenerates_to_quantile(self):
        rng = np.random.default_rng(6)
        y = rng.normal(size=40)
        fit = fit_linquant(np.full(40, 2.0), y, 0.3)
        assert fit.beta1 == 0.0
        # intercept is an exact 0.3-quantile of y: check-loss optimal
        best = min(_check_loss(np.full(40, 2.0), y, v, 0.0, 0.3) for v in y)
        assert _check_loss(np.full(40, 2.0), y, fit.beta0, 0.0, 0.3) <= best + 1e-9

    def test_validation(self):
        x = np.linspace(0.0, 1.0, 12)
        with pytest.raises(DataError):
            fit_linquant(x[:5], x[:5], 0.5)
        with pytest.raises(DomainError):
            fit_linquant(x, x, 1.0)


class TestLogistic:
    def test_matches_scipy_deviance_minimum(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(-1.0, 1.0, 500)
        z = (rng.random(500) < special.expit(0.4 + 1.3 * x)).astype(float)
        fit = fit_logistic(x, z)

        def neg_ll(g):
            eta = g[0] + g[1] * x
            return float(np.sum(np.logaddexp(0.0, eta) - z * eta))

        ref = sp_opt.minimize(neg_ll, np.zeros(2), method="BFGS")
        assert np.allclose([fit.gamma0, fit.gamma1], ref.x, atol=1e-5)
        assert fit.converged

    def test_probability_curves_sum_to_one(self):
        rng = np.random.default_rng(9)
        x = rng.uniform(0.0, 1.0, 300)
        z = (rng.random(300) < special.expit(2.0 * x - 0.5)).astype(float)
        fit = fit_logistic(x, z)
        grid = np.linspace(0.0, 1.0, 11)
        assert np.allclose(fit.prob_positive(grid) + fit.pi0(grid), 1.0, atol=1e-12)

    def test_perfect_separation_raises(self):
        x = np.concatenate([np.linspace(0.0, 0.4, 20), np.linspace(0.6, 1.0, 20)])
        z = np.concatenate([np.zeros(20), np.ones(20)])
        with pytest.raises(EstimationError, match="separation"):
            fit_logistic(x, z)

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            fit_logistic(np.linspace(0.0, 1.0, 30), np.ones(30))


class TestZilqrModel:
    @pytest.fixture(scope="class")
    def model(self):
        from semicontqr.simulate import dgp_catalog, generate

        data = generate(dgp_catalog("gc", p0=0.3), 400, seed=15)
        return ZilqrModel(data.x, data.z.astype(float), data.y)

    def test_zero_below_pi0_and_clamped_nonnegative(self, model):
        grid = np.linspace(0.2, 0.9, 25)
        pi0_vals = model.pi0(grid)
        q = model.predict(0.35, grid)
        assert np.all(q[0.35 <= pi0_vals] == 0.0)
        assert np.all(q >= 0.0)

    def test_matches_one_shot_helper(self, model):
        for tau in (0.5, 0.7, 0.9):
            for x0 in (0.4, 0.6, 0.8):
                a = model.predict(tau, x0)
                b = zilqr_predict(model.logistic, model.x_pos, model.y_pos, tau, x0)
                assert np.isclose(a, b, atol=1e-12)

    def test_tau_domain_checked(self, model):
        with pytest.raises(DomainError):
            model.predict(0.0, 0.5)
