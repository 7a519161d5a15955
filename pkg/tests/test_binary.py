"""Occurrence-part fitting: likelihood correctness and parameter recovery."""

import numpy as np
import pytest

from semicontqr import kernels
from semicontqr.binary import BinaryFit, fit_binary
from semicontqr.copulas import CopulaSpec, copula_sample, hfunc
from semicontqr.errors import DataError
from semicontqr.margins import EmpiricalCdf


def _draw_occurrence(spec, p0, n, seed):
    """x with uniform margin plus z = 1{v >= p0} from the copula."""
    uv = copula_sample(spec, n, np.random.default_rng(seed))
    return uv[:, 0], (uv[:, 1] >= p0).astype(np.float64)


def test_binary_loglik_matches_manual_bernoulli_sum():
    spec = CopulaSpec("gaussian", 0.6)
    x, z = _draw_occurrence(spec, 0.3, 60, seed=2)
    u = EmpiricalCdf(x, rescale=True).cdf(x)
    got = kernels.binary_loglik(spec.code, spec.theta, 0.3, u, z)
    p_zero = hfunc(spec, np.full(60, 0.3), u)
    manual = float(np.sum(np.where(z == 0.0, np.log(p_zero), np.log1p(-p_zero))))
    assert np.isclose(got, manual, atol=1e-10)


@pytest.mark.parametrize(
    "family,theta",
    [("gaussian", 0.5), ("clayton", 2.0), ("frank", -3.0)],
)
def test_recovers_dependence_parameter(family, theta):
    spec = CopulaSpec(family, theta)
    x, z = _draw_occurrence(spec, 0.4, 6000, seed=5)
    fit = fit_binary(x, z, family)
    # binary data carries limited information; compare on the tau scale
    from semicontqr.copulas import theta_to_tau

    assert abs(
        theta_to_tau(fit.copula.family, fit.copula.theta)
        - theta_to_tau(family, theta)
    ) < 0.08
    assert np.isclose(fit.p0_hat, np.mean(z == 0.0))


def test_pi0_curve_is_a_probability_and_tracks_dependence():
    spec = CopulaSpec("gaussian", 0.7)
    x, z = _draw_occurrence(spec, 0.3, 3000, seed=9)
    fit = fit_binary(x, z, "gaussian")
    grid = np.linspace(0.05, 0.95, 41)
    p = fit.pi0(grid)
    assert np.all((p >= 0.0) & (p <= 1.0))
    # positive dependence between covariate rank and occurrence:
    # larger x means positive outcomes more likely, so pi0 decreases
    assert p[0] > p[-1]
    avg_zero_rate = float(np.mean(z == 0.0))
    assert abs(np.mean(fit.pi0(x)) - avg_zero_rate) < 0.02


def test_scalar_and_array_pi0_agree():
    spec = CopulaSpec("clayton", 1.5)
    x, z = _draw_occurrence(spec, 0.25, 500, seed=3)
    fit = fit_binary(x, z, "clayton")
    grid = np.array([0.2, 0.5, 0.8])
    vec = fit.pi0(grid)
    assert np.allclose([fit.pi0(float(g)) for g in grid], vec, atol=1e-14)


def test_degenerate_pi0_when_no_zero_mass():
    fit = BinaryFit(
        copula=CopulaSpec("independence", 0.0),
        p0_hat=0.0,
        fx_hat=EmpiricalCdf(np.linspace(0.0, 1.0, 30), rescale=True),
        loglik=0.0,
    )
    assert fit.pi0(0.5) == 0.0
    assert np.array_equal(fit.pi0(np.array([0.1, 0.9])), np.zeros(2))


def test_input_validation():
    x = np.linspace(0.0, 1.0, 30)
    with pytest.raises(DataError):
        fit_binary(x, np.full(30, 1.0), "gaussian")  # single class
    with pytest.raises(DataError):
        fit_binary(x, np.full(30, 0.5), "gaussian")  # non-binary
    with pytest.raises(DataError):
        fit_binary(x[:10], (x[:10] > 0.5).astype(float), "gaussian")  # too small


def test_frank_near_independence_snaps_to_independence_family():
    rng = np.random.default_rng(17)
    x = rng.random(2000)
    z = (rng.random(2000) > 0.3).astype(np.float64)  # independent of x
    fit = fit_binary(x, z, "frank")
    assert fit.copula.family in ("independence", "frank")
    if fit.copula.family == "frank":
        assert abs(fit.copula.theta) < 1.0
    # either way pi0 stays close to the constant zero rate
    spread = np.ptp(fit.pi0(np.linspace(0.1, 0.9, 21)))
    assert spread < 0.05


def test_independent_data_gives_flat_pi0_vs_empirical_rate():
    rng = np.random.default_rng(23)
    x = rng.random(4000)
    z = (rng.random(4000) > 0.35).astype(np.float64)
    fit = fit_binary(x, z, "gaussian")
    rate = float(np.mean(z == 0.0))
    assert np.max(np.abs(fit.pi0(np.linspace(0.1, 0.9, 9)) - rate)) < 0.05
