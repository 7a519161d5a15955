"""Copula family identities against finite differences and rank statistics."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from semicontqr.copulas import (
    CopulaSpec,
    cdf,
    copula_sample,
    hfunc,
    hfunc_inv,
    pdf,
    tau_to_theta,
    theta_to_tau,
)
from semicontqr.errors import DomainError

SPECS = [
    CopulaSpec("gaussian", 0.5),
    CopulaSpec("gaussian", -0.5),
    CopulaSpec("clayton", 0.5),
    CopulaSpec("clayton", 2.0),
    CopulaSpec("frank", 0.5),
    CopulaSpec("frank", -0.5),
    CopulaSpec("frank", 2.0),
]

GRID = np.linspace(0.08, 0.92, 8)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.family}({s.theta})")
def test_hfunc_is_cdf_derivative(spec):
    """h(v|u) = dC/du via central differences."""
    eps = 1e-6
    u, v = np.meshgrid(GRID, GRID)
    fd = (cdf(spec, u + eps, v) - cdf(spec, u - eps, v)) / (2.0 * eps)
    hv = hfunc(spec, v, u)
    assert np.max(np.abs(hv - fd) / np.abs(fd)) < 1e-6


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.family}({s.theta})")
def test_density_is_mixed_derivative(spec):
    eps = 1e-4
    u, v = np.meshgrid(GRID, GRID)
    fd = (
        cdf(spec, u + eps, v + eps)
        - cdf(spec, u + eps, v - eps)
        - cdf(spec, u - eps, v + eps)
        + cdf(spec, u - eps, v - eps)
    ) / (4.0 * eps * eps)
    assert np.max(np.abs(pdf(spec, u, v) - fd)) < 1e-5


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.family}({s.theta})")
def test_hfunc_inverse_round_trips(spec):
    u, p = np.meshgrid(GRID, GRID)
    v = hfunc_inv(spec, p, u)
    assert np.max(np.abs(hfunc(spec, v, u) - p)) < 1e-8


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.family}({s.theta})")
def test_cdf_respects_frechet_bounds(spec):
    u, v = np.meshgrid(GRID, GRID)
    c = cdf(spec, u, v)
    assert np.all(c <= np.minimum(u, v) + 1e-12)
    assert np.all(c >= np.maximum(u + v - 1.0, 0.0) - 1e-12)


def test_independence_family_closed_forms():
    spec = CopulaSpec("independence", 0.0)
    u, v = np.meshgrid(GRID, GRID)
    assert np.allclose(cdf(spec, u, v), u * v, atol=1e-14)
    assert np.allclose(hfunc(spec, v, u), v, atol=1e-14)
    assert np.allclose(pdf(spec, u, v), 1.0, atol=1e-12)


def test_theta_to_tau_closed_forms():
    assert math.isclose(theta_to_tau("gaussian", 0.5), 2.0 / math.pi * math.asin(0.5))
    assert math.isclose(theta_to_tau("clayton", 2.0), 0.5)
    assert theta_to_tau("frank", -0.5) < 0 < theta_to_tau("frank", 0.5)
    assert theta_to_tau("independence", 0.0) == 0.0


@pytest.mark.parametrize(
    "family,tau",
    [("gaussian", 0.3), ("gaussian", -0.6), ("clayton", 0.2), ("frank", 0.4),
     ("frank", -0.25)],
)
def test_tau_theta_round_trip(family, tau):
    assert math.isclose(theta_to_tau(family, tau_to_theta(family, tau)), tau,
                        abs_tol=1e-8)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.family}({s.theta})")
def test_sample_margins_and_rank_correlation(spec):
    """Sampled pairs have uniform margins and the implied Kendall tau."""
    rng = np.random.default_rng(99)
    uv = copula_sample(spec, 4000, rng)
    for col in (0, 1):
        ks = stats.kstest(uv[:, col], "uniform")
        assert ks.pvalue > 1e-3
    tau_hat = stats.kendalltau(uv[:, 0], uv[:, 1]).statistic
    assert abs(tau_hat - theta_to_tau(spec.family, spec.theta)) < 0.035


def test_sampling_is_seed_deterministic():
    spec = CopulaSpec("clayton", 2.0)
    a = copula_sample(spec, 50, np.random.default_rng(5))
    b = copula_sample(spec, 50, np.random.default_rng(5))
    assert np.array_equal(a, b)


@given(
    st.sampled_from(SPECS),
    st.floats(0.02, 0.98),
    st.floats(0.02, 0.98),
    st.floats(0.02, 0.98),
)
def test_hfunc_monotone_in_v(spec, u, v1, v2):
    lo, hi = sorted((v1, v2))
    assert hfunc(spec, lo, u) <= hfunc(spec, hi, u) + 1e-12


@pytest.mark.parametrize(
    "family,theta",
    [("gaussian", 1.5), ("gaussian", -1.0), ("clayton", -0.3), ("clayton", 0.0),
     ("frank", 0.0), ("independence", 0.2), ("gumbel", 1.0)],
)
def test_invalid_parameters_rejected(family, theta):
    with pytest.raises(DomainError):
        CopulaSpec(family, theta)
