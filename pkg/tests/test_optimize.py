"""Scalar optimizer and root finder against scipy references."""

import numpy as np
import pytest
from scipy import optimize as sp_opt

from semicontqr.errors import DomainError, EstimationError
from semicontqr.optimize import bisect_root, maximize_scalar


@pytest.mark.parametrize(
    "fn,lo,hi",
    [
        (lambda t: -((t - 0.3) ** 2), -1.0, 1.0),
        (lambda t: np.sin(t), 0.0, 3.0),
        (lambda t: -abs(t - 0.77) + 0.1 * np.cos(3 * t), 0.0, 2.0),
        (lambda t: t * np.exp(-t), 0.0, 10.0),
    ],
)
def test_maximize_scalar_matches_scipy(fn, lo, hi):
    res = maximize_scalar(fn, lo, hi)
    ref = sp_opt.minimize_scalar(
        lambda t: -fn(t), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-10},
    )
    assert res.value >= -ref.fun - 1e-7
    assert lo <= res.x <= hi


def test_maximize_scalar_handles_boundary_optimum():
    res = maximize_scalar(lambda t: t, 0.0, 1.0)
    assert res.x > 0.999

    res = maximize_scalar(lambda t: -t, 0.0, 1.0)
    assert res.x < 1e-3


def test_maximize_scalar_rejects_bad_bracket():
    with pytest.raises(DomainError):
        maximize_scalar(lambda t: t, 1.0, 1.0)


def test_bisect_root_matches_brentq():
    fn = lambda t: np.cos(t) - t  # noqa: E731
    root = bisect_root(fn, 0.0, 1.5)
    ref = sp_opt.brentq(fn, 0.0, 1.5, xtol=1e-14)
    assert np.isclose(root, ref, atol=1e-9)


def test_bisect_root_requires_sign_change():
    with pytest.raises(EstimationError):
        bisect_root(lambda t: t * t + 1.0, -1.0, 1.0)
