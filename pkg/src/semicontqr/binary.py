"""Copula-based binary regression for the occurrence process.

The probability of observing a zero given the covariate is modeled as
pi0(x) = h(p0 | F_X(x); theta1), the conditional CDF of a latent uniform
V at the zero mass p0 given the covariate rank.  p0 and F_X are plugged
in first (two-stage estimation), then theta1 maximizes the Bernoulli
pseudo-likelihood.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .copulas import FRANK_INDEPENDENCE_EPS, CopulaSpec
from .errors import DataError, DomainError
from .margins import EmpiricalCdf, _as_sample
from .optimize import maximize_scalar

# optimizer search domains on the native (or transformed) parameter scale
GAUSSIAN_RANGE = (-1.0 + 1e-6, 1.0 - 1e-6)
CLAYTON_LOG_RANGE = (-7.0, 5.0)
FRANK_RANGE = (-35.0, 35.0)


def _maximize_theta(family: str, objective):
    """Maximize a likelihood over the family's parameter domain.

    Clayton is searched on log(theta); a Frank optimum inside the
    (-1e-4, 1e-4) snap region collapses to the independence copula.
    Returns (CopulaSpec, loglik).
    """
    if family == "independence":
        spec = CopulaSpec("independence", 0.0)
        return spec, objective(spec.code, 0.0)

    if family == "gaussian":
        res = maximize_scalar(
            lambda th: objective(kernels.GAUSSIAN, th), *GAUSSIAN_RANGE
        )
        return CopulaSpec("gaussian", res.x), res.value
    if family == "clayton":
        res = maximize_scalar(
            lambda s: objective(kernels.CLAYTON, math.exp(s)), *CLAYTON_LOG_RANGE
        )
        return CopulaSpec("clayton", math.exp(res.x)), res.value
    if family == "frank":
        res = maximize_scalar(
            lambda th: objective(kernels.FRANK, th), *FRANK_RANGE
        )
        if abs(res.x) < FRANK_INDEPENDENCE_EPS:
            spec = CopulaSpec("independence", 0.0)
            return spec, objective(spec.code, 0.0)
        return CopulaSpec("frank", res.x), res.value
    raise DomainError(f"unknown copula family {family!r}")


@dataclass(frozen=True)
class BinaryFit:
    """Fitted occurrence model: copula (theta1), zero mass, covariate CDF."""

    copula: CopulaSpec
    p0_hat: float
    fx_hat: EmpiricalCdf
    loglik: float

    def pi0(self, x):
        """P(Y = 0 | X = x) = h(p0_hat | F_X(x))."""
        if self.p0_hat == 0.0:
            x = np.asarray(x, dtype=np.float64)
            return 0.0 if x.shape == () else np.zeros(x.shape)
        u = self.fx_hat.cdf(x)
        flat = kernels.hfunc(
            self.copula.code,
            self.copula.theta,
            np.full(np.size(u), self.p0_hat),
            np.ascontiguousarray(np.asarray(u, dtype=np.float64).ravel()),
        )
        if np.asarray(x).shape == ():
            return float(flat[0])
        return flat.reshape(np.asarray(x).shape)


def fit_binary(x, z, family: str) -> BinaryFit:
    """Fit the occurrence copula parameter by pseudo-likelihood.

    z is the positivity indicator (1 when y > 0).  The log-likelihood sums
    (1-z) log h(p0|u) + z log(1-h(p0|u)) over the rescaled covariate ranks
    u, with probabilities floored at 1e-12 inside the log.
    """
    x = _as_sample(x, "covariate sample")
    z = np.ascontiguousarray(np.asarray(z, dtype=np.float64))
    if z.shape != x.shape:
        raise DataError("covariate and indicator samples differ in length")
    if not np.all((z == 0.0) | (z == 1.0)):
        raise DataError("indicator sample must be 0/1")
    n = x.shape[0]
    if n < 20:
        raise DataError(f"binary fit needs at least 20 observations, got {n}")
    if z.min() == z.max():
        raise DataError("indicator sample has a single class; cannot fit occurrence")

    p0_hat = float(np.mean(1.0 - z))
    fx_hat = EmpiricalCdf(x, rescale=True)
    u = np.ascontiguousarray(fx_hat.cdf(x))

    def objective(code, theta):
        return kernels.binary_loglik(code, theta, p0_hat, u, z)

    spec, loglik = _maximize_theta(family, objective)
    return BinaryFit(copula=spec, p0_hat=p0_hat, fx_hat=fx_hat, loglik=loglik)


def pi0(fit: BinaryFit, x):
    """Zero-probability curve of a fitted occurrence model."""
    return fit.pi0(x)
