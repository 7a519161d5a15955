"""Bivariate copula families: evaluation, Kendall-tau maps, sampling.

Four one-parameter families are supported -- independence, gaussian,
clayton, frank -- which is enough to capture positive/negative dependence
with and without tail asymmetry.  Public functions accept scalars or
arrays and broadcast; the flat numerical work happens in
``semicontqr.kernels``.

Conventions
-----------
* ``hfunc(spec, v, u)`` is the conditional distribution
  h(v | u) = dC(u, v)/du = P(V <= v | U = u).
* ``hfunc_inv(spec, p, u)`` inverts it in v.
* Kendall's tau and the native parameter are interchangeable through
  ``tau_to_theta`` / ``theta_to_tau``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import kernels
from .errors import DomainError, EstimationError

FAMILIES = ("independence", "gaussian", "clayton", "frank")

_CODES = {
    "independence": kernels.INDEPENDENCE,
    "gaussian": kernels.GAUSSIAN,
    "clayton": kernels.CLAYTON,
    "frank": kernels.FRANK,
}

#: |theta| below this makes the frank family numerically indistinguishable
#: from independence; fits snap such values to the independence family.
FRANK_INDEPENDENCE_EPS = 1e-4


@dataclass(frozen=True)
class CopulaSpec:
    """A copula family plus its dependence parameter.

    Parameter domains: gaussian rho in (-1, 1); clayton theta > 0; frank
    theta != 0 (values in (-1e-4, 1e-4) behave as independence);
    independence requires theta == 0.
    """

    family: str
    theta: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(
                f"unknown copula family {self.family!r}; expected one of {FAMILIES}"
            )
        th = float(self.theta)
        object.__setattr__(self, "theta", th)
        if not math.isfinite(th):
            raise DomainError(f"theta must be finite, got {th!r}")
        if self.family == "independence" and th != 0.0:
            raise DomainError("independence copula takes theta = 0")
        if self.family == "gaussian" and not -1.0 < th < 1.0:
            raise DomainError(f"gaussian rho must lie in (-1, 1), got {th}")
        if self.family == "clayton" and th <= 0.0:
            raise DomainError(f"clayton theta must be positive, got {th}")
        if self.family == "frank" and th == 0.0:
            raise DomainError("frank theta must be nonzero (use independence)")

    @property
    def code(self) -> int:
        """Integer family code used by the kernel backends."""
        return _CODES[self.family]


def _pair_apply(fn, spec, a, b):
    a_arr, b_arr = np.broadcast_arrays(
        np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    )
    shape = a_arr.shape
    flat = fn(
        spec.code,
        spec.theta,
        np.ascontiguousarray(a_arr.ravel()),
        np.ascontiguousarray(b_arr.ravel()),
    )
    if shape == ():
        return float(flat[0])
    return flat.reshape(shape)


def cdf(spec: CopulaSpec, u, v):
    """Copula CDF C(u, v); exact on the boundary (C(u,0)=0, C(u,1)=u)."""
    return _pair_apply(kernels.copula_cdf, spec, u, v)


def logpdf(spec: CopulaSpec, u, v):
    """Log copula density; u, v are clamped into [1e-12, 1-1e-12]."""
    return _pair_apply(kernels.copula_logpdf, spec, u, v)


def pdf(spec: CopulaSpec, u, v):
    """Copula density c(u, v) = exp(logpdf)."""
    return np.exp(logpdf(spec, u, v))


def hfunc(spec: CopulaSpec, v, u):
    """Conditional distribution h(v | u) = dC(u, v)/du."""
    return _pair_apply(kernels.hfunc, spec, v, u)


def hfunc_inv(spec: CopulaSpec, p, u):
    """Inverse of ``hfunc`` in its first argument: v with h(v | u) = p."""
    out = _pair_apply(kernels.hfunc_inv, spec, p, u)
    if np.any(np.isnan(out)):
        raise EstimationError(
            "conditional quantile inversion failed to converge",
            payload={"family": spec.family, "theta": spec.theta},
        )
    return out


def _frank_tau(theta: float) -> float:
    # tau(theta) = 1 - (4/theta) (1 - D1(theta)) with the Debye function
    # D1(t) = (1/t) int_0^t s/(e^s - 1) ds; tau is odd in theta.
    t = abs(theta)
    debye, _ = integrate.quad(lambda s: s / math.expm1(s), 0.0, t, limit=200)
    tau = 1.0 - 4.0 / t * (1.0 - debye / t)
    return math.copysign(tau, theta)


def theta_to_tau(family: str, theta: float) -> float:
    """Kendall's tau implied by the native parameter."""
    spec = CopulaSpec(family, theta)  # validates the domain
    if family == "independence":
        return 0.0
    if family == "gaussian":
        return 2.0 / math.pi * math.asin(spec.theta)
    if family == "clayton":
        return spec.theta / (spec.theta + 2.0)
    if abs(spec.theta) < FRANK_INDEPENDENCE_EPS:
        return 0.0
    return _frank_tau(spec.theta)


def tau_to_theta(family: str, tau: float) -> float:
    """Native parameter matching a Kendall's tau.

    gaussian: rho = sin(pi tau / 2); clayton: theta = 2 tau / (1 - tau)
    (tau > 0); frank: numeric inversion of the Debye relation, accurate to
    1e-8 in theta.
    """
    tau = float(tau)
    if family not in FAMILIES:
        raise DomainError(
            f"unknown copula family {family!r}; expected one of {FAMILIES}"
        )
    if family == "independence":
        if tau != 0.0:
            raise DomainError("independence copula implies tau = 0")
        return 0.0
    if family == "gaussian":
        if not -1.0 < tau < 1.0:
            raise DomainError(f"gaussian tau must lie in (-1, 1), got {tau}")
        return math.sin(0.5 * math.pi * tau)
    if family == "clayton":
        if not 0.0 < tau < 1.0:
            raise DomainError(f"clayton tau must lie in (0, 1), got {tau}")
        return 2.0 * tau / (1.0 - tau)
    if tau == 0.0:
        raise DomainError("frank tau must be nonzero (use independence)")
    if not -1.0 < tau < 1.0:
        raise DomainError(f"frank tau must lie in (-1, 1), got {tau}")
    target = abs(tau)
    hi = 1.0
    while _frank_tau(hi) < target:
        hi *= 2.0
        if hi > 1e4:
            raise DomainError(f"frank tau {tau} is out of the invertible range")
    theta = optimize.brentq(
        lambda t: _frank_tau(t) - target, 1e-6, hi, xtol=1e-10, rtol=8.9e-16
    )
    return math.copysign(theta, tau)


def copula_sample(spec: CopulaSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n pairs from the copula by the conditional-distribution method.

    u ~ U(0,1), t ~ U(0,1), v = hfunc_inv(t, u).  Returns an (n, 2) array;
    identical seeds give identical draws.
    """
    if n < 0:
        raise DomainError(f"sample size must be nonnegative, got {n}")
    u = rng.random(n)
    t = rng.random(n)
    v = hfunc_inv(spec, t, u)
    return np.column_stack([u, np.asarray(v)])
