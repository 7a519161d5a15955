"""Copula-based quantile regression for the positive part of the response.

Both margins of the positive subsample are estimated by kernel-smoothed
CDFs; the dependence parameter theta2 maximizes the copula log-density
over the resulting pseudo-observations.  The conditional quantile at
level alpha composes the inverse h-function with the inverse smoothed
response CDF.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .binary import _maximize_theta
from .copulas import CopulaSpec
from .errors import DataError, DomainError, EstimationError
from .margins import EmpiricalCdf, SmoothedCdf, _as_sample, bandwidth_select

PSEUDO_OBS_MODES = ("smoothed", "empirical")


@dataclass(frozen=True)
class PositiveFit:
    """Fitted positive-part model.

    ``pseudo_obs`` records which covariate/response transform produced the
    pseudo-observations for theta2: "smoothed" (default) uses the kernel
    CDFs, "empirical" uses rescaled ranks; prediction transforms the query
    covariate the same way.
    """

    copula: CopulaSpec
    fy_pos: SmoothedCdf
    fx_pos: SmoothedCdf
    m: int
    loglik: float
    pseudo_obs: str = "smoothed"
    fx_pos_ecdf: EmpiricalCdf | None = None

    def u_of_x(self, x):
        """Covariate-to-unit transform used at both fit and predict time."""
        if self.pseudo_obs == "empirical":
            return self.fx_pos_ecdf.cdf(x)
        return self.fx_pos.cdf(x)


def fit_positive(
    x_pos,
    y_pos,
    family: str,
    bw_rule: str = "normal-reference",
    pseudo_obs: str = "smoothed",
) -> PositiveFit:
    """Fit theta2 on the positive subsample by pseudo-likelihood.

    Pseudo-observations are clamped into [1/(m+1), m/(m+1)] before the
    copula log-density is summed, keeping evaluations off the corners.
    """
    x_pos = _as_sample(x_pos, "positive-part covariates")
    y_pos = _as_sample(y_pos, "positive responses")
    if x_pos.shape != y_pos.shape:
        raise DataError("positive-part covariate and response lengths differ")
    m = x_pos.shape[0]
    if m < 20:
        raise DataError(f"positive subsample too small: m={m} < 20")
    if np.any(y_pos <= 0.0):
        raise DataError("positive responses must be strictly positive")
    if pseudo_obs not in PSEUDO_OBS_MODES:
        raise DomainError(
            f"unknown pseudo_obs mode {pseudo_obs!r}; expected {PSEUDO_OBS_MODES}"
        )

    fy_pos = SmoothedCdf(y_pos, bandwidth_select(y_pos, bw_rule))
    fx_pos = SmoothedCdf(x_pos, bandwidth_select(x_pos, bw_rule))
    fx_pos_ecdf = EmpiricalCdf(x_pos, rescale=True) if pseudo_obs == "empirical" else None

    if pseudo_obs == "smoothed":
        u_raw = fx_pos.cdf(x_pos)
        v_raw = fy_pos.cdf(y_pos)
    else:
        fy_pos_ecdf = EmpiricalCdf(y_pos, rescale=True)
        u_raw = fx_pos_ecdf.cdf(x_pos)
        v_raw = fy_pos_ecdf.cdf(y_pos)
    lo = 1.0 / (m + 1.0)
    hi = m / (m + 1.0)
    u = np.ascontiguousarray(np.clip(u_raw, lo, hi))
    v = np.ascontiguousarray(np.clip(v_raw, lo, hi))

    def objective(code, theta):
        return kernels.pair_loglik(code, theta, u, v)

    spec, loglik = _maximize_theta(family, objective)
    return PositiveFit(
        copula=spec,
        fy_pos=fy_pos,
        fx_pos=fx_pos,
        m=m,
        loglik=loglik,
        pseudo_obs=pseudo_obs,
        fx_pos_ecdf=fx_pos_ecdf,
    )


def q_positive(fit: PositiveFit, alpha, x):
    """Conditional quantile of the positive part at level alpha.

    Composes F_y^-1(hinv(alpha | u(x))); strictly increasing in alpha for
    fixed x.  Accepts scalar or array alpha with scalar x.
    """
    alpha_arr = np.asarray(alpha, dtype=np.float64)
    if np.any((alpha_arr <= 0.0) | (alpha_arr >= 1.0)):
        raise DomainError("alpha must lie strictly inside (0, 1)")
    u_val = np.asarray(fit.u_of_x(x), dtype=np.float64)
    a_b, u_b = np.broadcast_arrays(alpha_arr, u_val)
    w = kernels.hfunc_inv(
        fit.copula.code,
        fit.copula.theta,
        np.ascontiguousarray(a_b.ravel()),
        np.ascontiguousarray(u_b.ravel()),
    )
    if np.any(np.isnan(w)):
        raise EstimationError(
            "conditional quantile inversion failed in the positive part",
            payload={"family": fit.copula.family, "theta": fit.copula.theta},
        )
    out = fit.fy_pos.quantile(w.reshape(a_b.shape))
    if a_b.shape == ():
        return float(out)
    return out
