"""Zero-inflated logistic/linear quantile regression baseline.

The comparison estimator: a logistic model for occurrence plus, above the
estimated zero mass, a per-level linear quantile regression on the
positive subsample.  The check-loss problem is solved exactly through its
vertex structure (the optimum passes through data points), which doubles
as a clean oracle for tests.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import kernels
from .errors import DataError, DomainError, EstimationError
from .margins import _as_sample
from .two_part import scaled_level

_log = logging.getLogger("semicontqr.zilqr")


@dataclass(frozen=True)
class LogisticFit:
    """Fitted logistic occurrence model: logit P(Y>0|x) = gamma0 + gamma1 x."""

    gamma0: float
    gamma1: float
    converged: bool

    def prob_positive(self, x):
        return special.expit(self.gamma0 + self.gamma1 * np.asarray(x, dtype=np.float64))

    def pi0(self, x):
        """P(Y = 0 | X = x) = 1 - expit(gamma0 + gamma1 x)."""
        return special.expit(-(self.gamma0 + self.gamma1 * np.asarray(x, dtype=np.float64)))


@dataclass(frozen=True)
class LinQuantFit:
    """Linear quantile regression coefficients at one level alpha."""

    beta0: float
    beta1: float

    def predict(self, x):
        return self.beta0 + self.beta1 * np.asarray(x, dtype=np.float64)


def _deviance(eta, z):
    # -2 loglik, computed via log1p(exp(.)) for stability
    return 2.0 * float(np.sum(np.logaddexp(0.0, eta) - z * eta))


def fit_logistic(x, z, max_iter: int = 100) -> LogisticFit:
    """Maximum-likelihood logistic fit by damped Newton iterations.

    Stops at gradient (Euclidean) norm <= 1e-8.  Complete separation is
    detected up front and raised with the separating threshold; failure to
    converge within ``max_iter`` raises with diagnostics.
    """
    x = _as_sample(x, "covariate sample")
    z = np.asarray(z, dtype=np.float64)
    if z.shape != x.shape:
        raise DataError("covariate and indicator samples differ in length")
    if not np.all((z == 0.0) | (z == 1.0)):
        raise DataError("indicator sample must be 0/1")
    if z.min() == z.max():
        raise DataError("indicator sample has a single class; cannot fit logistic")

    x0 = x[z == 0.0]
    x1 = x[z == 1.0]
    if x0.max() < x1.min() or x1.max() < x0.min():
        raise EstimationError(
            "perfect separation: classes split by a covariate threshold",
            payload={"x0_range": (float(x0.min()), float(x0.max())),
                     "x1_range": (float(x1.min()), float(x1.max()))},
        )

    g = np.zeros(2)
    dev = _deviance(np.zeros_like(x), z)
    for _ in range(max_iter):
        eta = g[0] + g[1] * x
        p = special.expit(eta)
        resid = z - p
        grad = np.array([resid.sum(), float(resid @ x)])
        if float(np.hypot(grad[0], grad[1])) <= 1e-8:
            return LogisticFit(gamma0=float(g[0]), gamma1=float(g[1]), converged=True)
        w = p * (1.0 - p)
        h00 = float(w.sum())
        h01 = float(w @ x)
        h11 = float(w @ (x * x))
        det = h00 * h11 - h01 * h01
        if det <= 0.0 or not np.isfinite(det):
            break
        step = np.array([(h11 * grad[0] - h01 * grad[1]) / det,
                         (h00 * grad[1] - h01 * grad[0]) / det])
        scale = 1.0
        # accept within rounding noise: near the optimum a full Newton step
        # changes the deviance by less than its float resolution
        slack = 1e-12 * (1.0 + abs(dev))
        for _ in range(30):
            cand = g + scale * step
            cand_dev = _deviance(cand[0] + cand[1] * x, z)
            if cand_dev <= dev + slack:
                break
            scale *= 0.5
        else:
            break
        g, dev = cand, cand_dev
    eta = g[0] + g[1] * x
    resid = z - special.expit(eta)
    grad = np.array([resid.sum(), float(resid @ x)])
    if float(np.hypot(grad[0], grad[1])) <= 1e-8:
        return LogisticFit(gamma0=float(g[0]), gamma1=float(g[1]), converged=True)
    raise EstimationError(
        "logistic fit did not converge (possible quasi-separation)",
        payload={"gamma0": float(g[0]), "gamma1": float(g[1]), "deviance": dev},
    )


def fit_linquant(x_pos, y_pos, alpha: float) -> LinQuantFit:
    """Exact linear quantile regression by vertex search.

    Minimizes the check loss sum of rho_alpha(y - b0 - b1 x).  The slope is
    found by convex search over all pairwise candidate slopes with the
    intercept profiled out; constant x degenerates to an intercept-only
    fit with beta1 = 0.
    """
    x_pos = _as_sample(x_pos, "covariates")
    y_pos = _as_sample(y_pos, "responses")
    if x_pos.shape != y_pos.shape:
        raise DataError("covariate and response lengths differ")
    if x_pos.shape[0] < 10:
        raise DataError(f"linear quantile fit needs at least 10 points, got {x_pos.shape[0]}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    slopes = np.sort(kernels.candidate_slopes(x_pos, y_pos))
    b0, b1, _ = kernels.qr_vertex_solve(x_pos, y_pos, slopes, alpha)
    return LinQuantFit(beta0=float(b0), beta1=float(b1))


class ZilqrModel:
    """Fitted baseline with cached slope candidates for repeated levels.

    The positive-part regression must be refit for every (tau, x) pair
    because the scaled level depends on pi0(x); caching the sorted pairwise
    slopes makes those refits cheap.
    """

    def __init__(self, x, z, y):
        x = _as_sample(x, "covariate sample")
        y = np.asarray(y, dtype=np.float64)
        z = np.asarray(z, dtype=np.float64)
        self.logistic = fit_logistic(x, z)
        pos = z == 1.0
        self.x_pos = np.ascontiguousarray(x[pos])
        self.y_pos = np.ascontiguousarray(y[pos])
        if self.x_pos.shape[0] < 10:
            raise DataError(
                f"positive subsample too small for the baseline: {self.x_pos.shape[0]}"
            )
        self._slopes = np.sort(kernels.candidate_slopes(self.x_pos, self.y_pos))

    def pi0(self, x):
        return self.logistic.pi0(x)

    def predict(self, tau: float, x):
        """Baseline quantile at one tau over scalar or array x."""
        if not 0.0 < tau < 1.0:
            raise DomainError(f"tau must lie strictly inside (0, 1), got {tau}")
        x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        pi0_vals = np.atleast_1d(self.pi0(x_arr))
        out = np.zeros(x_arr.shape[0])
        for i in range(x_arr.shape[0]):
            if tau <= pi0_vals[i]:
                continue
            alpha = scaled_level(tau, float(pi0_vals[i]))
            b0, b1, _ = kernels.qr_vertex_solve(
                self.x_pos, self.y_pos, self._slopes, alpha
            )
            out[i] = max(0.0, b0 + b1 * float(x_arr[i]))
        if np.asarray(x).shape == ():
            return float(out[0])
        return out


def zilqr_predict(logistic: LogisticFit, x_pos, y_pos, tau: float, x: float) -> float:
    """One-shot baseline prediction at a single (tau, x).

    pi0(x) from the logistic fit; below it the quantile is 0, above it a
    linear quantile regression at the scaled level is fit on the positive
    subsample and evaluated at x, clamped at 0.
    """
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie strictly inside (0, 1), got {tau}")
    pi0_val = float(logistic.pi0(x))
    if tau <= pi0_val:
        return 0.0
    fit = fit_linquant(x_pos, y_pos, scaled_level(tau, pi0_val))
    return max(0.0, float(fit.predict(x)))
