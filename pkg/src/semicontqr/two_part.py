"""Two-part conditional quantile estimator for semicontinuous responses.

The conditional quantile curve is assembled from the occurrence model
(zero probability pi0(x)) and the positive-part copula quantile
regression, as a piecewise function of the level tau:

* below pi0(x) the quantile is exactly 0 (point mass at zero);
* within the band [pi0(x), pi0(x) + n^(-delta)] a linear ramp bridges the
  jump, interpolating from 0 to the positive-part value at the band top;
* above the band the quantile is the positive-part curve at the scaled
  level (tau - pi0(x)) / (1 - pi0(x)).

A fit on zero-free data degenerates cleanly: pi0 is identically 0 and
the prediction reduces to plain copula quantile regression at level tau
(no band, no ramp).
"""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .binary import BinaryFit, fit_binary
from .copulas import CopulaSpec
from .errors import DataError, DomainError
from .margins import EmpiricalCdf, _as_sample, estimate_p0
from .positive import PositiveFit, fit_positive

_log = logging.getLogger("semicontqr.two_part")

#: band top is truncated here when pi0(x) + n^(-delta) would reach 1
BAND_CAP = 1.0 - 1e-6


@dataclass(frozen=True)
class TwoPartFit:
    """Fitted two-part model: occurrence + positive part + band geometry."""

    binary: BinaryFit
    positive: PositiveFit
    n: int
    delta: float

    @property
    def band_width(self) -> float:
        return float(self.n) ** (-self.delta)

    @property
    def degenerate(self) -> bool:
        """True when the training response had no zeros (pi0 == 0)."""
        return self.binary.p0_hat == 0.0


@dataclass(frozen=True)
class QuantileRegion:
    """Region of a (tau, x) query: A1 (zero), A2 (ramp), or A3 (copula QR).

    ``band_width`` is the effective width after any truncation at
    1 - 1e-6 (only relevant when pi0(x) + n^(-delta) >= 1).
    """

    tag: str
    pi0_at_x: float
    band_width: float


def scaled_level(tau: float, pi0_val: float) -> float:
    """Map tau to the positive-part level: (tau - pi0) / (1 - pi0)."""
    if not 0.0 <= pi0_val < 1.0:
        raise DomainError(f"pi0 must lie in [0, 1), got {pi0_val}")
    if tau <= pi0_val:
        raise DomainError(
            f"scaled level needs tau > pi0 (got tau={tau}, pi0={pi0_val}); "
            "route A1/A2 queries before rescaling"
        )
    return (tau - pi0_val) / (1.0 - pi0_val)


def fit_two_part(
    x,
    y,
    family_c: str,
    family_d: str,
    delta: float = 0.25,
    bw_rule: str = "normal-reference",
    pseudo_obs: str = "smoothed",
) -> TwoPartFit:
    """Fit occurrence and positive-part models on a semicontinuous sample.

    The indicator is derived as z = 1{y > 0}.  With no zeros present the
    occurrence part is skipped (independence copula, p0_hat = 0) and all
    predictions come from the positive part alone.
    """
    x = _as_sample(x, "covariate sample")
    y = _as_sample(y, "response sample")
    if x.shape != y.shape:
        raise DataError("covariate and response samples differ in length")
    if not 0.0 < delta < 0.5:
        raise DomainError(f"delta must lie strictly inside (0, 0.5), got {delta}")

    p0_hat = estimate_p0(y)  # validates nonnegativity; warns when zero-free
    z = (y > 0.0).astype(np.float64)
    if p0_hat == 0.0:
        binary = BinaryFit(
            copula=CopulaSpec("independence", 0.0),
            p0_hat=0.0,
            fx_hat=EmpiricalCdf(x, rescale=True),
            loglik=0.0,
        )
    else:
        binary = fit_binary(x, z, family_c)
    pos_mask = z == 1.0
    positive = fit_positive(
        x[pos_mask], y[pos_mask], family_d, bw_rule=bw_rule, pseudo_obs=pseudo_obs
    )
    return TwoPartFit(binary=binary, positive=positive, n=x.shape[0], delta=float(delta))


def _band_tops(fit: TwoPartFit, pi0_vals: np.ndarray) -> np.ndarray:
    tops = pi0_vals + fit.band_width
    overrun = tops >= 1.0
    if np.any(overrun):
        warnings.warn(
            "interpolation band overruns 1 for some covariate values; "
            f"truncating at {BAND_CAP}",
            UserWarning,
            stacklevel=3,
        )
        _log.warning(
            "band truncated at %d of %d points", int(overrun.sum()), tops.size
        )
        tops = np.minimum(tops, BAND_CAP)
    return tops


def classify_region(fit: TwoPartFit, tau: float, x: float) -> QuantileRegion:
    """Region membership of a single (tau, x) query; boundary ties -> A2."""
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie strictly inside (0, 1), got {tau}")
    if fit.degenerate:
        return QuantileRegion(tag="A3", pi0_at_x=0.0, band_width=fit.band_width)
    p = float(fit.binary.pi0(x))
    top = float(_band_tops(fit, np.array([p]))[0])
    if tau < p:
        tag = "A1"
    elif tau <= top:
        tag = "A2"
    else:
        tag = "A3"
    return QuantileRegion(tag=tag, pi0_at_x=p, band_width=top - p)


def _positive_quantile_vec(fit: TwoPartFit, alpha: np.ndarray, u: np.ndarray):
    w = kernels.hfunc_inv(
        fit.positive.copula.code,
        fit.positive.copula.theta,
        np.ascontiguousarray(alpha),
        np.ascontiguousarray(u),
    )
    return fit.positive.fy_pos.quantile(w)


def predict_quantile(fit: TwoPartFit, tau, x):
    """Conditional quantile estimate; broadcasts tau against x.

    Piecewise in tau at each x: 0 on A1, linear ramp on A2, copula
    quantile regression at the scaled level on A3 (see module docstring).
    """
    tau_arr = np.asarray(tau, dtype=np.float64)
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any((tau_arr <= 0.0) | (tau_arr >= 1.0)):
        raise DomainError("tau must lie strictly inside (0, 1)")
    t_b, x_b = np.broadcast_arrays(tau_arr, x_arr)
    shape = t_b.shape
    t_flat = t_b.ravel()
    x_flat = x_b.ravel()

    u_flat = np.asarray(fit.positive.u_of_x(x_flat), dtype=np.float64).ravel()
    out = np.zeros(t_flat.shape[0])

    if fit.degenerate:
        out = _positive_quantile_vec(fit, t_flat, u_flat)
    else:
        pi0_flat = np.asarray(fit.binary.pi0(x_flat), dtype=np.float64).ravel()
        tops = _band_tops(fit, pi0_flat)
        ramp = (t_flat >= pi0_flat) & (t_flat <= tops)
        upper = (t_flat >= pi0_flat) & (t_flat > tops)
        if np.any(ramp):
            alpha_top = (tops[ramp] - pi0_flat[ramp]) / (1.0 - pi0_flat[ramp])
            q_top = _positive_quantile_vec(fit, alpha_top, u_flat[ramp])
            out[ramp] = q_top * (t_flat[ramp] - pi0_flat[ramp]) \
                / (tops[ramp] - pi0_flat[ramp])
        if np.any(upper):
            alpha = (t_flat[upper] - pi0_flat[upper]) / (1.0 - pi0_flat[upper])
            out[upper] = _positive_quantile_vec(fit, alpha, u_flat[upper])

    if shape == ():
        return float(out[0])
    return out.reshape(shape)


def region_tags(fit: TwoPartFit, tau: float, x) -> np.ndarray:
    """Vectorised region labels for one tau over an x grid (CLI helper)."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if fit.degenerate:
        return np.full(x_arr.shape[0], "A3", dtype=object)
    pi0_vals = np.asarray(fit.binary.pi0(x_arr), dtype=np.float64).ravel()
    tops = _band_tops(fit, pi0_vals)
    tags = np.full(x_arr.shape[0], "A3", dtype=object)
    tags[tau <= tops] = "A2"
    tags[tau < pi0_vals] = "A1"
    return tags


def true_quantile_copula(dgp, tau, x):
    """Oracle conditional quantile under a copula-pair data generator.

    Uses the generator's own composition: pi0(x) = h_C(p0 | F_X(x)) and,
    above it, F_Y^-1(hinv_D(tau_s | F_X(x))) with tau_s the scaled level.
    ``dgp`` must be a copula-pair config (see ``semicontqr.simulate``).
    """
    if getattr(dgp, "kind", None) != "copula":
        raise DomainError("true_quantile_copula requires a copula-pair DGP")
    tau_arr = np.asarray(tau, dtype=np.float64)
    x_arr = np.asarray(x, dtype=np.float64)
    t_b, x_b = np.broadcast_arrays(tau_arr, x_arr)
    t_flat = t_b.ravel()
    u_flat = np.asarray(dgp.margin_x.cdf(x_b.ravel()), dtype=np.float64).ravel()

    spec_c = CopulaSpec(dgp.family_c, dgp.theta1)
    spec_d = CopulaSpec(dgp.family_d, dgp.theta2)
    pi0_flat = kernels.hfunc(
        spec_c.code, spec_c.theta,
        np.full(u_flat.shape[0], dgp.p0), np.ascontiguousarray(u_flat),
    )
    out = np.zeros(t_flat.shape[0])
    pos = t_flat > pi0_flat
    if np.any(pos):
        tau_s = (t_flat[pos] - pi0_flat[pos]) / (1.0 - pi0_flat[pos])
        v = kernels.hfunc_inv(
            spec_d.code, spec_d.theta,
            np.ascontiguousarray(tau_s), np.ascontiguousarray(u_flat[pos]),
        )
        out[pos] = dgp.margin_y.quantile(v)
    if t_b.shape == ():
        return float(out[0])
    return out.reshape(t_b.shape)
