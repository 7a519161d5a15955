"""Copula-based two-part quantile regression for semicontinuous outcomes.

A semicontinuous response mixes a point mass at zero with a continuous
positive part.  This package models the two parts with a pair of bivariate
copulas -- one linking the covariate to occurrence (y > 0), one linking it
to the positive magnitude -- and composes them into conditional quantile
curves that are exactly zero below the conditional zero mass, with a short
interpolation band bridging the jump.

Heavy numerics run through ``semicontqr.kernels``, which provides numba
JIT kernels with a pure-numpy fallback (``SEMICONT_QR_BACKEND=numpy``).
"""

import logging as _logging

from .bootstrap import BandResult, bootstrap_bands
from .copulas import CopulaSpec, copula_sample, tau_to_theta, theta_to_tau
from .errors import DataError, DomainError, EstimationError, SemicontQrError
from .margins import (
    EmpiricalCdf,
    KumaraswamyDist,
    SmoothedCdf,
    bandwidth_select,
    estimate_p0,
)
from .simulate import SimReport, dgp_catalog, generate, run_cell, true_quantile
from .two_part import TwoPartFit, fit_two_part, predict_quantile, scaled_level
from .zilqr import ZilqrModel, fit_linquant, fit_logistic

_logging.getLogger(__name__).addHandler(_logging.NullHandler())

__all__ = [
    "BandResult",
    "CopulaSpec",
    "DataError",
    "DomainError",
    "EmpiricalCdf",
    "EstimationError",
    "KumaraswamyDist",
    "SemicontQrError",
    "SimReport",
    "SmoothedCdf",
    "TwoPartFit",
    "ZilqrModel",
    "bandwidth_select",
    "bootstrap_bands",
    "copula_sample",
    "dgp_catalog",
    "estimate_p0",
    "fit_linquant",
    "fit_logistic",
    "fit_two_part",
    "generate",
    "predict_quantile",
    "run_cell",
    "scaled_level",
    "tau_to_theta",
    "theta_to_tau",
    "true_quantile",
]

__version__ = "0.1.0"
