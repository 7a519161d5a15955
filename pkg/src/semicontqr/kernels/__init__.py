"""Numerical kernels with selectable backend.

Two interchangeable implementations live here:

* ``_numba`` -- scalar kernels compiled with ``@njit(cache=True)``; the
  default when numba imports cleanly.
* ``_numpy`` -- vectorised numpy/scipy reference implementation.

Selection happens once at import time from the ``SEMICONT_QR_BACKEND``
environment variable: ``numba``, ``numpy``, or ``auto`` (the default).
``auto`` falls back to numpy silently-but-logged when numba is missing;
asking for ``numba`` explicitly raises if it cannot be imported.

The two backends agree to float64 rounding (roughly 1e-12 absolute on
probability-scale outputs) but are not bit-identical to each other; each
backend on its own is deterministic across runs and processes.

Exported callables (array in / array out, float64):

``norm_cdf(x)``, ``norm_ppf(p)``,
``copula_cdf(code, theta, u, v)``, ``copula_logpdf(code, theta, u, v)``,
``hfunc(code, theta, v, u)``, ``hfunc_inv(code, theta, p, u)``,
``binary_loglik(code, theta, p0, u, z)``, ``pair_loglik(code, theta, u, v)``,
``kernel_cdf_eval(sorted_sample, h, q)``,
``kernel_cdf_inv(sorted_sample, h, p, tol, maxit)``,
``candidate_slopes(x, y)``, ``check_loss_at(x, y, slope, alpha)``,
``qr_vertex_solve(x, y, slopes_sorted, alpha)``.
"""

import logging
import os

from . import _numpy

INDEPENDENCE = _numpy.INDEPENDENCE
GAUSSIAN = _numpy.GAUSSIAN
CLAYTON = _numpy.CLAYTON
FRANK = _numpy.FRANK

_log = logging.getLogger("semicontqr.kernels")

_FUNCTIONS = (
    "norm_cdf",
    "norm_ppf",
    "copula_cdf",
    "copula_logpdf",
    "hfunc",
    "hfunc_inv",
    "binary_loglik",
    "pair_loglik",
    "kernel_cdf_eval",
    "kernel_cdf_inv",
    "candidate_slopes",
    "check_loss_at",
    "qr_vertex_solve",
)


def _select_backend():
    choice = os.environ.get("SEMICONT_QR_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"SEMICONT_QR_BACKEND must be 'numba', 'numpy' or 'auto', got {choice!r}"
        )
    if choice == "numpy":
        return _numpy, "numpy"
    try:
        from . import _numba
    except ImportError:
        if choice == "numba":
            raise
        _log.info("numba unavailable; falling back to the numpy backend")
        return _numpy, "numpy"
    return _numba, "numba"


_impl, _backend_name = _select_backend()


def backend_name() -> str:
    """Name of the active backend: ``'numba'`` or ``'numpy'``."""
    return _backend_name


def get_backend(name: str):
    """Return a backend module by name (for benchmarks and agreement tests)."""
    if name == "numpy":
        return _numpy
    if name == "numba":
        from . import _numba
        return _numba
    raise ValueError(f"unknown backend {name!r}")


for _fn in _FUNCTIONS:
    globals()[_fn] = getattr(_impl, _fn)

__all__ = list(_FUNCTIONS) + [
    "INDEPENDENCE",
    "GAUSSIAN",
    "CLAYTON",
    "FRANK",
    "backend_name",
    "get_backend",
]
