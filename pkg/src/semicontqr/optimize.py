"""Small deterministic optimizers for one-dimensional fitting problems.

Both routines are derivative-free and fully reproducible: no randomness,
fixed iteration rules, and non-finite objective values are treated as
minus infinity so a likelihood that degenerates at the domain edge cannot
poison the search.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, EstimationError

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi


@dataclass(frozen=True)
class OptResult:
    """Outcome of a scalar optimization."""

    x: float
    value: float
    iterations: int
    converged: bool


def _safe(f: Callable[[float], float], x: float) -> float:
    v = f(x)
    if v is None or not math.isfinite(v):
        return -math.inf
    return float(v)


def maximize_scalar(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-8,
    grid_points: int = 50,
) -> OptResult:
    """Maximize f on [lo, hi]: coarse grid seed, then golden-section.

    The grid locates the best of ``grid_points`` equally spaced values and
    the golden-section refinement runs on the bracket formed by its grid
    neighbours until the bracket width falls below ``tol * (hi - lo)``.
    Non-finite objective values count as -inf.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise DomainError(f"invalid bracket [{lo}, {hi}]")
    if grid_points < 3:
        raise DomainError("grid_points must be at least 3")

    xs = np.linspace(lo, hi, grid_points)
    vals = [_safe(f, float(x)) for x in xs]
    k = int(np.argmax(vals))
    if not math.isfinite(vals[k]):
        raise EstimationError(
            "objective is non-finite over the whole search grid",
            payload={"lo": lo, "hi": hi, "grid_points": grid_points},
        )

    a = float(xs[max(k - 1, 0)])
    b = float(xs[min(k + 1, grid_points - 1)])
    best_x, best_v = float(xs[k]), vals[k]

    width_tol = tol * (hi - lo)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = _safe(f, c)
    fd = _safe(f, d)
    iterations = 0
    while b - a > width_tol and iterations < 200:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = _safe(f, c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = _safe(f, d)
        iterations += 1
    for x, v in ((c, fc), (d, fd)):
        if v > best_v:
            best_x, best_v = x, v
    return OptResult(
        x=best_x, value=best_v, iterations=iterations, converged=b - a <= width_tol
    )


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    maxit: int = 200,
) -> float:
    """Root of a continuous f on a sign-changing bracket by plain bisection.

    Stops when the bracket is narrower than ``tol`` (absolute); raises
    after ``maxit`` iterations or if f(lo) and f(hi) share a sign.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise EstimationError(
            "bisection bracket does not straddle a root",
            payload={"lo": lo, "hi": hi, "f_lo": flo, "f_hi": fhi},
        )
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    raise EstimationError(
        "bisection failed to reach tolerance",
        payload={"lo": lo, "hi": hi, "tol": tol, "maxit": maxit},
    )
