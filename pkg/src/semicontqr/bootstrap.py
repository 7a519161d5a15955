"""Pairs-bootstrap pointwise confidence bands.

Rows (x, y) are resampled with replacement, the full two-part model is
refit on each resample, and pointwise percentile intervals are formed
from the refitted quantile curves (and the zero-probability curve) over
an x-grid.  Replicate seeds are spawned from the root seed, so bands are
identical no matter how many workers execute the replicates.
"""

import csv
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EstimationError
from .two_part import fit_two_part, predict_quantile

_log = logging.getLogger("semicontqr.bootstrap")

#: more than this fraction of failed refits aborts the run
MAX_FAILURE_RATE = 0.05

BAND_CSV_COLUMNS = ("x", "estimate", "lower", "upper", "tau", "level", "b")


@dataclass(frozen=True)
class BandResult:
    """Pointwise percentile band for one curve over an x-grid.

    ``tau`` is the quantile level, or the string "pi0" for the band on
    the zero-probability curve.  ``b`` counts the bootstrap replicates
    that refit successfully; lower <= upper always holds, while the
    point estimate can fall outside a percentile band in finite samples.
    """

    x_grid: np.ndarray
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    tau: float | str
    level: float
    b: int


def _resample_indices(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, n, size=n)


def _curves(fit, tau_list, x_grid):
    """Stack of quantile curves plus the pi0 curve for one fitted model."""
    rows = np.empty((len(tau_list) + 1, x_grid.shape[0]))
    for i, tau in enumerate(tau_list):
        rows[i] = predict_quantile(fit, float(tau), x_grid)
    rows[-1] = np.atleast_1d(fit.binary.pi0(x_grid))
    return rows


def _boot_one(x, y, child_seed, family_c, family_d, delta, bw_rule,
              pseudo_obs, tau_list, x_grid):
    rng = np.random.Generator(np.random.PCG64(child_seed))
    idx = _resample_indices(rng, x.shape[0])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            fit = fit_two_part(x[idx], y[idx], family_c, family_d, delta=delta,
                               bw_rule=bw_rule, pseudo_obs=pseudo_obs)
            return _curves(fit, tau_list, x_grid), ""
    except Exception as exc:  # noqa: BLE001 - failures are counted, not fatal
        return None, f"{type(exc).__name__}: {exc}"


def bootstrap_bands(
    x,
    y,
    family_c: str,
    family_d: str,
    tau_list,
    x_grid,
    B: int = 300,
    level: float = 0.95,
    seed: int = 0,
    delta: float = 0.25,
    bw_rule: str = "normal-reference",
    pseudo_obs: str = "smoothed",
    jobs: int = 1,
) -> list[BandResult]:
    """Percentile bootstrap bands for each tau in tau_list plus pi0.

    Percentiles use linear interpolation between order statistics at
    (1 - level)/2 and (1 + level)/2; level 0 collapses both bounds to
    the replicate median.  More than 5% failed refits aborts with a
    diagnostic carrying example failure messages.
    """
    if B < 2:
        raise DomainError(f"need at least 2 bootstrap replicates, got {B}")
    if not 0.0 <= level < 1.0:
        raise DomainError(f"band level must lie in [0, 1), got {level}")
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    y = np.ascontiguousarray(np.asarray(y, dtype=np.float64))
    x_grid = np.ascontiguousarray(np.asarray(x_grid, dtype=np.float64))
    tau_list = [float(t) for t in tau_list]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        point_fit = fit_two_part(x, y, family_c, family_d, delta=delta,
                                 bw_rule=bw_rule, pseudo_obs=pseudo_obs)
        point = _curves(point_fit, tau_list, x_grid)

    children = np.random.SeedSequence(seed).spawn(B)
    curves = np.full((B, len(tau_list) + 1, x_grid.shape[0]), np.nan)
    messages = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_boot_one, x, y, children[b], family_c, family_d,
                            delta, bw_rule, pseudo_obs, tau_list, x_grid)
                for b in range(B)
            ]
            results = [fut.result() for fut in futures]
    else:
        results = [
            _boot_one(x, y, children[b], family_c, family_d, delta,
                      bw_rule, pseudo_obs, tau_list, x_grid)
            for b in range(B)
        ]
    for b, (rows, msg) in enumerate(results):
        if rows is None:
            messages.append(f"replicate {b}: {msg}")
        else:
            curves[b] = rows

    ok = ~np.isnan(curves).any(axis=(1, 2))
    n_ok = int(ok.sum())
    if B - n_ok > MAX_FAILURE_RATE * B:
        raise EstimationError(
            f"bootstrap refits failed in {B - n_ok}/{B} replicates",
            payload={"examples": messages[:3]},
        )
    if B > n_ok:
        _log.warning("dropped %d/%d failed bootstrap replicates", B - n_ok, B)

    p_lo = (1.0 - level) / 2.0
    p_hi = (1.0 + level) / 2.0
    lower = np.quantile(curves[ok], p_lo, axis=0, method="linear")
    upper = np.quantile(curves[ok], p_hi, axis=0, method="linear")

    labels: list[float | str] = [*tau_list, "pi0"]
    return [
        BandResult(x_grid=x_grid, estimate=point[i], lower=lower[i],
                   upper=upper[i], tau=labels[i], level=level, b=n_ok)
        for i in range(len(labels))
    ]


def bands_to_csv(bands: list[BandResult], path) -> None:
    """One row per grid point per curve: x,estimate,lower,upper,tau,level,b."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BAND_CSV_COLUMNS)
        for band in bands:
            for g in range(band.x_grid.shape[0]):
                writer.writerow([
                    repr(float(band.x_grid[g])),
                    repr(float(band.estimate[g])),
                    repr(float(band.lower[g])),
                    repr(float(band.upper[g])),
                    band.tau if isinstance(band.tau, str) else repr(band.tau),
                    repr(band.level),
                    band.b,
                ])
