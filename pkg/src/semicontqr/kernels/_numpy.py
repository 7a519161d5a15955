"""Pure-numpy reference kernels.

Array-in/array-out numerical primitives shared by the whole package.  The
numba backend (``semicontqr.kernels._numba``) compiles the same formulas;
agreement between the two is covered by tests.  All functions expect
contiguous float64 arrays and do no shape negotiation -- callers broadcast.

Family codes: 0 independence, 1 gaussian, 2 clayton, 3 frank.
"""

import math

import numpy as np
from scipy import special

INDEPENDENCE = 0
GAUSSIAN = 1
CLAYTON = 2
FRANK = 3

_UEPS = 1e-12
_FRANK_SNAP = 1e-4
_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


def _clamp_unit(x):
    return np.clip(x, _UEPS, 1.0 - _UEPS)


def norm_cdf(x):
    """Standard normal CDF, Phi(x) = erfc(-x / sqrt(2)) / 2."""
    return 0.5 * special.erfc(-np.asarray(x) / _SQRT2)


def norm_ppf(p):
    """Standard normal quantile: Acklam's approximation plus one Halley step."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _norm_ppf_impl(np.asarray(p, dtype=np.float64))


def _norm_ppf_impl(p):
    # upper half maps to the lower via the exact reflection 1 - p, keeping
    # the Halley polish free of cancellation in the far upper tail
    flip = p > 0.5
    pl = np.where(flip, 1.0 - p, p)

    x = np.empty_like(p)
    lo = pl < 0.02425
    mid = ~lo

    q = np.sqrt(-2.0 * np.log(np.where(lo, pl, 0.5)))
    num = (((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
              - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
            + 4.374664141464968e+00) * q + 2.938163982698783e+00)
    den = ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
             + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0)
    x[lo] = (num / den)[lo]

    q = np.where(mid, pl, 0.25) - 0.5
    r = q * q
    num = (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r
              - 2.759285104469687e+02) * r + 1.383577518672690e+02) * r
            - 3.066479806614716e+01) * r + 2.506628277459239e+00) * q
    den = (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r
              - 1.556989798598866e+02) * r + 6.680131188771972e+01) * r
            - 1.328068155288572e+01) * r + 1.0)
    x[mid] = (num / den)[mid]

    err = 0.5 * special.erfc(-x / _SQRT2) - pl
    u = err * _SQRT_2PI * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    x = np.where(flip, -x, x)
    x[p <= 0.0] = -np.inf
    x[p >= 1.0] = np.inf
    return x


def _gauss_cdf(rho, u, v):
    x = norm_ppf(u)
    y = norm_ppf(v)
    half = 0.5 * rho
    r = half * (_GL_X + 1.0)           # quadrature nodes on [0, rho]
    omr2 = 1.0 - r * r
    x2 = x[:, None]
    y2 = y[:, None]
    integrand = np.exp(
        -(x2 * x2 - 2.0 * r[None, :] * x2 * y2 + y2 * y2) / (2.0 * omr2[None, :])
    ) / np.sqrt(omr2[None, :])
    acc = integrand @ _GL_W
    return np.clip(u * v + half * acc / (2.0 * math.pi), 0.0, 1.0)


def copula_cdf(code, theta, u, v):
    """C(u, v) with exact boundary values C(u,0)=0, C(u,1)=u."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    out = np.empty(u.shape[0])
    zero = (u <= 0.0) | (v <= 0.0)
    uone = (u >= 1.0) & ~zero
    vone = (v >= 1.0) & ~zero & ~uone
    interior = ~(zero | uone | vone)

    out[zero] = 0.0
    out[uone] = np.minimum(v[uone], 1.0)
    out[vone] = u[vone]
    ui = u[interior]
    vi = v[interior]
    if code == GAUSSIAN:
        out[interior] = _gauss_cdf(theta, ui, vi)
    elif code == CLAYTON:
        lu = np.log(ui)
        lv = np.log(vi)
        s = np.expm1(-theta * lu) + np.expm1(-theta * lv)
        vals = np.exp(-np.log1p(s) / theta)
        vals[np.isinf(s)] = 0.0
        out[interior] = vals
    elif code == FRANK:
        if abs(theta) < _FRANK_SNAP:
            out[interior] = ui * vi
        else:
            gu = np.expm1(-theta * ui)
            gv = np.expm1(-theta * vi)
            g1 = math.expm1(-theta)
            out[interior] = -np.log1p(gu * gv / g1) / theta
    else:
        out[interior] = ui * vi
    return out


def copula_logpdf(code, theta, u, v):
    """log c(u, v); arguments are clamped into [1e-12, 1 - 1e-12] first."""
    u = _clamp_unit(np.asarray(u, dtype=np.float64))
    v = _clamp_unit(np.asarray(v, dtype=np.float64))
    if code == GAUSSIAN:
        rho = theta
        x = norm_ppf(u)
        y = norm_ppf(v)
        omr2 = 1.0 - rho * rho
        return -0.5 * math.log(omr2) + \
            (2.0 * rho * x * y - rho * rho * (x * x + y * y)) / (2.0 * omr2)
    if code == CLAYTON:
        lu = np.log(u)
        lv = np.log(v)
        s = np.expm1(-theta * lu) + np.expm1(-theta * lv)
        with np.errstate(invalid="ignore"):
            vals = math.log1p(theta) - (1.0 + theta) * (lu + lv) \
                - (2.0 + 1.0 / theta) * np.log1p(s)
        vals[np.isinf(s)] = -np.inf
        return vals
    if code == FRANK:
        if abs(theta) < _FRANK_SNAP:
            return np.zeros(u.shape[0])
        gu = np.expm1(-theta * u)
        gv = np.expm1(-theta * v)
        g1 = math.expm1(-theta)
        s = g1 + gu * gv
        return math.log(-theta * g1) - theta * (u + v) - 2.0 * np.log(np.abs(s))
    return np.zeros(u.shape[0])


def hfunc(code, theta, v, u):
    """Conditional distribution h(v | u) = dC(u, v)/du = P(V <= v | U = u)."""
    v = np.asarray(v, dtype=np.float64)
    u = _clamp_unit(np.asarray(u, dtype=np.float64))
    vlo = v <= 0.0
    vhi = v >= 1.0
    inter = ~(vlo | vhi)
    out = np.empty(v.shape[0])
    out[vlo] = 0.0
    out[vhi] = 1.0
    vi = v[inter]
    ui = u[inter]
    if code == GAUSSIAN:
        rho = theta
        out[inter] = norm_cdf(
            (norm_ppf(vi) - rho * norm_ppf(ui)) / math.sqrt(1.0 - rho * rho)
        )
    elif code == CLAYTON:
        a = theta * np.log(ui)
        b = -theta * np.log(vi)
        small = b <= 33.0
        l1pw = np.empty(vi.shape[0])
        l1pw[small] = np.log1p(np.exp(a[small]) * np.expm1(b[small]))
        lw = (a + b)[~small]
        l1pw[~small] = np.where(lw > 33.0, lw, np.log1p(np.exp(np.minimum(lw, 33.0))))
        out[inter] = np.exp(-(1.0 + 1.0 / theta) * l1pw)
    elif code == FRANK:
        if abs(theta) < _FRANK_SNAP:
            out[inter] = vi
        else:
            gu = np.expm1(-theta * ui)
            gv = np.expm1(-theta * vi)
            g1 = math.expm1(-theta)
            out[inter] = (gu + 1.0) * gv / (g1 + gu * gv)
    else:
        out[inter] = vi
    return out


def _hinv_closed(code, theta, p, u):
    if code == GAUSSIAN:
        rho = theta
        return norm_cdf(norm_ppf(p) * math.sqrt(1.0 - rho * rho) + rho * norm_ppf(u))
    if code == CLAYTON:
        s = -theta / (1.0 + theta) * np.log(p)
        small = s <= 33.0
        lw = np.empty(p.shape[0])
        lw[small] = -theta * np.log(u[small]) + np.log(np.expm1(s[small]))
        lw[~small] = -theta * np.log(u[~small]) + s[~small]
        l1pw = np.where(
            lw > 33.0, lw,
            np.where(lw < -700.0, 0.0, np.log1p(np.exp(np.clip(lw, -700.0, 33.0)))),
        )
        return np.exp(-l1pw / theta)
    if code == FRANK:
        if abs(theta) < _FRANK_SNAP:
            return p.copy()
        gu = np.expm1(-theta * u)
        g1 = math.expm1(-theta)
        gv = p * g1 / ((gu + 1.0) - p * gu)
        return -np.log1p(gv) / theta
    return p.copy()


def hfunc_inv(code, theta, p, u):
    """Inverse of ``hfunc`` in v: closed form, bisection polish when needed.

    Guarantees |hfunc(v) - p| <= 1e-10; entries that would need more than
    200 bisection steps come back NaN (callers raise on NaN).
    """
    p = _clamp_unit(np.asarray(p, dtype=np.float64))
    u = _clamp_unit(np.asarray(u, dtype=np.float64))
    v = np.clip(_hinv_closed(code, theta, p, u), _UEPS, 1.0 - _UEPS)
    v[~np.isfinite(v)] = 0.5
    bad = np.abs(hfunc(code, theta, v, u) - p) > 1e-10
    if np.any(bad):
        lo = np.full(int(bad.sum()), _UEPS)
        hi = np.full(lo.shape[0], 1.0 - _UEPS)
        pb = p[bad]
        ub = u[bad]
        vb = np.full(lo.shape[0], np.nan)
        done = np.zeros(lo.shape[0], dtype=bool)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            f = hfunc(code, theta, mid, ub)
            hit = (np.abs(f - pb) <= 1e-10) & ~done
            vb[hit] = mid[hit]
            done |= hit
            if done.all():
                break
            low = f < pb
            lo = np.where(low & ~done, mid, lo)
            hi = np.where(~low & ~done, mid, hi)
        v[bad] = vb
    return v


def binary_loglik(code, theta, p0, u, z):
    """Occurrence log-likelihood: z=0 contributes log h(p0|u), z=1 log(1-h)."""
    h = hfunc(code, theta, np.full(u.shape[0], p0), u)
    h0 = np.maximum(h, 1e-12)
    h1 = np.maximum(1.0 - h, 1e-12)
    return float(np.sum(np.where(z == 0.0, np.log(h0), np.log(h1))))


def pair_loglik(code, theta, u, v):
    """Sum of the copula log-density over paired pseudo-observations."""
    return float(np.sum(copula_logpdf(code, theta, u, v)))


def kernel_cdf_eval(sample, h, q):
    """Gaussian-kernel smoothed CDF of a sorted sample, evaluated at q.

    F(q) = mean of Phi((q - y_i) / h).  Summation is chunked over queries;
    the result equals the direct double-precision sum.
    """
    m = sample.shape[0]
    q = np.asarray(q, dtype=np.float64)
    out = np.empty(q.shape[0])
    for start in range(0, q.shape[0], 256):
        block = q[start:start + 256]
        zmat = (block[:, None] - sample[None, :]) / h
        out[start:start + 256] = 0.5 * special.erfc(-zmat / _SQRT2).sum(axis=1) / m
    return out


def kernel_cdf_inv(sample, h, p, tol, maxit):
    """Invert the smoothed CDF by bisection on [min - 6h, max + 6h]."""
    p = np.clip(np.asarray(p, dtype=np.float64), 1e-12, 1.0 - 1e-12)
    lo = np.full(p.shape[0], sample[0] - 6.0 * h)
    hi = np.full(p.shape[0], sample[-1] + 6.0 * h)
    out = np.full(p.shape[0], np.nan)
    done = np.zeros(p.shape[0], dtype=bool)
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        f = kernel_cdf_eval(sample, h, mid)
        hit = (np.abs(f - p) <= tol) & ~done
        out[hit] = mid[hit]
        done |= hit
        if done.all():
            break
        low = f < p
        lo = np.where(low & ~done, mid, lo)
        hi = np.where(~low & ~done, mid, hi)
    return out


def candidate_slopes(x, y):
    """All pairwise slopes (y_j - y_i)/(x_j - x_i) over pairs with x_i != x_j."""
    m = x.shape[0]
    parts = []
    for i in range(m - 1):
        dx = x[i + 1:] - x[i]
        keep = dx != 0.0
        parts.append((y[i + 1:][keep] - y[i]) / dx[keep])
    if not parts:
        return np.empty(0)
    return np.concatenate(parts)


def check_loss_at(x, y, slope, alpha):
    """Check loss at the given slope with the intercept profiled out.

    The optimal intercept for a fixed slope is the ceil(m*alpha)-th order
    statistic of the residuals y - slope*x (lower endpoint on ties).
    Returns ``(loss, intercept)``.
    """
    m = x.shape[0]
    r = y - slope * x
    k = int(math.ceil(m * alpha - 1e-12))
    k = min(max(k, 1), m)
    b = np.partition(r, k - 1)[k - 1]
    e = r - b
    loss = float(np.sum(np.where(e >= 0.0, alpha * e, (alpha - 1.0) * e)))
    return loss, b


def qr_vertex_solve(x, y, slopes_sorted, alpha):
    """Exact linear quantile regression via the profiled vertex objective.

    g(slope) = min over intercepts of the check loss is convex piecewise
    linear with breakpoints among the pairwise slopes, so a discrete
    ternary search over the sorted candidates is exact.  Returns
    ``(intercept, slope, loss)``.
    """
    n_cand = slopes_sorted.shape[0]
    if n_cand == 0:
        loss, b = check_loss_at(x, y, 0.0, alpha)
        return b, 0.0, loss
    lo = 0
    hi = n_cand - 1
    while hi - lo > 2:
        third = (hi - lo) // 3
        m1 = lo + third
        m2 = hi - third
        g1, _ = check_loss_at(x, y, slopes_sorted[m1], alpha)
        g2, _ = check_loss_at(x, y, slopes_sorted[m2], alpha)
        if g1 < g2:
            hi = m2 - 1
        elif g1 > g2:
            lo = m1 + 1
        else:
            lo = m1
            hi = m2
    best = (np.inf, 0.0, 0.0)
    for idx in range(lo, hi + 1):
        s = slopes_sorted[idx]
        loss, b = check_loss_at(x, y, s, alpha)
        if loss < best[0]:
            best = (loss, s, b)
    return best[2], best[1], best[0]
