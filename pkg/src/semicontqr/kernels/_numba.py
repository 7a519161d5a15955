"""Numba JIT kernels.

Mirror of ``semicontqr.kernels._numpy``; see that module for the reference
semantics.  Every public function here is compiled with ``@njit(cache=True)``
(no fastmath, so results are reproducible run to run).

Family codes: 0 independence, 1 gaussian, 2 clayton, 3 frank.
"""

import math

import numpy as np
from numba import njit

INDEPENDENCE = 0
GAUSSIAN = 1
CLAYTON = 2
FRANK = 3

_UEPS = 1e-12           # interior clamp for unit-interval arguments
_FRANK_SNAP = 1e-4      # |theta| below this behaves as independence
_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# 64-node Gauss-Legendre rule on [-1, 1]; used for the Gaussian copula CDF
# (single integral over the correlation parameter).  Accurate to ~1e-15 for
# |rho| <= 0.999, which the finite-difference oracles in the tests rely on.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


@njit(cache=True)
def _clamp_unit(x):
    if x < _UEPS:
        return _UEPS
    if x > 1.0 - _UEPS:
        return 1.0 - _UEPS
    return x


@njit(cache=True)
def _norm_cdf_s(x):
    return 0.5 * math.erfc(-x / _SQRT2)


@njit(cache=True)
def _norm_pdf_s(x):
    return math.exp(-0.5 * x * x) / _SQRT_2PI


@njit(cache=True)
def _norm_ppf_s(p):
    # Acklam's rational approximation followed by one Halley step; the
    # polished result is accurate to ~1 ulp across (0, 1).  The upper half
    # maps to the lower via the exact reflection 1 - p (Sterbenz), which
    # keeps the polish free of cancellation in the far upper tail.
    if p <= 0.0:
        return -np.inf
    if p >= 1.0:
        return np.inf
    if p > 0.5:
        return -_norm_ppf_lower(1.0 - p)
    return _norm_ppf_lower(p)


@njit(cache=True)
def _norm_ppf_lower(p):
    if p < 0.02425:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
              + 4.374664141464968e+00) * q + 2.938163982698783e+00) / \
            ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
               + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0)
    else:
        q = p - 0.5
        r = q * q
        x = (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r
                - 2.759285104469687e+02) * r + 1.383577518672690e+02) * r
              - 3.066479806614716e+01) * r + 2.506628277459239e+00) * q / \
            (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r
                - 1.556989798598866e+02) * r + 6.680131188771972e+01) * r
              - 1.328068155288572e+01) * r + 1.0)
    err = 0.5 * math.erfc(-x / _SQRT2) - p
    u = err * _SQRT_2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


@njit(cache=True)
def _clayton_log1pw(theta, a, b):
    # log(1 + u^theta * (v^(-theta) - 1)) with a = theta*log(u) <= 0 and
    # b = -theta*log(v) >= 0, arranged to avoid 0 * inf at extreme corners.
    if b <= 33.0:
        w = math.exp(a) * math.expm1(b)
        return math.log1p(w)
    lw = a + b
    if lw > 33.0:
        return lw
    return math.log1p(math.exp(lw))


@njit(cache=True)
def _cop_cdf_s(code, theta, u, v):
    if u <= 0.0 or v <= 0.0:
        return 0.0
    if u >= 1.0:
        return v if v < 1.0 else 1.0
    if v >= 1.0:
        return u
    if code == GAUSSIAN:
        rho = theta
        x = _norm_ppf_s(u)
        y = _norm_ppf_s(v)
        # C(u,v) = Phi(x)Phi(y) + (1/2pi) int_0^rho phi2(x, y; r) dr
        acc = 0.0
        half = 0.5 * rho
        for k in range(_GL_X.shape[0]):
            r = half * (_GL_X[k] + 1.0)
            omr2 = 1.0 - r * r
            acc += _GL_W[k] * math.exp(
                -(x * x - 2.0 * r * x * y + y * y) / (2.0 * omr2)
            ) / math.sqrt(omr2)
        c = u * v + half * acc / (2.0 * math.pi)
        if c < 0.0:
            c = 0.0
        elif c > 1.0:
            c = 1.0
        return c
    if code == CLAYTON:
        lu = math.log(u)
        lv = math.log(v)
        s = math.expm1(-theta * lu) + math.expm1(-theta * lv)
        if s == np.inf:
            # deep corner; the copula value itself underflows
            return 0.0
        return math.exp(-math.log1p(s) / theta)
    if code == FRANK:
        if abs(theta) < _FRANK_SNAP:
            return u * v
        gu = math.expm1(-theta * u)
        gv = math.expm1(-theta * v)
        g1 = math.expm1(-theta)
        return -math.log1p(gu * gv / g1) / theta
    return u * v


@njit(cache=True)
def _cop_logpdf_s(code, theta, u, v):
    u = _clamp_unit(u)
    v = _clamp_unit(v)
    if code == GAUSSIAN:
        rho = theta
        x = _norm_ppf_s(u)
        y = _norm_ppf_s(v)
        omr2 = 1.0 - rho * rho
        return -0.5 * math.log(omr2) + \
            (2.0 * rho * x * y - rho * rho * (x * x + y * y)) / (2.0 * omr2)
    if code == CLAYTON:
        lu = math.log(u)
        lv = math.log(v)
        s = math.expm1(-theta * lu) + math.expm1(-theta * lv)
        if s == np.inf:
            return -np.inf
        return math.log1p(theta) - (1.0 + theta) * (lu + lv) \
            - (2.0 + 1.0 / theta) * math.log1p(s)
    if code == FRANK:
        if abs(theta) < _FRANK_SNAP:
            return 0.0
        gu = math.expm1(-theta * u)
        gv = math.expm1(-theta * v)
        g1 = math.expm1(-theta)
        s = g1 + gu * gv
        return math.log(-theta * g1) - theta * (u + v) - 2.0 * math.log(abs(s))
    return 0.0


@njit(cache=True)
def _hfunc_s(code, theta, v, u):
    # P(V <= v | U = u) = dC(u, v)/du
    if v <= 0.0:
        return 0.0
    if v >= 1.0:
        return 1.0
    u = _clamp_unit(u)
    if code == GAUSSIAN:
        rho = theta
        return _norm_cdf_s(
            (_norm_ppf_s(v) - rho * _norm_ppf_s(u)) / math.sqrt(1.0 - rho * rho)
        )
    if code == CLAYTON:
        a = theta * math.log(u)
        b = -theta * math.log(v)
        l1pw = _clayton_log1pw(theta, a, b)
        return math.exp(-(1.0 + 1.0 / theta) * l1pw)
    if code == FRANK:
        if abs(theta) < _FRANK_SNAP:
            return v
        gu = math.expm1(-theta * u)
        gv = math.expm1(-theta * v)
        g1 = math.expm1(-theta)
        return (gu + 1.0) * gv / (g1 + gu * gv)
    return v


@njit(cache=True)
def _hinv_closed_s(code, theta, p, u):
    if code == GAUSSIAN:
        rho = theta
        return _norm_cdf_s(
            _norm_ppf_s(p) * math.sqrt(1.0 - rho * rho) + rho * _norm_ppf_s(u)
        )
    if code == CLAYTON:
        # v = (1 + u^(-theta) (p^(-theta/(1+theta)) - 1))^(-1/theta)
        s = -theta / (1.0 + theta) * math.log(p)
        if s <= 33.0:
            lw = -theta * math.log(u) + math.log(math.expm1(s))
        else:
            lw = -theta * math.log(u) + s
        if lw > 33.0:
            l1pw = lw
        elif lw < -700.0:
            l1pw = 0.0
        else:
            l1pw = math.log1p(math.exp(lw))
        return math.exp(-l1pw / theta)
    if code == FRANK:
        if abs(theta) < _FRANK_SNAP:
            return p
        gu = math.expm1(-theta * u)
        g1 = math.expm1(-theta)
        gv = p * g1 / ((gu + 1.0) - p * gu)
        return -math.log1p(gv) / theta
    return p


@njit(cache=True)
def _hinv_s(code, theta, p, u):
    # closed form, then a monotone bisection polish if it misses
    # |hfunc(v) - p| <= 1e-10; NaN signals a (practically unreachable)
    # failure after 200 bisection steps.
    p = _clamp_unit(p)
    u = _clamp_unit(u)
    v = _hinv_closed_s(code, theta, p, u)
    if not (v > _UEPS):
        v = _UEPS
    elif not (v < 1.0 - _UEPS):
        v = 1.0 - _UEPS
    if abs(_hfunc_s(code, theta, v, u) - p) <= 1e-10:
        return v
    lo = _UEPS
    hi = 1.0 - _UEPS
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = _hfunc_s(code, theta, mid, u)
        if abs(f - p) <= 1e-10:
            return mid
        if f < p:
            lo = mid
        else:
            hi = mid
    return np.nan


@njit(cache=True)
def norm_cdf(x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _norm_cdf_s(x[i])
    return out


@njit(cache=True)
def norm_ppf(p):
    out = np.empty(p.shape[0])
    for i in range(p.shape[0]):
        out[i] = _norm_ppf_s(p[i])
    return out


@njit(cache=True)
def copula_cdf(code, theta, u, v):
    out = np.empty(u.shape[0])
    for i in range(u.shape[0]):
        out[i] = _cop_cdf_s(code, theta, u[i], v[i])
    return out


@njit(cache=True)
def copula_logpdf(code, theta, u, v):
    out = np.empty(u.shape[0])
    for i in range(u.shape[0]):
        out[i] = _cop_logpdf_s(code, theta, u[i], v[i])
    return out


@njit(cache=True)
def hfunc(code, theta, v, u):
    out = np.empty(v.shape[0])
    for i in range(v.shape[0]):
        out[i] = _hfunc_s(code, theta, v[i], u[i])
    return out


@njit(cache=True)
def hfunc_inv(code, theta, p, u):
    out = np.empty(p.shape[0])
    for i in range(p.shape[0]):
        out[i] = _hinv_s(code, theta, p[i], u[i])
    return out


@njit(cache=True)
def binary_loglik(code, theta, p0, u, z):
    # sum over i of log h(p0 | u_i) when z_i = 0 and log(1 - h) when z_i = 1,
    # with probabilities floored at 1e-12 before the log.
    total = 0.0
    for i in range(u.shape[0]):
        h = _hfunc_s(code, theta, p0, u[i])
        if z[i] == 0.0:
            if h < 1e-12:
                h = 1e-12
            total += math.log(h)
        else:
            q = 1.0 - h
            if q < 1e-12:
                q = 1e-12
            total += math.log(q)
    return total


@njit(cache=True)
def pair_loglik(code, theta, u, v):
    total = 0.0
    for i in range(u.shape[0]):
        total += _cop_logpdf_s(code, theta, u[i], v[i])
    return total


@njit(cache=True)
def _kernel_cdf_s(sample, h, q):
    # sample must be sorted ascending.  Terms with |q - y| > 12h are 0 or 1
    # to beyond double precision, so only the window is summed explicitly;
    # in IEEE double the result equals the full sum.
    m = sample.shape[0]
    lo = np.searchsorted(sample, q - 12.0 * h)
    hi = np.searchsorted(sample, q + 12.0 * h, side='right')
    acc = float(lo)
    for j in range(lo, hi):
        acc += _norm_cdf_s((q - sample[j]) / h)
    return acc / m


@njit(cache=True)
def kernel_cdf_eval(sample, h, q):
    out = np.empty(q.shape[0])
    for i in range(q.shape[0]):
        out[i] = _kernel_cdf_s(sample, h, q[i])
    return out


@njit(cache=True)
def kernel_cdf_inv(sample, h, p, tol, maxit):
    m = sample.shape[0]
    out = np.empty(p.shape[0])
    for i in range(p.shape[0]):
        pi = p[i]
        if pi < 1e-12:
            pi = 1e-12
        elif pi > 1.0 - 1e-12:
            pi = 1.0 - 1e-12
        lo = sample[0] - 6.0 * h
        hi = sample[m - 1] + 6.0 * h
        val = np.nan
        for _ in range(maxit):
            mid = 0.5 * (lo + hi)
            f = _kernel_cdf_s(sample, h, mid)
            if abs(f - pi) <= tol:
                val = mid
                break
            if f < pi:
                lo = mid
            else:
                hi = mid
        out[i] = val
    return out


@njit(cache=True)
def candidate_slopes(x, y):
    m = x.shape[0]
    n_pairs = 0
    for i in range(m - 1):
        for j in range(i + 1, m):
            if x[i] != x[j]:
                n_pairs += 1
    out = np.empty(n_pairs)
    k = 0
    for i in range(m - 1):
        for j in range(i + 1, m):
            if x[i] != x[j]:
                out[k] = (y[j] - y[i]) / (x[j] - x[i])
                k += 1
    return out


@njit(cache=True)
def check_loss_at(x, y, slope, alpha):
    # Profile the intercept out of the check loss: for a fixed slope the
    # optimal intercept is the ceil(m*alpha)-th order statistic of the
    # residuals (lower endpoint on ties).
    m = x.shape[0]
    r = y - slope * x
    k = int(math.ceil(m * alpha - 1e-12))
    if k < 1:
        k = 1
    elif k > m:
        k = m
    b = np.partition(r, k - 1)[k - 1]
    total = 0.0
    for i in range(m):
        e = r[i] - b
        if e >= 0.0:
            total += alpha * e
        else:
            total += (alpha - 1.0) * e
    return total, b


@njit(cache=True)
def qr_vertex_solve(x, y, slopes_sorted, alpha):
    # The profiled objective g(slope) is convex piecewise linear with all
    # breakpoints among the pairwise slopes, so a discrete ternary search
    # over the sorted candidates finds an exact minimiser.
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
    best_loss = np.inf
    best_slope = 0.0
    best_b = 0.0
    for idx in range(lo, hi + 1):
        s = slopes_sorted[idx]
        loss, b = check_loss_at(x, y, s, alpha)
        if loss < best_loss:
            best_loss = loss
            best_slope = s
            best_b = b
    return best_b, best_slope, best_loss
