"""Closed forms, exact finite-n sums, and limit formulas for the policies.

Conventions: x is the observation fraction, lam weights the two phases of the
objective ((1-lam) on Phase 1, lam on Phase 2), and all probabilities refer to
accepting the single best item. Functions named *_finite_* are exact at the
given n; the others are n -> infinity limits.
"""

from __future__ import annotations

import math
from typing import Callable

from .alpha import AlphaTable, alpha_lower
from .errors import InvalidParameterError
from .strategies import ceil_frac, e_window_cutoff

E = math.e
C_STAR = 1.0 / (E - 1.0)  # where u*e = 1+u, the crossover inside the Phase-2 integrals


def _check_unit(name: str, v: float) -> None:
    if not 0.0 <= v <= 1.0:
        raise InvalidParameterError(f"{name} must lie in [0, 1]")


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-9) -> float:
    """Recursive adaptive Simpson quadrature with Richardson correction."""
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol)

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, tol_here, depth):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        fl = f(lmid)
        fr = f(rmid)
        left = simpson(lo, mid, flo, fl, fmid)
        right = simpson(mid, hi, fmid, fr, fhi)
        if depth >= 60 or abs(left + right - whole) <= 15.0 * tol_here:
            return left + right + (left + right - whole) / 15.0
        return recurse(lo, mid, flo, fl, fmid, left, tol_here / 2.0, depth + 1) + recurse(
            mid, hi, fmid, fr, fhi, right, tol_here / 2.0, depth + 1
        )

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 0)


def secretary_limit_prob(x: float) -> float:
    """Limit probability -x*ln(x) that observe-then-accept-records wins with window x."""
    _check_unit("x", x)
    if x == 0.0:
        return 0.0
    return -x * math.log(x)


def sec_accept_prob(n: int, window: int) -> float:
    """Exact probability the n-item secretary run with integer window accepts the best item."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if not 0 <= window <= n:
        raise InvalidParameterError("window must lie in [0, n]")
    if window == 0:
        return 1.0 / n  # accepts the first item outright
    s = math.fsum(1.0 / (i - 1) for i in range(window + 1, n + 1))
    return window * s / n


def sop_finite_prob(n: int, x: float) -> float:
    """Exact P(accept best) for the shared-observation-window policy at size n.

    Phase 1 can accept the best item at positions m+1..n, Phase 2 at any of
    its positions; both only need the window maximum to survive until then.
    With m = 0 the policy takes the first item of each phase, so the
    probability degenerates to 1/n.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    _check_unit("x", x)
    m = ceil_frac(x, n)
    if m == 0:
        return 1.0 / n
    phase1 = math.fsum(m / (i - 1.0) for i in range(m + 1, n + 1))
    phase2 = math.fsum(m / (m + i - 1.0) for i in range(1, n + 1))
    return (phase1 + phase2) / (2.0 * n)


def sop_limit_perf(x: float) -> float:
    """Limit performance -(x/2)*ln(x^2/(x+1)) of the shared-window policy."""
    _check_unit("x", x)
    if x == 0.0:
        return 0.0
    return -(x / 2.0) * math.log(x * x / (x + 1.0))


def stopping_time_pmf(n: int, x: float) -> list[float]:
    """Exact pmf of the Phase-1 stop position T for a sec-style first phase.

    Returns a list indexed by t = 0..n; entries are zero outside m < t <= n
    plus the no-acceptance atom at t = n. Requires m = ceil(x*n) >= 1.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    _check_unit("x", x)
    m = ceil_frac(x, n)
    if m == 0:
        raise InvalidParameterError("ceil(x*n) = 0 makes the stop-time degenerate")
    pmf = [0.0] * (n + 1)
    for t in range(m + 1, n + 1):
        pmf[t] = m / (t * (t - 1.0))
    pmf[n] += m / n
    return pmf


def wai_finite_prob(n: int, x: float) -> float:
    """Exact P(accept best) for the waiting policy at size n.

    Sums over the Phase-1 stop time t: conditioned on t, the n+t seen items
    form a secretary run with window max(t, ceil((n+t)/e)), and the best item
    lands among them with probability (n+t)/(2n).
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    _check_unit("x", x)
    m = ceil_frac(x, n)
    if m == 0:
        # Phase 1 takes the first item; T = 1 surely.
        phase2 = ((n + 1) / (2.0 * n)) * sec_accept_prob(n + 1, max(1, e_window_cutoff(n + 1)))
        return 1.0 / (2.0 * n) + phase2
    phase1 = math.fsum(m / (i - 1.0) for i in range(m + 1, n + 1)) / (2.0 * n)
    # harmonic prefixes H[k] = sum_{j<=k} 1/j keep the sum over t linear in n
    harmonic = [0.0] * (2 * n)
    for k in range(1, 2 * n):
        harmonic[k] = harmonic[k - 1] + 1.0 / k
    pmf = stopping_time_pmf(n, x)
    # pmf support is {m+1, ..., n} plus the never-accepted mass at t = n
    terms = []
    for t in range(1, n + 1):
        if pmf[t] <= 0.0:
            continue
        total = n + t
        w = max(t, e_window_cutoff(total))
        p_sec = (w / total) * (harmonic[total - 1] - harmonic[w - 1]) if w < total else 0.0
        terms.append(pmf[t] * (total / (2.0 * n)) * p_sec)
    return phase1 + math.fsum(terms)


def tps_finite_prob(n: int, x: float) -> float:
    """Exact P(accept best) when each phase runs its own secretary rule."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    _check_unit("x", x)
    return sec_accept_prob(n, ceil_frac(x, n))


def rpi_phase2_integrand(u: float, x: float, table: AlphaTable) -> float:
    """Integrand (x/u^2) * alpha_lb(u/(1+u)) of the Phase-2 performance integral."""
    if u <= 0.0:
        raise InvalidParameterError("u must be positive")
    return (x / (u * u)) * alpha_lower(u / (1.0 + u), table)


def rpi_limit_perf(x: float, table: AlphaTable, lam: float = 0.5) -> float:
    """Limit lambda-performance of the rank-threshold policy with window x.

    (1-lam) * (-x ln x) + lam * x * (I(x) + alpha_lb(1/2)) where I(x)
    integrates alpha_lb(u/(1+u))/u^2 over the stop-fraction u in (x, 1). The
    integrand is piecewise smooth with breaks where the alpha table steps, so
    the quadrature is split there. Continuously extended to lam/e at x = 0.
    """
    _check_unit("x", x)
    _check_unit("lam", lam)
    if x == 0.0:
        return lam / E
    phase1 = -(x * math.log(x))
    if x < 1.0:
        breaks = {x, 1.0}
        if x < C_STAR:
            breaks.add(C_STAR)
        for a in table.anchors:
            if a.p < 1.0:
                u = a.p / (1.0 - a.p)
                if x < u < 1.0:
                    breaks.add(u)
        pts = sorted(breaks)
        integral = math.fsum(
            adaptive_simpson(lambda u: alpha_lower(u / (1.0 + u), table) / (u * u), a, b, tol=2.5e-10)
            for a, b in zip(pts, pts[1:])
        )
    else:
        integral = 0.0
    phase2 = x * (integral + alpha_lower(0.5, table))
    return (1.0 - lam) * phase1 + lam * phase2


_WAI_TAIL_CACHE: dict[None, float] = {}


def _wai_tail_integral(lo: float) -> float:
    """Integral of ln(1+1/u)/u over (lo, 1), the post-crossover Phase-2 piece."""
    if lo >= 1.0:
        return 0.0
    return adaptive_simpson(lambda u: math.log1p(1.0 / u) / u, lo, 1.0, tol=1e-10)


def wai_limit_prob(x: float, lam: float = 0.5) -> float:
    """Limit lambda-probability that the waiting policy accepts the best item.

    -(1-lam)*x*ln(x) + lam*x*(I1 + I2 + ln 2) with I1 over (min(x,c), c) of
    (u+1)/(e u^2), in closed form via the antiderivative (ln u - 1/u)/e, and
    I2 over (max(x,c), 1) of ln(1+1/u)/u by quadrature, c = 1/(e-1).
    Continuously extended to lam/e at x = 0.
    """
    _check_unit("x", x)
    _check_unit("lam", lam)
    if x == 0.0:
        return lam / E
    phase1 = -(x * math.log(x))

    def antideriv(u: float) -> float:
        return (math.log(u) - 1.0 / u) / E

    lo1 = min(x, C_STAR)
    i1 = antideriv(C_STAR) - antideriv(lo1)
    if x <= C_STAR:
        if None not in _WAI_TAIL_CACHE:
            _WAI_TAIL_CACHE[None] = _wai_tail_integral(C_STAR)
        i2 = _WAI_TAIL_CACHE[None]
    else:
        i2 = _wai_tail_integral(x)
    phase2 = x * (i1 + i2 + math.log(2.0))
    return (1.0 - lam) * phase1 + lam * phase2
