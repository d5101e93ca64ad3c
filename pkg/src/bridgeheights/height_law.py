"""Distribution of the maximum height of one or two noncolliding Bessel bridges.

Single bridge::

    P(H1 < h) = sum_n exp(-2 h^2 n^2) (1 - 4 h^2 n^2)
    q1(h)     = 8 sum_{n>=1} exp(-2 h^2 n^2) (4 h^3 n^4 - 3 h n^2)

Two noncolliding bridges use the lattice sums ``sum exp(-2h^2 r^2) A_h`` and
``sum exp(-2h^2 r^2) B_h`` over ``Z^2``, with the degree-8 polynomial ``A_h``
and its companion ``B_h``. The reflection-principle kernels and the
Karlin-McGregor determinant ratio give an independent finite-``x`` route to
the same CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DegeneracyError, DomainError, TruncationError
from .special_fn import DEFAULT_POLICY

__all__ = [
    "HeightLawPoint",
    "KernelQuery",
    "a_poly",
    "b_poly",
    "cdf_h1",
    "density_h1",
    "cdf_h2",
    "density_h2",
    "kernel",
    "km_ratio",
    "km_limit",
    "h1_series",
    "h2_series",
]

# Gaussian decay exponent beyond ln(1/abs_tol) that covers the polynomial prefactors.
_EXTRA_DECAY = 25.0
_EPS = 2.2e-16


@dataclass(frozen=True)
class HeightLawPoint:
    h: float
    cdf: float
    density: float
    err_bound: float
    terms_used: int


@dataclass(frozen=True)
class KernelQuery:
    t: float
    x: float
    y: float
    h: float = math.inf


def a_poly(h, n1, n2):
    """Coefficient polynomial ``A_h(n1, n2)`` of the two-bridge CDF."""
    x = (h * n1) ** 2
    y = (h * n2) ** 2
    return (
        1.0
        + x * (-16.0 + x * (24.0 - (32.0 / 3.0) * x))
        + x * y * (24.0 + x * (-32.0 + (128.0 / 3.0) * x))
        - (128.0 / 3.0) * x * x * y * y
    )


def b_poly(h, n1, n2):
    """Coefficient polynomial ``B_h(n1, n2)`` of the two-bridge density."""
    x = (h * n1) ** 2
    y = (h * n2) ** 2
    inner = (
        x * (-15.0 + x * (60.0 + x * (-60.0 + 16.0 * x)))
        + x * y * (60.0 + x * (-180.0 + x * (192.0 - 64.0 * x)))
        + x * x * y * y * (-80.0 + 64.0 * x)
    )
    return (8.0 / 3.0) * inner / h


def _cutoff(h, policy):
    # Smallest N with 2 h^2 N^2 beyond the tolerance plus prefactor margin.
    need = math.ceil(math.sqrt((math.log(1.0 / policy.abs_tol) + _EXTRA_DECAY) / 2.0) / h)
    cap = max(policy.max_terms, math.ceil(6.0 / h))
    return need, cap


def _check_h(h):
    if not h > 0:
        raise DomainError("height must be positive", h=h)


def h1_series(h, policy=DEFAULT_POLICY, _magnitude=False):
    """Vectorised ``(cdf, density)`` of ``H1`` on an array of heights."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    n_max = max(min(*_cutoff(float(h.min()), policy)), 1)
    n = np.arange(1, n_max + 1, dtype=float)[:, None]
    x = (h[None, :] * n) ** 2
    e = np.exp(-2.0 * x)
    ct = e * (1.0 - 4.0 * x)
    dt = e * (4.0 * x * x - 3.0 * x)
    cdf = 1.0 + 2.0 * np.sum(ct, axis=0)
    dens = 8.0 * np.sum(dt, axis=0) / h
    if _magnitude:
        mag = 1.0 + 2.0 * np.sum(np.abs(ct), axis=0) + 8.0 * np.sum(np.abs(dt), axis=0) / h
        return cdf, dens, mag
    return cdf, dens


_QUADRANT_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _quadrant(n_max):
    if n_max not in _QUADRANT_CACHE:
        k = np.arange(n_max + 1, dtype=float)
        n1, n2 = np.meshgrid(k, k, indexing="ij")
        mult = np.where(n1 > 0, 2.0, 1.0) * np.where(n2 > 0, 2.0, 1.0)
        mult[0, 0] = 0.0
        n1, n2, mult = n1.ravel(), n2.ravel(), mult.ravel()
        keep = mult > 0
        _QUADRANT_CACHE.clear()
        _QUADRANT_CACHE[n_max] = (n1[keep], n2[keep], mult[keep])
    return _QUADRANT_CACHE[n_max]


def h2_series(h, policy=DEFAULT_POLICY, _magnitude=False):
    """Vectorised ``(cdf, density)`` of ``H2`` on an array of heights."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    n_max = max(min(*_cutoff(float(h.min()), policy)), 1)
    n1, n2, mult = _quadrant(n_max)
    cdf = np.empty_like(h)
    dens = np.empty_like(h)
    mag = np.empty_like(h)
    for i, hv in enumerate(h):
        w = mult * np.exp(-2.0 * hv * hv * (n1 * n1 + n2 * n2))
        a = w * a_poly(hv, n1, n2)
        b = w * b_poly(hv, n1, n2)
        cdf[i] = 1.0 + np.sum(a)
        dens[i] = np.sum(b)
        mag[i] = 1.0 + np.sum(np.abs(a)) + np.sum(np.abs(b))
    if _magnitude:
        return cdf, dens, mag
    return cdf, dens


def _point(h, policy, n_walkers):
    _check_h(h)
    h = float(h)
    need, cap = _cutoff(h, policy)
    if need > cap:
        raise TruncationError(
            "height series needs more terms than allowed", h=h, needed=need, cap=cap
        )
    series = h1_series if n_walkers == 1 else h2_series
    cdf, dens, mag = series(h, policy, _magnitude=True)
    # First omitted shell, with a geometric factor for the rest.
    m = need + 1
    x = 2.0 * (h * m) ** 2
    err = 8.0 * m * math.exp(-x) * (1.0 + x) ** 5 * (1.0 + 1.0 / h) * n_walkers
    # Rounding in the cancelling sum, one ulp per accumulated magnitude.
    err += 4.0 * _EPS * float(mag[0])
    # A probability: clip the rounding noise at 0 and 1.
    c = min(max(float(cdf[0]), 0.0), 1.0)
    return HeightLawPoint(h, c, float(dens[0]), err, need)


def cdf_h1(h, policy=DEFAULT_POLICY):
    """``P(H1 < h)``; the returned point also carries the density."""
    return _point(h, policy, 1)


def density_h1(h, policy=DEFAULT_POLICY):
    """``q1(h) = d/dh P(H1 < h)``; the returned point also carries the CDF."""
    return _point(h, policy, 1)


def cdf_h2(h, policy=DEFAULT_POLICY):
    return _point(h, policy, 2)


def density_h2(h, policy=DEFAULT_POLICY):
    return _point(h, policy, 2)


def _gauss(t, d):
    return math.exp(-d * d / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def kernel(q, which="free", policy=DEFAULT_POLICY):
    """Brownian transition densities on R, on R+ and on the strip (0, h).

    ``free`` is the heat kernel, ``absorbed_wall`` kills paths at 0 and
    ``absorbed_strip`` kills them at 0 and at ``q.h`` (image sum).
    """
    t, x, y = float(q.t), float(q.x), float(q.y)
    if not t > 0:
        raise DomainError("duration must be positive", t=t)
    if which == "free":
        return _gauss(t, y - x)
    if which == "absorbed_wall":
        if x < 0 or y < 0:
            raise DomainError("absorbed_wall kernel needs x, y >= 0", x=x, y=y)
        # exp(-(y-x)^2/2t) - exp(-(y+x)^2/2t) without cancellation.
        return 2.0 * math.exp(-(x * x + y * y) / (2.0 * t)) * math.sinh(x * y / t) / math.sqrt(
            2.0 * math.pi * t
        )
    if which == "absorbed_strip":
        h = float(q.h)
        if not (0 < x < h and 0 < y < h):
            raise DomainError("absorbed_strip kernel needs 0 < x, y < h", x=x, y=y, h=h)
        return _strip(t, x, y, h, policy)
    raise DomainError("unknown kernel", which=which)


def _strip(t, x, y, h, policy):
    pref = 1.0 / math.sqrt(2.0 * math.pi * t)
    total = 0.0
    for n in range(0, policy.max_terms + 1):
        terms = 0.0
        for m in ((n,) if n == 0 else (n, -n)):
            c = y - 2.0 * h * m
            # Image pair at +x and -x shifted by 2hm, combined via sinh.
            terms += 2.0 * math.exp(-(c * c + x * x) / (2.0 * t)) * math.sinh(x * c / t)
        total += terms
        if n > 0:
            d = h * (2 * n - 1)
            if pref * math.exp(-d * d / (2.0 * t)) < policy.abs_tol:
                return pref * total
    raise TruncationError("strip image sum did not converge", partial_value=pref * total)


def _strip_mp(t, x, y, h, tol):
    pref = 1 / mpmath.sqrt(2 * mpmath.pi * t)
    total = mpmath.mpf(0)
    n = 0
    while True:
        for m in ((n,) if n == 0 else (n, -n)):
            c = y - 2 * h * m
            total += 2 * mpmath.exp(-(c * c + x * x) / (2 * t)) * mpmath.sinh(x * c / t)
        n += 1
        d = h * (2 * n - 1)
        if pref * mpmath.exp(-d * d / (2 * t)) < tol:
            return pref * total


def _wall_mp(t, x, y):
    pref = 1 / mpmath.sqrt(2 * mpmath.pi * t)
    return 2 * pref * mpmath.exp(-(x * x + y * y) / (2 * t)) * mpmath.sinh(x * y / t)


def km_ratio(h, eps, t=1.0, policy=DEFAULT_POLICY):
    """Karlin-McGregor ratio ``det[p2^h(t, y_j | x_k)] / det[p1(t, y_j | x_k)]``.

    Evaluated at ``x = y = (eps, 2 eps)``. Both determinants vanish like
    ``eps^8``, so they are formed in 40-digit arithmetic.
    """
    if not (eps > 0 and 2.0 * eps < h):
        raise DomainError("need 0 < eps and 2*eps < h", h=h, eps=eps)
    if math.isinf(h):
        return 1.0
    with mpmath.workdps(40):
        e = mpmath.mpf(eps)
        pts = (e, 2 * e)
        hh, tt = mpmath.mpf(h), mpmath.mpf(t)
        tol = mpmath.mpf(policy.abs_tol) * e**8
        num = [[_strip_mp(tt, xk, yj, hh, tol) for xk in pts] for yj in pts]
        den = [[_wall_mp(tt, xk, yj) for xk in pts] for yj in pts]
        d_num = num[0][0] * num[1][1] - num[0][1] * num[1][0]
        d_den = den[0][0] * den[1][1] - den[0][1] * den[1][0]
        if abs(d_den) < 1e-300:
            raise DegeneracyError(
                "wall determinant underflows; eps too small", eps=eps, det=float(d_den)
            )
        return float(d_num / d_den)


KM_EPS = (1e-2, 5e-3, 2.5e-3)


def km_limit(h, eps_seq=KM_EPS, t=1.0, policy=DEFAULT_POLICY):
    """Small-``eps`` limit of :func:`km_ratio` by Richardson extrapolation in ``eps^2``.

    Returns ``(extrapolated, raw_values)``.
    """
    eps = np.asarray(eps_seq, dtype=float)
    vals = np.array([km_ratio(h, e, t, policy) for e in eps])
    # Neville table in the variable eps^2, evaluated at 0.
    x = eps**2
    table = vals.copy()
    for k in range(1, len(x)):
        for i in range(len(x) - 1, k - 1, -1):
            table[i] = (x[i - k] * table[i] - x[i] * table[i - 1]) / (x[i - k] - x[i])
    return float(table[-1]), vals
