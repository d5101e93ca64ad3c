"""Moments ``E[H1^s]`` and ``E[H2^s]`` by three independent routes.

``theta_integral``
    Closed forms built from theta-function integrals on ``[1, inf)``, each
    summed as a lattice series of upper incomplete gamma values. Pole-free,
    fastest, and the default.
``dirichlet``
    The gamma-weighted double Dirichlet series ``Z~_{s/2}(b)``, continued to
    all real ``s`` away from ``s = 0, 2``.
``quadrature``
    Direct integration of ``h^s q_N(h)`` against the height density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy import integrate

from .errors import DomainError, PoleProximityError, QuadratureError
from .height_law import h1_series, h2_series
from .lattice_series import ACCEL_POLICY, theta_product_integral, z_tilde
from .special_fn import DEFAULT_POLICY, SeriesValue, theta, xi_riemann

__all__ = [
    "MomentQuery",
    "MomentResult",
    "METHODS",
    "moment",
    "moment_h1",
    "moment_h1_quadrature",
    "moment_h2_dirichlet",
    "moment_h2_theta",
    "moment_h2_quadrature",
    "xi2",
    "k_integral",
    "j_integral",
    "i_split_check",
    "theta_at_one",
]

METHODS = ("dirichlet", "theta_integral", "quadrature")
ANALYTIC_S_RANGE = (-2.0, 12.0)
DIRICHLET_POLE_GUARD = 1e-3


@dataclass(frozen=True)
class MomentQuery:
    n_particles: int
    s: float
    method: str = "theta_integral"

    def __post_init__(self):
        if self.n_particles not in (1, 2):
            raise DomainError("n_particles must be 1 or 2", n_particles=self.n_particles)
        if self.method not in METHODS:
            raise DomainError("unknown method", method=self.method)
        if self.method == "quadrature" and self.s < 0:
            raise DomainError("quadrature route needs s >= 0", s=self.s)
        if self.method == "dirichlet" and self.n_particles == 2:
            for pole in (0.0, 2.0):
                if abs(self.s - pole) <= DIRICHLET_POLE_GUARD:
                    raise PoleProximityError(
                        "dirichlet route is singular here", s=self.s, pole=pole
                    )


@dataclass(frozen=True)
class MomentResult:
    value: float
    err_bound: float
    method: str

    def __float__(self):
        return float(self.value)


def _check_analytic(s):
    lo, hi = ANALYTIC_S_RANGE
    if not lo <= s <= hi:
        raise DomainError("analytic routes are implemented for s in [-2, 12]", s=s)


@lru_cache(maxsize=None)
def theta_at_one():
    """``(theta(1), theta'(1), theta''(1))``, computed once per process."""
    return tuple(theta(1.0, k).value for k in range(3))


# ---------------------------------------------------------------------------
# Theta integrals on [1, inf)


def k_integral(j, s, policy=ACCEL_POLICY):
    """``K_j(s)`` for ``j`` in 0, 1, 2.

    ``K_0 = int u^(s/2-1) (theta^2 - 1)``, ``K_1 = int u^(s/2+1) theta'^2``,
    ``K_2 = int u^(s/2+3) theta''^2``, all over ``[1, inf)``.
    """
    if j not in (0, 1, 2):
        raise DomainError("K_j needs j in {0, 1, 2}", j=j)
    return theta_product_integral(j, j, s / 2.0 + 2.0 * j, policy).value


def j_integral(j, s, policy=ACCEL_POLICY):
    """Mixed integrals ``J_1``, ``J_2``, ``J_3`` by their partial-integration forms.

    ``J_1 = int u^(1-s/2) theta theta'``, ``J_2 = int u^(2-s/2) theta theta''``,
    ``J_3 = int u^(3-s/2) theta' theta''`` over ``[1, inf)``; each reduces to
    boundary values at ``u = 1`` plus ``K_0(2-s)`` or ``K_1(2-s)``.
    """
    t0, t1, _ = theta_at_one()
    if j == 1:
        return 0.25 * (s - 2.0) * k_integral(0, 2.0 - s, policy) - 0.5 * (t0 * t0 - 1.0)
    if j == 2:
        return (
            -t0 * t1
            - 0.25 * (s - 4.0) * (t0 * t0 - 1.0)
            + 0.125 * (s - 2.0) * (s - 4.0) * k_integral(0, 2.0 - s, policy)
            - k_integral(1, 2.0 - s, policy)
        )
    if j == 3:
        return -0.5 * t1 * t1 + 0.25 * (s - 6.0) * k_integral(1, 2.0 - s, policy)
    raise DomainError("J_j needs j in {1, 2, 3}", j=j)


# ---------------------------------------------------------------------------
# xi_2 and the analytic moment formulas


def xi2(s, policy=ACCEL_POLICY):
    """The symmetric function ``xi_2`` with ``xi_2(2 - s) = xi_2(s)``.

    Arguments ``s >= 6`` are evaluated at their mirror image ``2 - s``.
    """
    s = float(s)
    if s >= 6.0:
        return xi2(2.0 - s, policy)
    r = 2.0 - s
    k1 = theta_product_integral(1, 1, s / 2.0 + 2.0, policy)
    k1r = theta_product_integral(1, 1, r / 2.0 + 2.0, policy)
    k2 = theta_product_integral(2, 2, s / 2.0 + 4.0, policy)
    k2r = theta_product_integral(2, 2, r / 2.0 + 4.0, policy)
    t0 = theta_at_one()[0]
    c1, c1r = (s + 4.0) * (s + 6.0), (r + 4.0) * (r + 6.0)
    value = (
        -(c1 * k1.value + c1r * k1r.value) / 6.0
        + (8.0 / 3.0) * (k2.value + k2r.value)
        + s * (s - 2.0) * t0 * t0 / 12.0
    )
    err = (
        (abs(c1) * k1.err_bound + abs(c1r) * k1r.err_bound) / 6.0
        + (8.0 / 3.0) * (k2.err_bound + k2r.err_bound)
    )
    return SeriesValue(value, err, policy.max_terms)


def moment_h1(s, policy=DEFAULT_POLICY):
    """``E[H1^s] = 2 (pi/2)^(s/2) xi(s)``."""
    s = float(s)
    _check_analytic(s)
    xi = xi_riemann(s, policy)
    pref = 2.0 * (math.pi / 2.0) ** (s / 2.0)
    return MomentResult(pref * xi.value, pref * xi.err_bound, "theta_integral")


def moment_h2_theta(s, policy=ACCEL_POLICY):
    """``E[H2^s]`` from the pole-free theta-integral representation."""
    s = float(s)
    _check_analytic(s)
    t0, t1, _ = theta_at_one()
    k0 = theta_product_integral(0, 0, s / 2.0, policy)
    x2 = xi2(s, policy)
    poly = (1.0 - s) * (s * s - 2.0 * s + 12.0) / 24.0
    inner = poly * (2.0 - s * k0.value) - 4.0 * s * (t0 * t1 + 2.0 * t1 * t1) + s * x2.value
    pref = (math.pi / 2.0) ** (s / 2.0)
    err = pref * (abs(poly * s) * k0.err_bound + abs(s) * x2.err_bound)
    return MomentResult(pref * inner, err, "theta_integral")


def moment_h2_dirichlet(s, policy=ACCEL_POLICY):
    """``E[H2^s]`` as a combination of three ``Z~_{s/2}(b)`` values."""
    s = float(s)
    _check_analytic(s)
    MomentQuery(2, s, "dirichlet")
    a = s / 2.0
    z = [z_tilde(a, b, "gamma_accelerated", policy) for b in (0, 1, 2)]
    coef = (
        (s - 1.0) * (s * s - 2.0 * s + 12.0),
        -4.0 * (s + 4.0) * (s + 6.0),
        64.0,
    )
    pref = 2.0 ** (-s / 2.0) / 24.0 * s
    value = pref * sum(c * zb.value for c, zb in zip(coef, z))
    err = abs(pref) * sum(abs(c) * zb.err_bound for c, zb in zip(coef, z))
    return MomentResult(value, err, "dirichlet")


# ---------------------------------------------------------------------------
# Quadrature oracle


_H_LOW = 0.12
_H_SPLIT = 1.0


def _h_max(s, n_walkers, abs_tol):
    # Gaussian tail of h^s q_N(h); the polynomial degree is 3 (N=1) or 9 (N=2).
    deg = s + (3.0 if n_walkers == 1 else 9.0)
    h = 2.0
    while 300.0 * h ** (deg + 1.0) * math.exp(-2.0 * h * h) > abs_tol:
        h += 0.25
    return h


def _moment_quadrature(s, n_walkers, abs_tol):
    s = float(s)
    if s < 0:
        raise DomainError("quadrature route needs s >= 0", s=s)
    series = h1_series if n_walkers == 1 else h2_series

    def f(h):
        return h**s * series(h)[1][0]

    h_max = _h_max(s, n_walkers, abs_tol)
    total = 0.0
    err = 0.0
    for lo, hi in ((_H_LOW, _H_SPLIT), (_H_SPLIT, h_max)):
        val, e = integrate.quad(f, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)
        if not math.isfinite(val):
            raise QuadratureError("quadrature diverged", s=s, interval=(lo, hi))
        total += val
        err += e
    # Mass below _H_LOW is below the CDF there, which is at rounding level.
    err += abs(series(_H_LOW)[0][0]) * _H_LOW**s + abs_tol
    if err > 1e-7 * max(1.0, abs(total)):
        raise QuadratureError("quadrature error estimate too large", s=s, err=err)
    return MomentResult(total, err, "quadrature")


def moment_h2_quadrature(s, abs_tol=1e-13):
    """``E[H2^s] = int h^s q_2(h) dh`` by adaptive Gauss-Kronrod quadrature."""
    return _moment_quadrature(s, 2, abs_tol)


def moment_h1_quadrature(s, abs_tol=1e-13):
    """``E[H1^s] = int h^s q_1(h) dh`` by adaptive Gauss-Kronrod quadrature."""
    return _moment_quadrature(s, 1, abs_tol)


def _moment_h1_dirichlet(s):
    from scipy.special import zeta

    if not s > 1:
        raise DomainError("the Dirichlet series of zeta needs s > 1", s=s)
    xi = 0.5 * s * (s - 1.0) * math.pi ** (-s / 2.0) * math.gamma(s / 2.0) * zeta(s)
    return MomentResult(2.0 * (math.pi / 2.0) ** (s / 2.0) * xi, 1e-15, "dirichlet")


def moment(query, policy=None):
    """Dispatch a :class:`MomentQuery` to the matching route."""
    s = float(query.s)
    if query.n_particles == 1:
        if query.method == "theta_integral":
            return moment_h1(s, policy or DEFAULT_POLICY)
        if query.method == "quadrature":
            return moment_h1_quadrature(s)
        return _moment_h1_dirichlet(s)
    if query.method == "theta_integral":
        return moment_h2_theta(s, policy or ACCEL_POLICY)
    if query.method == "quadrature":
        return moment_h2_quadrature(s)
    return moment_h2_dirichlet(s, policy or ACCEL_POLICY)


# ---------------------------------------------------------------------------
# Reciprocity splits of the (0, inf) integrals


_SPLIT_POLES = {1: (0.0, 2.0), 2: (2.0,), 3: (2.0,)}
_SPLIT_MARGIN = 0.05
# Leading small-u behaviour of theta^(b)(u)^2 is coef * u^(-(2b+1)).
_SINGULAR = {1: (1.0, 1), 2: (0.25, 3), 3: (9.0 / 16.0, 5)}


def _split_lhs(j, s):
    b = j - 1
    e = s / 2.0 + 2.0 * b - 1.0

    def upper(u):
        v = theta(u, b).value
        return u**e * (v * v - (1.0 if b == 0 else 0.0))

    coef, power = _SINGULAR[j]

    def lower(w):
        # u = 1/w on (0, 1]; the subtracted piece is integrated exactly below.
        u = 1.0 / w
        v = theta(u, b).value
        return w ** (-e - 2.0) * (v * v - coef * w**power)

    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    hi, _ = integrate.quad(upper, 1.0, 30.0, **opts)
    lo, _ = integrate.quad(lower, 1.0, 40.0, **opts)
    # int_0^1 u^e (coef u^-power - [b=0]) du, continued in s.
    exact = coef / (e - power + 1.0) - (1.0 / (e + 1.0) if b == 0 else 0.0)
    return exact + lo + hi


def _split_rhs(j, s, policy):
    k0r = k_integral(0, 2.0 - s, policy)
    if j == 1:
        return -2.0 / s + 2.0 / (s - 2.0) + k_integral(0, s, policy) + k0r
    k1r = k_integral(1, 2.0 - s, policy)
    j1 = j_integral(1, s, policy)
    if j == 2:
        return 1.0 / (2.0 * (s - 2.0)) + k_integral(1, s, policy) + j1 + k1r + 0.25 * k0r
    return (
        9.0 / (8.0 * (s - 2.0))
        + k_integral(2, s, policy)
        + k_integral(2, 2.0 - s, policy)
        + 6.0 * j_integral(3, s, policy)
        + 1.5 * j_integral(2, s, policy)
        + 4.5 * j1
        + 9.0 * k1r
        + (9.0 / 16.0) * k0r
    )


def i_split_check(j, s, policy=ACCEL_POLICY):
    """Residual between both sides of the reciprocity split of ``I_j(s)``.

    The left side integrates the theta products numerically (the ``(0, 1)``
    half after ``w = 1/u``, with the leading singularity removed and
    integrated exactly). The right side is the pole term plus ``K``/``J``
    lattice sums.
    """
    if j not in _SPLIT_POLES:
        raise DomainError("j must be 1, 2 or 3", j=j)
    s = float(s)
    for pole in _SPLIT_POLES[j]:
        if abs(s - pole) < _SPLIT_MARGIN:
            raise PoleProximityError("too close to a pole of I_j", j=j, s=s, pole=pole)
    return abs(_split_lhs(j, s) - _split_rhs(j, s, policy))
