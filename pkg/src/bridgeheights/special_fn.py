"""Scalar special functions: Jacobi theta, incomplete gamma and Riemann xi.

The theta function used throughout the package is

    theta(u) = sum_{n in Z} exp(-pi n^2 u),   u > 0,

together with its first two derivatives in ``u``. For ``u < 1`` the
reciprocity law ``theta(u) = u**-0.5 * theta(1/u)`` is applied before
summing, so every summed series decays at least like ``exp(-pi n^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, TruncationError

__all__ = [
    "TruncationPolicy",
    "SeriesValue",
    "DEFAULT_POLICY",
    "theta",
    "gamma_upper",
    "gamma_complete",
    "xi_riemann",
]

_FPMIN = 1e-300
_EPS = 1e-16


@dataclass(frozen=True)
class TruncationPolicy:
    """Cutoff contract for an infinite series.

    Parameters
    ----------
    abs_tol : float
        Summation stops once the magnitude of the next term falls below this.
    max_terms : int
        Hard cap on the number of terms per summation index.
    """

    abs_tol: float = 1e-15
    max_terms: int = 64

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive", abs_tol=self.abs_tol)
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError("max_terms must be a positive integer", max_terms=self.max_terms)


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class SeriesValue:
    """A series result with an a-posteriori tail estimate."""

    value: float
    err_bound: float
    terms_used: int

    def __float__(self):
        return float(self.value)


def _theta_direct(u, order, policy):
    # Returns (value, err_bound, terms_used) of sum_n (-pi n^2)^order exp(-pi n^2 u).
    total = 1.0 if order == 0 else 0.0
    prev = math.inf
    for n in range(1, policy.max_terms + 1):
        a = math.pi * n * n
        term = a**order * math.exp(-a * u)
        total += 2.0 * (-a) ** order * math.exp(-a * u)
        if term < policy.abs_tol and term <= prev:
            # Ratio of consecutive terms shrinks with n past this point.
            b = math.pi * (n + 1) ** 2
            nxt = b**order * math.exp(-b * u)
            c = math.pi * (n + 2) ** 2
            ratio = (c / b) ** order * math.exp(-(c - b) * u)
            tail = 2.0 * nxt / (1.0 - ratio) if ratio < 1.0 else 2.0 * nxt * policy.max_terms
            return total, tail, n
        prev = term
    raise TruncationError(
        "theta series did not converge within max_terms",
        partial_value=total,
        u=u,
        order=order,
        max_terms=policy.max_terms,
    )


def theta(u, order=0, policy=DEFAULT_POLICY, use_reciprocity=True):
    """Jacobi theta function ``sum_n exp(-pi n^2 u)`` or its ``order``-th derivative.

    Parameters
    ----------
    u : float
        Positive real argument.
    order : {0, 1, 2}
        Derivative order with respect to ``u``.
    policy : TruncationPolicy
    use_reciprocity : bool
        When true (default) arguments below 1 are mapped to ``1/u`` first.
        Disabling it forces plain summation, which is useful as an oracle.

    Returns
    -------
    SeriesValue
    """
    if order not in (0, 1, 2):
        raise DomainError("theta derivative order must be 0, 1 or 2", order=order)
    if not u > 0:
        raise DomainError("theta requires u > 0", u=u)
    u = float(u)
    if u >= 1.0 or not use_reciprocity:
        value, err, used = _theta_direct(u, order, policy)
        return SeriesValue(value, err, used)

    v = 1.0 / u
    parts = [_theta_direct(v, k, policy) for k in range(order + 1)]
    t = [p[0] for p in parts]
    e = [p[1] for p in parts]
    used = max(p[2] for p in parts)
    if order == 0:
        coef = (u**-0.5,)
    elif order == 1:
        coef = (-0.5 * u**-1.5, -(u**-2.5))
    else:
        coef = (0.75 * u**-2.5, 3.0 * u**-3.5, u**-4.5)
    value = sum(c * x for c, x in zip(coef, t))
    err = sum(abs(c) * x for c, x in zip(coef, e))
    return SeriesValue(value, err, used)


def gamma_complete(z):
    """Gamma function for ``z > 0``."""
    if not z > 0:
        raise DomainError("gamma_complete requires z > 0", z=z)
    return math.gamma(z)


def _gamma_upper_cf(z, p):
    # Modified Lentz evaluation of the Legendre continued fraction.
    b = p + 1.0 - z
    c = 1.0 / _FPMIN
    d = 1.0 / b if b != 0.0 else 1.0 / _FPMIN
    h = d
    for i in range(1, 2000):
        an = -i * (i - z)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-p + z * math.log(p)) * h
    raise TruncationError("incomplete gamma continued fraction did not converge", z=z, p=p)


def _gamma_lower_series(z, p):
    term = 1.0 / z
    total = term
    k = z
    for _ in range(10000):
        k += 1.0
        term *= p / k
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-p + z * math.log(p))
    raise TruncationError("incomplete gamma series did not converge", z=z, p=p)


def _gamma_upper(z, p):
    """Upper incomplete gamma for any real ``z`` and ``p > 0``.

    Non-positive ``z`` is allowed here because the analytically continued
    lattice sums need it; callers always pass ``p >= pi`` in that case.
    """
    if z <= 0.0 or p > z + 1.0 or (z < 1.0 and p >= 1.0):
        return _gamma_upper_cf(z, p)
    return math.gamma(z) - _gamma_lower_series(z, p)


def gamma_upper(z, p):
    """Upper incomplete gamma ``Gamma(z, p) = int_p^inf u^(z-1) e^(-u) du``.

    Both arguments must be positive.
    """
    if not z > 0:
        raise DomainError("gamma_upper requires z > 0", z=z)
    if not p > 0:
        raise DomainError("gamma_upper requires p > 0", p=p)
    return _gamma_upper(float(z), float(p))


XI_RANGE = (-10.0, 20.0)


def xi_riemann(s, policy=DEFAULT_POLICY):
    """Riemann xi function for real ``s`` in [-10, 20].

    Uses the termwise-integrated form of Riemann's theta integral, in which
    each term is an upper incomplete gamma value at ``pi n^2``.
    """
    s = float(s)
    if not XI_RANGE[0] <= s <= XI_RANGE[1]:
        raise DomainError("xi_riemann is implemented for s in [-10, 20]", s=s)
    pref = 0.5 * s * (s - 1.0)
    if pref == 0.0:
        return SeriesValue(0.5, 0.0, 0)
    c1 = math.pi ** (-s / 2.0)
    c2 = math.pi ** ((s - 1.0) / 2.0)
    total = 0.0
    prev = math.inf
    for n in range(1, policy.max_terms + 1):
        p = math.pi * n * n
        term = pref * (
            c1 * n ** (-s) * _gamma_upper(s / 2.0, p)
            + c2 * n ** (s - 1.0) * _gamma_upper((1.0 - s) / 2.0, p)
        )
        total += term
        mag = abs(term)
        if mag < policy.abs_tol and mag <= prev:
            # Successive terms fall at least like exp(-pi (2n+1)).
            ratio = math.exp(-math.pi * (2 * n + 1)) * ((n + 1) / n) ** (abs(s) + 2)
            return SeriesValue(0.5 + total, mag * ratio / (1.0 - ratio), n)
        prev = mag
    raise TruncationError(
        "xi series did not converge within max_terms", partial_value=0.5 + total, s=s
    )
