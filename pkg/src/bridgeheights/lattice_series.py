"""Sums over the punctured lattice Z^2 \\ {(0, 0)}.

``Z(alpha, beta; gamma) = sum n1^alpha n2^beta / (n1^2 + n2^2)^gamma`` is
summed directly over square shells ``max(|n1|, |n2|) = R``. Its
gamma-weighted form ``Z~_a(b) = Gamma(a + 2b) Z(2b, 2b; a + 2b)`` can also be
continued to every real ``a`` except the poles, by splitting a theta
integral at ``u = 1`` and mapping ``[0, 1]`` onto ``[1, inf)`` with theta
reciprocity. Every remaining ``[1, inf)`` integral becomes a fast lattice sum
of upper incomplete gamma values (see :func:`theta_product_integral`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .errors import DomainError, PoleProximityError, TruncationError
from .special_fn import TruncationPolicy, _gamma_upper, gamma_complete

__all__ = [
    "DoubleSeriesParams",
    "LatticeSumResult",
    "LATTICE_POLICY",
    "ACCEL_POLICY",
    "z_direct",
    "z_shell_contributions",
    "z_tilde",
    "i_kernel",
    "theta_product_integral",
    "POLE_GUARD",
]

# Direct shell sums converge algebraically, so they get their own cap.
LATTICE_POLICY = TruncationPolicy(abs_tol=1e-13, max_terms=5000)
# Incomplete-gamma sums: |n1|, |n2| <= 12 is far past double precision.
ACCEL_POLICY = TruncationPolicy(abs_tol=1e-17, max_terms=12)
POLE_GUARD = 1e-3
_EPS_REL = 2.2e-16

_EVEN_POWERS = (0, 2, 4, 6, 8)


@dataclass(frozen=True)
class DoubleSeriesParams:
    alpha: int
    beta: int
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if v not in _EVEN_POWERS:
                raise DomainError(f"{name} must be one of {_EVEN_POWERS}", **{name: v})

    @property
    def excess(self):
        """``2 gamma - alpha - beta - 2``; positive iff the direct sum converges."""
        return 2.0 * self.gamma - self.alpha - self.beta - 2.0


@dataclass(frozen=True)
class LatticeSumResult:
    value: float
    err_bound: float
    method: str

    def __float__(self):
        return float(self.value)


def _shell(alpha, beta, gamma, R):
    # Quadrant points of shell R with their lattice multiplicities.
    j = np.arange(R + 1, dtype=float)
    a = np.concatenate([np.full(R + 1, float(R)), j[:-1]])
    b = np.concatenate([j, np.full(R, float(R))])
    mult = np.where(a > 0, 2.0, 1.0) * np.where(b > 0, 2.0, 1.0)
    r2 = a * a + b * b
    # Symmetrised numerator keeps (alpha, beta) <-> (beta, alpha) bit-identical.
    num = 0.5 * (a**alpha * b**beta + a**beta * b**alpha)
    return float(np.sum(mult * num / r2**gamma))


def z_shell_contributions(params, n_shells):
    """Contributions of shells ``R = 1 .. n_shells`` to ``Z(alpha, beta; gamma)``."""
    return np.array(
        [_shell(params.alpha, params.beta, params.gamma, R) for R in range(1, n_shells + 1)]
    )


def _z_tail_bound(excess, R):
    # Shell R' holds 8R' points each bounded by R'^(alpha+beta-2gamma).
    return 8.0 * R ** (-excess) / excess


def _tail_estimate(c_prev, c_cur, R, excess):
    # Shell sums are edge-wise trapezoid rules, so c(R) = A R^-p + B R^-(p+2) + ...
    # with p = excess + 1. Fit A, B on the last two shells and sum the tail exactly.
    p = excess + 1.0
    x1 = c_prev * (R - 1.0) ** p
    x2 = c_cur * R**p
    B = (x1 - x2) / ((R - 1.0) ** -2 - float(R) ** -2)
    A = x2 - B * float(R) ** -2
    return A * hurwitz_zeta(p, R + 1.0) + B * hurwitz_zeta(p + 2.0, R + 1.0)


_TAIL_MIN_SHELL = 8


def z_direct(params, policy=LATTICE_POLICY, accelerate_tail=True):
    """Direct shell summation of ``Z(alpha, beta; gamma)``.

    With ``accelerate_tail`` (default) the power-law tail of the shell
    contributions is fitted and added, and summation stops once successive
    tail-corrected estimates move by less than ``policy.abs_tol``. Without
    it, summation stops when a shell contributes less than ``policy.abs_tol``
    and the error bound compares the remaining shells with an integral.
    """
    if params.excess <= 0:
        raise DomainError(
            "Z(alpha, beta; gamma) diverges unless 2*gamma - alpha - beta > 2",
            alpha=params.alpha,
            beta=params.beta,
            gamma=params.gamma,
        )
    total = 0.0
    prev_contrib = prev_est = None
    for R in range(1, policy.max_terms + 1):
        contrib = _shell(params.alpha, params.beta, params.gamma, R)
        total += contrib
        if abs(contrib) < policy.abs_tol:
            return LatticeSumResult(total, _z_tail_bound(params.excess, R), "direct")
        if accelerate_tail and R >= _TAIL_MIN_SHELL:
            est = total + _tail_estimate(prev_contrib, contrib, R, params.excess)
            if prev_est is not None and abs(est - prev_est) < policy.abs_tol:
                # Corrected estimates converge like R^-(excess+4); bound the rest of the moves.
                err = 2.0 * abs(est - prev_est) * R / (params.excess + 3.0)
                return LatticeSumResult(est, max(err, 4.0 * _EPS_REL * abs(est)), "direct")
            prev_est = est
        prev_contrib = contrib
    raise TruncationError(
        "shell cap exceeded in direct lattice sum",
        partial_value=total,
        shells=policy.max_terms,
        err_bound=_z_tail_bound(params.excess, policy.max_terms),
    )


def theta_product_integral(p, q, c, policy=ACCEL_POLICY):
    """``int_1^inf u^(c-1) [theta^(p)(u) theta^(q)(u) - [p = q = 0]] du``.

    Expanding both thetas gives a lattice sum whose terms are
    ``(-pi n1^2)^p (-pi n2^2)^q (pi r^2)^(-c) Gamma(c, pi r^2)``; it converges
    for every real ``c``.

    Returns
    -------
    LatticeSumResult
    """
    total = 0.0
    for R in range(1, policy.max_terms + 1):
        shell = 0.0
        pts = [(R, j) for j in range(R + 1)] + [(j, R) for j in range(R)]
        for n1, n2 in pts:
            if (p and n1 == 0) or (q and n2 == 0):
                continue
            mult = (2 if n1 else 1) * (2 if n2 else 1)
            x = math.pi * (n1 * n1 + n2 * n2)
            w = (-math.pi * n1 * n1) ** p * (-math.pi * n2 * n2) ** q
            shell += mult * w * x ** (-c) * _gamma_upper(c, x)
        total += shell
        if R >= 2 and abs(shell) < policy.abs_tol:
            return LatticeSumResult(total, abs(shell), "gamma_accelerated")
    # By the last admissible shell exp(-pi R^2) has vanished; report as converged.
    if abs(shell) <= 1e-300 or abs(shell) < policy.abs_tol * max(1.0, abs(total)):
        return LatticeSumResult(total, abs(shell), "gamma_accelerated")
    raise TruncationError(
        "incomplete-gamma lattice sum did not converge", partial_value=total, p=p, q=q, c=c
    )


def _check_pole(s):
    for pole in (0.0, 2.0):
        if abs(s - pole) < POLE_GUARD:
            raise PoleProximityError(
                "evaluation too close to a pole of the continued lattice sum", s=s, pole=pole
            )


def _split_integral(b, s, policy):
    """Continued ``I_{b+1}(s) = int_0^inf u^(s/2+2b-1) [(theta^(b))^2 - [b=0]] du``.

    The ``[0, 1]`` half is rewritten on ``[1, inf)`` through reciprocity; the
    rational terms are what is left of the small-``u`` singularity.
    """

    def tpi(p, q, c):
        r = theta_product_integral(p, q, c, policy)
        return r.value, r.err_bound

    if b == 0:
        parts = [(1.0, tpi(0, 0, s / 2.0)), (1.0, tpi(0, 0, 1.0 - s / 2.0))]
        pole = -2.0 / s + 2.0 / (s - 2.0)
    elif b == 1:
        parts = [
            (1.0, tpi(1, 1, s / 2.0 + 2.0)),
            (1.0, tpi(0, 1, 2.0 - s / 2.0)),
            (1.0, tpi(1, 1, 3.0 - s / 2.0)),
            (0.25, tpi(0, 0, 1.0 - s / 2.0)),
        ]
        pole = 1.0 / (2.0 * (s - 2.0))
    elif b == 2:
        parts = [
            (1.0, tpi(2, 2, s / 2.0 + 4.0)),
            (1.0, tpi(2, 2, 5.0 - s / 2.0)),
            (6.0, tpi(1, 2, 4.0 - s / 2.0)),
            (1.5, tpi(0, 2, 3.0 - s / 2.0)),
            (4.5, tpi(0, 1, 2.0 - s / 2.0)),
            (9.0, tpi(1, 1, 3.0 - s / 2.0)),
            (9.0 / 16.0, tpi(0, 0, 1.0 - s / 2.0)),
        ]
        pole = 9.0 / (8.0 * (s - 2.0))
    else:
        raise DomainError("b must be 0, 1 or 2", b=b)
    value = pole + sum(w * v for w, (v, _) in parts)
    err = sum(abs(w) * e for w, (_, e) in parts)
    return value, err


def z_tilde(a, b, method="gamma_accelerated", policy=None):
    """``Z~_a(b) = Gamma(a + 2b) Z(2b, 2b; a + 2b)``.

    Parameters
    ----------
    a : float
    b : {0, 1, 2}
    method : {"gamma_accelerated", "direct"}
        ``direct`` needs ``a > 1``. The accelerated route works for all real
        ``a`` except within ``POLE_GUARD`` of ``2a in {0, 2}``.
    """
    if b not in (0, 1, 2):
        raise DomainError("b must be 0, 1 or 2", b=b)
    a = float(a)
    if method == "direct":
        if not a > 1.0:
            raise DomainError("direct Z~_a(b) needs a > 1", a=a, b=b)
        g = gamma_complete(a + 2 * b)
        z = z_direct(DoubleSeriesParams(2 * b, 2 * b, a + 2 * b), policy or LATTICE_POLICY)
        return LatticeSumResult(g * z.value, g * z.err_bound, "direct")
    if method != "gamma_accelerated":
        raise DomainError("unknown method", method=method)
    s = 2.0 * a
    _check_pole(s)
    value, err = _split_integral(b, s, policy or ACCEL_POLICY)
    scale = math.pi**a
    return LatticeSumResult(scale * value, scale * err, "gamma_accelerated")


def i_kernel(s, alpha, beta, policy=LATTICE_POLICY):
    """Moment kernel ``I_s(alpha, beta)`` in closed form.

    ``I_s = 2^(-(alpha+beta+2+s)/2) Gamma((alpha+beta+s)/2) Z(alpha, beta; (alpha+beta+s)/2)``
    """
    g = (alpha + beta + s) / 2.0
    z = z_direct(DoubleSeriesParams(alpha, beta, g), policy)
    pref = 2.0 ** (-(alpha + beta + 2.0 + s) / 2.0) * gamma_complete(g)
    return pref * z.value
