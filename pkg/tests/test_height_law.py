import math

import numpy as np
import pytest
from scipy import integrate

from bridgeheights.errors import DegeneracyError, DomainError, TruncationError
from bridgeheights.height_law import (
    KernelQuery,
    a_poly,
    b_poly,
    cdf_h1,
    cdf_h2,
    density_h1,
    density_h2,
    h1_series,
    h2_series,
    kernel,
    km_limit,
    km_ratio,
)
from bridgeheights.special_fn import TruncationPolicy

GRID = np.round(np.arange(0.3, 4.0001, 0.1), 10)


def _integrate(fn, weight=lambda h: 1.0):
    f = lambda h: weight(h) * fn(h)
    pieces = [0.05, 0.3, 1.0, 2.0, 8.0]
    return sum(
        integrate.quad(f, a, b, epsabs=1e-12, epsrel=1e-11, limit=200)[0]
        for a, b in zip(pieces[:-1], pieces[1:])
    )


def test_cdf_limit_large_h():
    assert cdf_h1(10.0).cdf == 1.0
    assert cdf_h2(10.0).cdf == 1.0


def test_density_h1_normalised_and_mean():
    d = lambda h: density_h1(h).density
    assert _integrate(d) == pytest.approx(1.0, abs=1e-8)
    assert _integrate(d, lambda h: h) == pytest.approx(1.253314, abs=1e-6)


def test_density_h2_normalised_and_second_moment():
    d = lambda h: density_h2(h).density
    assert _integrate(d) == pytest.approx(1.0, abs=1e-8)
    assert _integrate(d, lambda h: h * h) == pytest.approx(3.395156, abs=1e-6)


def test_cdf_monotone_and_bounded():
    for fn in (cdf_h1, cdf_h2):
        pts = [fn(h) for h in GRID]
        for a, b in zip(pts, pts[1:]):
            assert b.cdf >= a.cdf - 2.0 * (a.err_bound + b.err_bound)
        for p in pts:
            assert -p.err_bound <= p.cdf <= 1.0 + p.err_bound
            assert p.density >= -p.err_bound


def test_stochastic_ordering():
    for h in GRID:
        a, b = cdf_h2(h), cdf_h1(h)
        assert a.cdf <= b.cdf + a.err_bound + b.err_bound


@pytest.mark.parametrize("h", [0.8, 1.2, 2.0])
def test_density_is_cdf_derivative(h):
    d = 1e-5
    fd = (cdf_h2(h + d).cdf - cdf_h2(h - d).cdf) / (2 * d)
    assert fd == pytest.approx(density_h2(h).density, abs=1e-6)
    fd1 = (cdf_h1(h + d).cdf - cdf_h1(h - d).cdf) / (2 * d)
    assert fd1 == pytest.approx(density_h1(h).density, abs=1e-6)


@pytest.mark.parametrize("h,n1,n2", [(0.7, 1, 2), (1.3, 2, 1), (0.4, 3, 0), (2.0, 1, 1)])
def test_termwise_derivative_gives_b(h, n1, n2):
    # d/dh of the symmetrised CDF term reproduces the symmetrised density term.
    def term(hh):
        w = math.exp(-2.0 * hh * hh * (n1 * n1 + n2 * n2))
        return 0.5 * w * (a_poly(hh, n1, n2) + a_poly(hh, n2, n1))

    d = 1e-6
    fd = (term(h + d) - term(h - d)) / (2 * d)
    w = math.exp(-2.0 * h * h * (n1 * n1 + n2 * n2))
    exact = 0.5 * w * (b_poly(h, n1, n2) + b_poly(h, n2, n1))
    assert fd == pytest.approx(exact, rel=1e-7, abs=1e-9)


def test_a_poly_origin():
    assert a_poly(1.3, 0, 0) == 1.0


def test_vectorised_matches_pointwise():
    hs = np.array([0.5, 1.0, 2.5])
    c1, d1 = h1_series(hs)
    c2, d2 = h2_series(hs)
    for i, h in enumerate(hs):
        assert c1[i] == pytest.approx(cdf_h1(h).cdf, abs=1e-15)
        assert d2[i] == pytest.approx(density_h2(h).density, abs=1e-14)


def test_domain_and_truncation():
    with pytest.raises(DomainError):
        cdf_h1(0.0)
    with pytest.raises(TruncationError):
        cdf_h2(0.01, TruncationPolicy(1e-40, 5))


def test_wall_kernel_vanishes_at_origin():
    assert kernel(KernelQuery(1.0, 0.7, 0.0), "absorbed_wall") == 0.0


def test_strip_kernel_tends_to_wall_kernel():
    q = KernelQuery(1.0, 0.8, 1.3, 50.0)
    assert kernel(q, "absorbed_strip") == pytest.approx(kernel(q, "absorbed_wall"), abs=1e-12)


def test_wall_kernel_matches_images():
    q = KernelQuery(0.7, 0.4, 1.1)
    free = kernel(q, "free")
    mirror = kernel(KernelQuery(0.7, -0.4, 1.1), "free")
    assert kernel(q, "absorbed_wall") == pytest.approx(free - mirror, rel=1e-13)


def test_strip_kernel_subprobability():
    x, h = 0.5, 2.0
    mass, _ = integrate.quad(lambda y: kernel(KernelQuery(1.0, x, y, h), "absorbed_strip"), 1e-12, h - 1e-12)
    assert 0.0 < mass <= 1.0


def test_kernel_domain():
    with pytest.raises(DomainError):
        kernel(KernelQuery(1.0, 0.5, 2.5, 2.0), "absorbed_strip")
    with pytest.raises(DomainError):
        kernel(KernelQuery(0.0, 0.5, 0.5), "free")


@pytest.mark.parametrize("h", [1.5, 2.0, 3.0])
def test_km_limit(h):
    val, raw = km_limit(h)
    assert abs(val - cdf_h2(h).cdf) <= 1e-4
    assert len(raw) == 3


def test_km_ratio_small_eps():
    assert abs(km_ratio(2.0, 1e-3) - cdf_h2(2.0).cdf) <= 1e-4


def test_km_ratio_wide_strip():
    assert km_ratio(40.0, 0.05) == pytest.approx(1.0, abs=1e-12)


def test_km_ratio_guards():
    with pytest.raises(DomainError):
        km_ratio(1.0, 0.6)
    with pytest.raises(DegeneracyError):
        km_ratio(2.0, 1e-80)
