#!/usr/bin/env python3
"""
Testes do núcleo de funções especiais

O oráculo é a integral de contorno de Mellin-Barnes avaliada com mpmath
ao longo de uma reta vertical; como os parâmetros são reais, basta a
parte real sobre a meia-reta superior.
"""

import math

import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, special, stats

from src.errors import DomainError
from src.services.specfun import (
    LARGE_ARGUMENT, TAIL_NEGLIGIBLE, MeijerCdfArgs, MeijerPdfArgs, bessel_k, cdf_by_quadrature,
    cdf_limit, composed_cdf, erf, gamma, meijer_g_bessel, meijer_g_cdf, meijer_g_pdf,
    pdf_by_quadrature, product_tail_bound,
)

BREAKS = [mpmath.mpf(k) for k in range(0, 41)] + [mpmath.inf]


def contour_pdf(x, a, b, z):
    """G^{3,0}_{1,3}[x | z; z-1, a-1, b-1] por quadratura"""
    with mpmath.workdps(30):
        x, a, b, z = (mpmath.mpf(v) for v in (x, a, b, z))
        c = min(a, b, z) - mpmath.mpf('1.5')

        def integrand(t):
            s = mpmath.mpc(c, t)
            return mpmath.re(mpmath.gamma(a - 1 - s) * mpmath.gamma(b - 1 - s)
                             / (z - 1 - s) * mpmath.power(x, s))

        return float(mpmath.quad(integrand, BREAKS) / mpmath.pi)


def contour_cdf(x, a, b, z):
    """G^{3,1}_{2,4}[x | 1, z+1; z, a, b, 0] por quadratura"""
    with mpmath.workdps(30):
        x, a, b, z = (mpmath.mpf(v) for v in (x, a, b, z))
        lowest = min(a, b, z)
        c = max(lowest / 2, lowest - mpmath.mpf('0.5'))

        def integrand(t):
            s = mpmath.mpc(c, t)
            return mpmath.re(mpmath.gamma(a - s) * mpmath.gamma(b - s)
                             / (s * (z - s)) * mpmath.power(x, s))

        return float(mpmath.quad(integrand, BREAKS) / mpmath.pi)


def _clear_of_collisions(a, b, z, margin=1e-3):
    def near(value, nonnegative=False):
        nearest = round(value)
        return abs(value - nearest) < margin and (nearest >= 0 or not nonnegative)
    return not (near(a - b) or near(z - b, True) or near(z - a, True))


def _random_cases(count, seed=20240501):
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < count:
        a = rng.uniform(2.0, 12.0)
        b = rng.uniform(1.1, 7.0)
        z = math.exp(rng.uniform(math.log(0.5), math.log(50.0)))
        x = 10.0 ** rng.uniform(-6.0, 1.0)
        if _clear_of_collisions(a, b, z):
            cases.append((x, a, b, z))
    return cases


# ---------------------------------------------------------------------------
# Funções elementares
# ---------------------------------------------------------------------------

def test_gamma_values_and_poles():
    assert gamma(5.0) == pytest.approx(24.0)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi))
    assert gamma(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi))
    for pole in (0.0, -1.0, -7.0):
        with pytest.raises(DomainError):
            gamma(pole)
    with pytest.raises(OverflowError):
        gamma(172.0)


def test_erf_limits():
    assert erf(0.0) == 0.0
    assert erf(10.0) == pytest.approx(1.0)
    assert erf(-1.0) == pytest.approx(-erf(1.0))


def test_bessel_k_half_order_closed_form():
    for x in (0.01, 0.5, 3.0, 40.0):
        expected = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)
        assert bessel_k(0.5, x) == pytest.approx(expected, rel=1e-12)
        assert bessel_k(-0.5, x) == pytest.approx(expected, rel=1e-12)


def test_bessel_k_domain():
    with pytest.raises(DomainError):
        bessel_k(1.0, 0.0)
    with pytest.raises(DomainError):
        bessel_k(1.0, -2.0)


@pytest.mark.parametrize("x, a, b", [(0.3, 2.7, 1.2), (4.0, 5.5, 3.1), (0.02, 1.0, 3.0)])
def test_meijer_bessel_pattern_matches_scipy(x, a, b):
    expected = 2.0 * x ** ((a + b) / 2.0) * bessel_k(a - b, 2.0 * math.sqrt(x))
    assert meijer_g_bessel(x, a, b) == pytest.approx(expected, rel=1e-8)


# ---------------------------------------------------------------------------
# Meijer G
# ---------------------------------------------------------------------------

def test_argument_validation():
    with pytest.raises(DomainError):
        MeijerPdfArgs(-1.0, 3.0, 2.0, 1.5)
    with pytest.raises(DomainError):
        MeijerCdfArgs(1.0, -3.0, 2.0, 1.5)
    with pytest.raises(DomainError):
        MeijerCdfArgs(1.0, 3.0, 2.0, 0.0)


@pytest.mark.parametrize("x, a, b, z", [
    (0.05, 4.3, 2.2, 6.7),
    (1.0, 7.9, 3.4, 1.3),
    (3.7, 2.6, 1.9, 22.0),
])
def test_pdf_against_contour_oracle(x, a, b, z):
    assert meijer_g_pdf(MeijerPdfArgs(x, a, b, z)) == pytest.approx(contour_pdf(x, a, b, z), rel=1e-8)


@pytest.mark.parametrize("x, a, b, z", [
    (0.05, 4.3, 2.2, 6.7),
    (1.0, 7.9, 3.4, 1.3),
    (3.7, 2.6, 1.9, 22.0),
])
def test_cdf_against_contour_oracle(x, a, b, z):
    assert meijer_g_cdf(MeijerCdfArgs(x, a, b, z)) == pytest.approx(contour_cdf(x, a, b, z), rel=1e-8)


@pytest.mark.parametrize("x, a, b, z", [
    (0.4, 5.0, 2.0, 7.3),    # alpha - beta inteiro
    (0.4, 4.6, 2.1, 3.1),    # zeta2 - beta inteiro
    (0.4, 3.5, 1.7, 5.5),    # zeta2 - alpha inteiro
])
def test_pole_collisions_are_continuous(x, a, b, z):
    assert meijer_g_pdf(MeijerPdfArgs(x, a, b, z)) == pytest.approx(contour_pdf(x, a, b, z), rel=1e-7)
    assert meijer_g_cdf(MeijerCdfArgs(x, a, b, z)) == pytest.approx(contour_cdf(x, a, b, z), rel=1e-7)


def test_cdf_derivative_is_pdf():
    a, b, z = 4.4, 2.3, 5.1
    for x in (0.1, 1.0, 6.0):
        step = 1e-5 * x
        upper = meijer_g_cdf(MeijerCdfArgs(x + step, a, b, z))
        lower = meijer_g_cdf(MeijerCdfArgs(x - step, a, b, z))
        assert (upper - lower) / (2 * step) == pytest.approx(meijer_g_pdf(MeijerPdfArgs(x, a, b, z)), rel=1e-6)


def test_cdf_tends_to_limit():
    a, b, z = 3.3, 1.6, 2.4
    limit = cdf_limit(a, b, z)
    assert limit == pytest.approx(math.gamma(a) * math.gamma(b) / z)
    assert meijer_g_cdf(MeijerCdfArgs(2000.0, a, b, z)) == pytest.approx(limit, rel=1e-8)
    assert meijer_g_cdf(MeijerCdfArgs(0.0, a, b, z)) == 0.0


def test_composed_cdf_is_monotone_distribution():
    xs = np.logspace(-4, 3, 29)
    values = [composed_cdf(x, 6.1, 2.7, 9.4) for x in xs]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert np.all(np.diff(values) >= -1e-14)
    assert values[-1] == pytest.approx(1.0, abs=1e-9)


def test_pdf_at_origin():
    assert meijer_g_pdf(MeijerPdfArgs(0.0, 4.0, 2.5, 0.8)) == math.inf
    assert meijer_g_pdf(MeijerPdfArgs(0.0, 4.0, 2.5, 3.0)) == 0.0


def test_large_argument_regimes():
    assert meijer_g_pdf(MeijerPdfArgs(5e4, 3.0, 2.0, 4.5)) < 1e-150
    assert meijer_g_cdf(MeijerCdfArgs(5e4, 3.0, 2.0, 4.5)) == pytest.approx(cdf_limit(3.0, 2.0, 4.5))
    # 1e4 < x <= 50*alpha*beta: avaliado por quadratura, sem erro
    pdf = meijer_g_pdf(MeijerPdfArgs(2e4, 30.5, 30.2, 4.5))
    assert math.isfinite(pdf) and pdf >= 0.0
    assert meijer_g_cdf(MeijerCdfArgs(2e4, 30.5, 30.2, 4.5)) == cdf_limit(30.5, 30.2, 4.5)


@pytest.mark.parametrize("x, a, b, z", [
    (10.0, 4.4, 2.3, 5.1),
    (800.0, 8.0, 6.5, 12.3),
    (0.3, 3.1, 1.4, 0.7),
])
def test_quadrature_agrees_with_residue_series(x, a, b, z):
    assert pdf_by_quadrature(MeijerPdfArgs(x, a, b, z)) == pytest.approx(
        meijer_g_pdf(MeijerPdfArgs(x, a, b, z)), rel=1e-7)
    assert cdf_by_quadrature(MeijerCdfArgs(x, a, b, z)) == pytest.approx(
        meijer_g_cdf(MeijerCdfArgs(x, a, b, z)), rel=1e-7)


def test_tail_bound_dominates_the_exact_tail():
    a, b, z = 4.4, 2.3, 5.1
    limit = cdf_limit(a, b, z)
    for x in (5.0, 20.0, 60.0):
        tail = 1.0 - meijer_g_cdf(MeijerCdfArgs(x, a, b, z)) / limit
        assert tail <= product_tail_bound(x, a, b)
    assert product_tail_bound(1.1e4, 27.1, 25.2) < TAIL_NEGLIGIBLE


def test_density_is_continuous_across_the_series_switch():
    a, b, z = 27.1, 25.2, 30.0
    below = meijer_g_pdf(MeijerPdfArgs(LARGE_ARGUMENT, a, b, z))
    above = meijer_g_pdf(MeijerPdfArgs(LARGE_ARGUMENT * (1 + 1e-9), a, b, z))
    assert above == pytest.approx(below, rel=1e-6)


def test_cdf_is_monotone_on_random_parameters():
    rng = np.random.default_rng(77)
    xs = np.logspace(-3, 2, 16)
    checked = 0
    while checked < 8:
        a, b = rng.uniform(1.5, 12.0), rng.uniform(1.05, 8.0)
        z = math.exp(rng.uniform(math.log(0.6), math.log(40.0)))
        if not _clear_of_collisions(a, b, z):
            continue
        values = np.array([composed_cdf(x, a, b, z) for x in xs])
        assert np.all((values >= 0.0) & (values <= 1.0)), (a, b, z)
        assert np.all(np.diff(values) >= -1e-12), (a, b, z)
        checked += 1


@pytest.mark.parametrize("a, b, z", [
    (6.0, 3.7, 1.8),     # kappa = zeta2
    (6.0, 2.2, 5.3),     # kappa = beta
    (2.4, 5.1, 7.6),     # kappa = alpha
])
def test_density_near_origin_follows_min_exponent(a, b, z):
    kappa = min(a, b, z)
    lo, hi = 1e-7, 1e-6
    slope = (math.log(meijer_g_pdf(MeijerPdfArgs(hi, a, b, z)))
             - math.log(meijer_g_pdf(MeijerPdfArgs(lo, a, b, z)))) / math.log(hi / lo)
    assert slope == pytest.approx(kappa - 1.0, abs=2e-3)


def gamma_gamma_cdf(x, a, b):
    """P(U V <= x) com U ~ Gamma(a, 1), V ~ Gamma(b, 1)"""
    shape = stats.gamma(a)
    value, _ = integrate.quad(lambda u: shape.pdf(u) * special.gammainc(b, x / u) if u > 0 else 0.0,
                              0.0, np.inf)
    return value


def test_gamma_gamma_limit_for_negligible_pointing_error():
    a, b = 4.2, 2.3
    x = a * b
    errors = []
    for z in (100.0 * b, 400.0 * b):
        pdf_gap = z * meijer_g_pdf(MeijerPdfArgs(x, a, b, z)) / meijer_g_bessel(x, a - 1.0, b - 1.0) - 1.0
        cdf_gap = composed_cdf(x, a, b, z) - gamma_gamma_cdf(x, a, b)
        errors.append((abs(pdf_gap), abs(cdf_gap)))
    (pdf_100, cdf_100), (pdf_400, cdf_400) = errors
    assert pdf_100 < 0.05 and cdf_100 < 0.01
    assert pdf_400 < 0.5 * pdf_100
    assert cdf_400 < 0.5 * cdf_100


def test_pdf_returns_python_floats():
    values = [meijer_g_pdf(MeijerPdfArgs(x, 4.3, 2.2, 6.7)) for x in (0.1, 0.2)]
    assert all(isinstance(v, float) for v in values)
    assert_allclose(values, [contour_pdf(0.1, 4.3, 2.2, 6.7), contour_pdf(0.2, 4.3, 2.2, 6.7)], rtol=1e-8)


@pytest.mark.slow
def test_randomized_oracle_agreement():
    """200 conjuntos sorteados nas faixas fisicamente alcançáveis"""
    for x, a, b, z in _random_cases(200):
        pdf = meijer_g_pdf(MeijerPdfArgs(x, a, b, z))
        cdf = meijer_g_cdf(MeijerCdfArgs(x, a, b, z))
        assert pdf == pytest.approx(contour_pdf(x, a, b, z), rel=1e-8), (x, a, b, z)
        assert cdf == pytest.approx(contour_cdf(x, a, b, z), rel=1e-8), (x, a, b, z)
