import math

import mpmath as mp
import numpy as np
import pytest

from powext.errors import DomainError
from powext.gumbel import (
    gumbel_cdf_pdf,
    log_gumbel_pdf,
    moment_quadrature_oracle,
    moment_table,
    tilted_moment,
)
from powext.quadrature import integrate
from powext.specfun import EULER_GAMMA, ZETA

# frozen from mpmath at 30 digits
LAMBDA_M1 = 0.065988035845312537077
M5 = 117.83940826837742425
M7 = 5019.8488726298549312
T11 = -0.42278433509846713939
T21 = 0.82368066085287938958
T32 = -3.4499650135236733653


def test_cdf_pdf_examples():
    cdf, pdf = gumbel_cdf_pdf(0.0)
    assert cdf == pytest.approx(math.exp(-1), rel=1e-15) and pdf == pytest.approx(math.exp(-1), rel=1e-15)
    cdf, _ = gumbel_cdf_pdf(-1.0)
    assert cdf == pytest.approx(LAMBDA_M1, rel=1e-14)
    assert cdf == pytest.approx(0.06598804, abs=1e-8)
    cdf, pdf = gumbel_cdf_pdf(50.0)
    assert 1 - cdf == pytest.approx(math.exp(-50), rel=1e-2) or cdf == 1.0
    assert pdf == pytest.approx(math.exp(-50), rel=1e-12)


def test_pdf_log_domain_for_very_negative_x():
    for x in (-31.0, -100.0, -700.0):
        cdf, pdf = gumbel_cdf_pdf(x)
        assert cdf == 0.0 and pdf == 0.0 and math.isfinite(log_gumbel_pdf(x))
    assert gumbel_cdf_pdf(-1e4) == (0.0, 0.0)
    # just below the switch, the density is tiny but representable
    x = -3.0
    assert gumbel_cdf_pdf(x)[1] == pytest.approx(math.exp(-x - math.exp(-x)), rel=1e-14)


def test_vectorized_ranges():
    x = np.linspace(-40, 60, 2001)
    cdf, pdf = gumbel_cdf_pdf(x)
    assert np.all((cdf >= 0) & (cdf <= 1) & (pdf >= 0) & (pdf < 1))
    assert np.all(np.diff(cdf) >= 0)
    mask = pdf > 1e-300
    np.testing.assert_allclose(np.log(pdf[mask]), log_gumbel_pdf(x[mask]), rtol=1e-12, atol=1e-12)


def test_table_invariants(table):
    assert table.moments[0] == 1.0
    assert table.m(1) == pytest.approx(EULER_GAMMA, abs=1e-14)
    assert table.m(1) == pytest.approx(0.5772156649, abs=1e-10)
    assert table.m(2) - table.m(1) ** 2 == pytest.approx(math.pi**2 / 6, abs=1e-12)
    assert table.cumulants[0] == EULER_GAMMA
    for j in range(2, 17):
        assert table.cumulants[j - 1] == math.factorial(j - 1) * ZETA[j]


def test_closed_forms(table):
    g, z3 = EULER_GAMMA, ZETA[3]
    assert table[2] == pytest.approx(g * g + math.pi**2 / 6, rel=1e-15)
    assert table[2] == pytest.approx(1.9781119907, abs=1e-10)
    assert table[3] == pytest.approx(g**3 + math.pi**2 / 2 * g + 2 * z3, rel=1e-14)
    assert table[4] == pytest.approx(g**4 + math.pi**2 * g**2 + 3 * math.pi**4 / 20 + 8 * g * z3, rel=1e-14)
    assert table[4] == pytest.approx(23.5615, abs=1e-4)
    assert table[5] == pytest.approx(M5, rel=1e-14)
    assert table[7] == pytest.approx(M7, rel=1e-14)


def test_moments_match_mpmath_gamma_derivatives(table):
    # m_r = (-1)^r Gamma^{(r)}(1)
    with mp.workdps(40):
        for r in range(0, 13):
            ref = float((-1) ** r * mp.diff(mp.gamma, 1, r))
            assert table[r] == pytest.approx(ref, rel=1e-13)


def test_recursion_vs_quadrature(table):
    for r in range(0, 13):
        q = moment_quadrature_oracle(r)
        assert abs(table[r] - q) <= 1e-9 * max(1.0, table[r])
    assert moment_quadrature_oracle(0) == pytest.approx(1.0, abs=1e-14)
    assert moment_quadrature_oracle(3) == pytest.approx(5.4449, abs=1e-4)


def test_tilted_examples():
    assert tilted_moment(0, 1) == pytest.approx(1.0, abs=1e-13)
    assert tilted_moment(1, 1) == pytest.approx(EULER_GAMMA - 1, abs=1e-13)
    assert tilted_moment(1, 1) == pytest.approx(T11, abs=1e-13)
    assert tilted_moment(2, 1) == pytest.approx(T21, abs=1e-13)
    assert tilted_moment(3, 2) == pytest.approx(T32, abs=1e-12)
    assert tilted_moment(0, 2) == pytest.approx(2.0, abs=1e-13)


def test_integration_by_parts_identity(table):
    for r in range(1, 9):
        lhs = tilted_moment(r, 1)
        rhs = moment_quadrature_oracle(r) - r * moment_quadrature_oracle(r - 1)
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))
        assert abs(table.tilted(r, 1) - lhs) <= 1e-9 * max(1.0, abs(lhs))


def test_table_tilted_matches_quadrature(table):
    for r in range(0, 9):
        for k in range(3):
            q = tilted_moment(r, k)
            assert abs(table.tilted(r, k) - q) <= 1e-9 * max(1.0, abs(q))


def test_full_line_integrals():
    pdf = lambda x: gumbel_cdf_pdf(x)[1]
    assert integrate(pdf, -math.inf, math.inf).value == pytest.approx(1.0, abs=1e-10)
    m1 = integrate(lambda x: x * pdf(x), -math.inf, math.inf).value
    assert m1 == pytest.approx(EULER_GAMMA, abs=1e-10)


def test_domain():
    with pytest.raises(DomainError):
        moment_table(17)
    with pytest.raises(DomainError):
        moment_table(-1)
    with pytest.raises(DomainError):
        tilted_moment(2, 3)
    with pytest.raises(DomainError):
        moment_table(3).m(4)
    assert moment_table(0).moments == (1.0,)
