"""Correction kernels of the density expansion and the moment-limit formulas.

The kernels are coded in their stated closed form without corrections; the
``(t-2)**4 / 8`` coefficient in the ``t != 2`` branch of ``tau`` is kept.
Reconciliation with the exact law is left to :mod:`powext.convergence`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial as P

from .errors import DomainError, NumericalError
from .gumbel import GumbelMomentTable, gumbel_cdf_pdf, log_gumbel_pdf, moment_table, tilted_moment
from .quadrature import QuadratureConfig, integrate

_ORACLE_CFG = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-12, max_subdivisions=4000)
CONSISTENCY_TOL = 1e-8


@dataclass(frozen=True)
class KernelValues:
    kappa1: float
    kappa2: float
    varpi: float
    tau: float


def _kappa1(t, x):
    if t == 2.0:
        return 0.5 + x + x * x
    return x * (1.0 - t + 0.5 * (t - 2.0) * x)


def _kappa2(t, x):
    if t == 2.0:
        return -np.exp(-x) * (3.5 + 3.0 * x + x * x)
    return np.exp(-x) * (1.0 + x + 0.5 * (2.0 - t) * x * x)


def _tau(t, x):
    if t == 2.0:
        return np.exp(-x) * (43.0 / 3.0 + 14.0 * x + 6.0 * x * x + 4.0 / 3.0 * x**3)
    ex = np.exp(-x)
    a = 1.0 - t + 0.5 * (t - 2.0) * x
    g = 1.0 + x + 0.5 * (2.0 - t) * x * x
    return (
        x * ex * a * g
        + x * x * (0.5 * (1 - t) * (1 - 2 * t) + 5 * (1 - t) * (t - 2) / 6 * x + (t - 2) ** 2 / 8 * x * x)
        - ex * (3 + 3 * x + 1.5 * x * x + (2 - t) * (2 * t + 1) / 6 * x**3 + (t - 2) ** 4 / 8 * x**4)
        + 0.5 * np.exp(-2.0 * x) * g * g
    )


def kernels(t: float, x: float) -> KernelValues:
    t, x = float(t), float(x)
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t!r}")
    k1 = float(_kappa1(t, x))
    k2 = float(_kappa2(t, x))
    return KernelValues(kappa1=k1, kappa2=k2, varpi=k1 + k2, tau=float(_tau(t, x)))


def varpi_groups(t: float) -> dict[int, P]:
    """``varpi(t, x) = sum_k e^{-k x} P_k(x)``."""
    if t == 2.0:
        return {0: P([0.5, 1.0, 1.0]), 1: -P([3.5, 3.0, 1.0])}
    return {0: P([0.0, 1.0 - t, 0.5 * (t - 2.0)]), 1: P([1.0, 1.0, 0.5 * (2.0 - t)])}


def tau_groups(t: float) -> dict[int, P]:
    """``tau(t, x) = sum_k e^{-k x} P_k(x)``, assembled term by term from the printed form."""
    X = P([0.0, 1.0])
    if t == 2.0:
        return {1: P([43.0 / 3.0, 14.0, 6.0, 4.0 / 3.0])}
    a = P([1.0 - t, 0.5 * (t - 2.0)])
    g = P([1.0, 1.0, 0.5 * (2.0 - t)])
    poly0 = X * X * P([0.5 * (1 - t) * (1 - 2 * t), 5 * (1 - t) * (t - 2) / 6, (t - 2) ** 2 / 8])
    poly1 = X * a * g - P([3.0, 3.0, 1.5, (2 - t) * (2 * t + 1) / 6, (t - 2) ** 4 / 8])
    poly2 = 0.5 * g * g
    return {0: poly0, 1: poly1, 2: poly2}


def _require_order(tbl: GumbelMomentTable, needed: int) -> None:
    if tbl.max_order < needed:
        raise DomainError(f"moment table covers order {tbl.max_order}, need {needed}")


def _require_r(r: int) -> int:
    r = int(r)
    if r < 1:
        raise DomainError(f"moment order r must be a positive integer, got {r}")
    return r


def first_order_term(t: float, r: int, tbl: GumbelMomentTable | None = None) -> float:
    """Centering added inside the theorem's bracket (printed sign)."""
    r = _require_r(r)
    tbl = tbl or moment_table(r + 1)
    _require_order(tbl, r + 1)
    m = tbl.m
    if t == 2.0:
        return r * (3.5 * m(r - 1) + 3.0 * m(r) + m(r + 1))
    return r * (m(r - 1) + m(r) - 0.5 * (t - 2.0) * m(r + 1))


def theorem_rhs(t: float, r: int, tbl: GumbelMomentTable | None = None) -> float:
    """Closed-form second-order limit, in its stated form."""
    r = _require_r(r)
    tbl = tbl or moment_table(r + 4)
    _require_order(tbl, r + 4)
    m = tbl.m
    if t == 2.0:
        return math.fsum([
            -43.0 / 3.0 * r * m(r - 1),
            (1.0 / 3.0 - 14.0 * r) * m(r),
            (2.0 - 6.0 * r) * m(r + 1),
            (2.0 - 4.0 / 3.0 * r) * m(r + 2),
            4.0 / 3.0 * m(r + 3),
        ])
    return math.fsum([
        2.5 * r * m(r - 1),
        ((t + 1) * (r + 1) - 2.5) * m(r),
        ((r + 1) * t - 1) * m(r + 1),
        (5 * (2 - t) * (t - 1) * (r + 3) / 6 + (2 * t * t - 5 * t + 1) / 2) * m(r + 2),
        (t - 2) ** 2 * (r + 4) / 4 * m(r + 3),
        -((t - 2) ** 2) / 8 * m(r + 4),
    ])


def _weighted(kernel, r: int):
    def f(x):
        _, lp = gumbel_cdf_pdf(x)
        with np.errstate(over="ignore", invalid="ignore"):
            val = x**r * kernel(x) * lp
        return np.where(lp > 0.0, val, 0.0)
    return f


def _quad(f, what: str) -> float:
    res = integrate(f, -math.inf, math.inf, _ORACLE_CFG, breakpoints=(0.0,))
    if not res.converged:
        raise NumericalError(f"{what}: quadrature did not converge (error bound {res.error_bound:.3g})")
    return res.value


def _grouped_integral(groups: dict[int, P], r: int) -> float:
    terms = []
    for k, poly in groups.items():
        for j, coef in enumerate(poly.coef):
            if coef != 0.0:
                terms.append(coef * tilted_moment(r + j, k))
    return math.fsum(terms)


def tau_integral_oracle(t: float, r: int) -> float:
    """``int x^r tau(t,x) Lambda'(x) dx`` by direct quadrature, cross-checked
    against the polynomial-times-exponential decomposition."""
    r = _require_r(r)
    t = float(t)
    direct = _quad(_weighted(lambda x: _tau(t, x), r), f"tau integral (t={t}, r={r})")
    grouped = _grouped_integral(tau_groups(t), r)
    if abs(direct - grouped) > CONSISTENCY_TOL * max(1.0, abs(direct)):
        raise NumericalError(
            f"tau integral paths disagree for t={t}, r={r}: direct {direct!r}, grouped {grouped!r}"
        )
    return direct


def varpi_integral_oracle(t: float, r: int) -> float:
    """``int x^r varpi(t,x) Lambda'(x) dx`` by direct quadrature."""
    r = _require_r(r)
    t = float(t)
    return _quad(
        _weighted(lambda x: _kappa1(t, x) + _kappa2(t, x), r), f"varpi integral (t={t}, r={r})"
    )


def density_expansion(t: float, b: float, x):
    """Two-term approximation ``Lambda'(x) (1 + b^{-2-2I}(varpi + tau/b^2))``."""
    b = float(b)
    if not b > 1.0:
        raise DomainError(f"b must exceed 1, got {b!r}")
    x = np.asarray(x, dtype=float)
    shift = 4.0 if t == 2.0 else 2.0
    lp = np.exp(log_gumbel_pdf(x))
    corr = (_kappa1(t, x) + _kappa2(t, x) + _tau(t, x) / b**2) / b**shift
    out = lp * (1.0 + corr)
    return float(out) if out.ndim == 0 else out
