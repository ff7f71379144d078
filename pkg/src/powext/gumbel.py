"""Gumbel law ``Lambda(x) = exp(-exp(-x))``: cdf, density and moments.

Raw moments come from the cumulants ``k_1 = gamma``, ``k_j = (j-1)! zeta(j)``.
Quadrature versions exist as independent checks; they use ``u = exp(-x)``,
so that ``T_{r,k} = int_0^inf (-log u)^r u^k e^{-u} du``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .quadrature import QuadratureConfig, integrate
from .specfun import EULER_GAMMA, ZETA

MAX_ORDER = 16

_ORACLE_CFG = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-13, max_subdivisions=4000)


def gumbel_cdf_pdf(x):
    """Return ``(Lambda(x), Lambda'(x))``; vectorized."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        e = np.exp(-x)
        cdf = np.exp(-e)
        # log Lambda' = -x - e^{-x}; for very negative x, e^{-x} overflows to inf
        pdf = np.where(x < -30.0, np.exp(np.minimum(-x - e, 0.0)), e * cdf)
    if cdf.ndim == 0:
        return float(cdf), float(pdf)
    return cdf, pdf


def log_gumbel_pdf(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = -x - np.exp(-x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GumbelMomentTable:
    max_order: int
    moments: tuple[float, ...]
    cumulants: tuple[float, ...]

    def __getitem__(self, r: int) -> float:
        return self.m(r)

    def m(self, r: int) -> float:
        if not 0 <= r <= self.max_order:
            raise DomainError(f"moment order {r} outside table range 0..{self.max_order}")
        return self.moments[r]

    def tilted(self, r: int, k: int) -> float:
        """``T_{r,k}`` from the moments via ``Gamma(s+1) = s Gamma(s)``."""
        if k == 0:
            return self.m(r)
        if k == 1:
            return self.m(r) - r * self.m(r - 1) if r else 1.0
        if k == 2:
            return 2.0 * self.tilted(r, 1) - (r * self.tilted(r - 1, 1) if r else 0.0)
        raise DomainError(f"tilt k must be in 0..2, got {k}")


def moment_table(R: int) -> GumbelMomentTable:
    """Moments ``m_0..m_R`` from the cumulant recursion."""
    R = int(R)
    if not 0 <= R <= MAX_ORDER:
        raise DomainError(f"R must be in 0..{MAX_ORDER}, got {R}")
    kappa = [EULER_GAMMA] + [math.factorial(j - 1) * ZETA[j] for j in range(2, R + 1)]
    m = [1.0]
    for r in range(1, R + 1):
        m.append(math.fsum(math.comb(r - 1, j) * kappa[j] * m[r - 1 - j] for j in range(r)))
    return GumbelMomentTable(max_order=R, moments=tuple(m), cumulants=tuple(kappa[:R]))


def tilted_moment(r: int, k: int, cfg: QuadratureConfig | None = None) -> float:
    """``T_{r,k} = int x^r e^{-k x} Lambda'(x) dx`` by quadrature.

    The ``u``-integral is split at ``u = 1``; the log singularity on ``(0, 1]``
    is removed by ``u = e^{-s}``.
    """
    if not (0 <= r <= MAX_ORDER and 0 <= k <= 2):
        raise DomainError(f"need 0 <= r <= {MAX_ORDER} and 0 <= k <= 2, got r={r}, k={k}")
    cfg = cfg or _ORACLE_CFG

    def inner(s):
        # u = e^{-s} on (0, 1]: du = u ds
        return s**r * np.exp(-(k + 1) * s - np.exp(-s))

    def outer(u):
        with np.errstate(divide="ignore"):
            return (-np.log(u)) ** r * u**k * np.exp(-u)

    parts = [integrate(inner, 0.0, math.inf, cfg), integrate(outer, 1.0, math.inf, cfg)]
    for p in parts:
        if not p.converged:
            raise NumericalError(
                f"tilted moment T_({r},{k}) did not converge; error bound {p.error_bound:.3g}"
            )
    return math.fsum(p.value for p in parts)


def moment_quadrature_oracle(r: int, cfg: QuadratureConfig | None = None) -> float:
    """``m_r`` by direct quadrature; independent of :func:`moment_table`."""
    return tilted_moment(r, 0, cfg)
