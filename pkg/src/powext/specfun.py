"""Standard-normal functions in the log domain, the product-log solver and constants.

Tail probabilities are carried as ``(q, log_q)`` so that callers can keep
working after ``q`` underflows. The Mills ratio ``R(z) = Q(z)/phi(z)`` is the
central quantity: ``log_q = log_phi(z) + log R(z)``, which lets callers
cancel the Gaussian exponent analytically instead of numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

EULER_GAMMA = 0.5772156649015329

# zeta(k), k = 2..16, rounded from 40-digit evaluations.
ZETA = {
    2: 1.6449340668482264,
    3: 1.2020569031595942,
    4: 1.0823232337111381,
    5: 1.03692775514337,
    6: 1.0173430619844492,
    7: 1.008349277381923,
    8: 1.0040773561979444,
    9: 1.0020083928260821,
    10: 1.000994575127818,
    11: 1.0004941886041194,
    12: 1.000246086553308,
    13: 1.0001227133475785,
    14: 1.0000612481350588,
    15: 1.000030588236307,
    16: 1.0000152822594086,
}

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)

# Above this z the scaled erfc path hands over to the asymptotic Mills series.
MILLS_SWITCH = 36.0
_MILLS_TERMS = 12


@dataclass(frozen=True)
class TailValue:
    """Upper normal tail ``q = 1 - Phi(z)`` and its natural log."""

    q: float
    log_q: float


def normal_pdf(z):
    """Standard normal density; accepts scalars or arrays."""
    z = np.asarray(z, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return float(out) if out.ndim == 0 else out


def log_normal_pdf(z):
    z = np.asarray(z, dtype=float)
    out = -0.5 * z * z - LOG_SQRT_2PI
    return float(out) if out.ndim == 0 else out


def _log_mills_asymptotic(z: np.ndarray) -> np.ndarray:
    # R(z) ~ z^-1 * sum_k (-1)^k (2k-1)!! z^-2k; at z >= 36 the terms fall
    # below 1e-30 well before the series starts to diverge.
    w = 1.0 / (z * z)
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(1, _MILLS_TERMS):
        term = -term * (2 * k - 1) * w
        total = total + term
    return np.log(total) - np.log(z)


def log_mills_ratio(z):
    """``log(Q(z)/phi(z))`` for ``z >= 0`` (vectorized).

    Uses ``erfcx`` below ``MILLS_SWITCH`` and the asymptotic series above it.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(np.isnan(z)):
        raise DomainError("log_mills_ratio requires z >= 0")
    small = z <= MILLS_SWITCH
    out = np.empty_like(z)
    zs = z[small]
    out[small] = np.log(_SQRT_HALF_PI * special.erfcx(zs / math.sqrt(2.0)))
    big = ~small
    if np.any(big):
        out[big] = _log_mills_asymptotic(z[big])
    return float(out) if out.ndim == 0 else out


def log_normal_tail(z):
    """Vectorized ``log(1 - Phi(z))`` for ``z >= 0``."""
    z = np.asarray(z, dtype=float)
    out = -0.5 * z * z - LOG_SQRT_2PI + np.asarray(log_mills_ratio(z))
    return float(out) if out.ndim == 0 else out


def normal_tail(z: float) -> TailValue:
    """Upper tail ``Q(z) = 1 - Phi(z)`` for ``z >= 0``.

    ``q`` underflows to zero near ``z = 38.5``; ``log_q`` stays finite up to
    ``z ~ 1e154``.
    """
    z = float(z)
    if not z >= 0.0:
        raise DomainError(f"normal_tail requires z >= 0, got {z!r}; use Phi(-z) = Q(z)")
    log_q = float(log_normal_tail(z))
    if z <= MILLS_SWITCH:
        q = 0.5 * math.erfc(z / math.sqrt(2.0))
    else:
        q = math.exp(log_q)
    return TailValue(q=q, log_q=log_q)


def normal_quantile_complement(q):
    """Return ``z >= 0`` with ``1 - Phi(z) = q`` for ``0 < q <= 1/2``.

    Starts from ``ndtri`` and applies two Newton steps on the log residual
    ``log_normal_tail(z) - log(q)``, whose derivative is ``-1/R(z)``.
    """
    q_arr = np.asarray(q, dtype=float)
    if np.any(~(q_arr > 0.0)) or np.any(q_arr > 0.5):
        raise DomainError("normal_quantile_complement requires 0 < q <= 1/2")
    z = np.maximum(-special.ndtri(q_arr), 0.0)
    log_target = np.log(q_arr)
    for _ in range(2):
        lm = np.asarray(log_mills_ratio(z))
        resid = (-0.5 * z * z - LOG_SQRT_2PI + lm) - log_target
        z = np.maximum(z + resid * np.exp(lm), 0.0)
    return float(z) if z.ndim == 0 else z


def product_log(a: float | None = None, *, log_a: float | None = None) -> float:
    """Principal branch of the Lambert W function for positive arguments.

    Solves ``u * exp(u) = a`` by safeguarded Newton iteration on
    ``log(u) + u - log(a)``. Pass ``log_a`` when ``a`` itself overflows.
    """
    if (a is None) == (log_a is None):
        raise TypeError("pass exactly one of a or log_a")
    if a is not None:
        a = float(a)
        if not a > 0.0:
            raise DomainError(f"product_log requires a > 0, got {a!r}")
        if math.isinf(a):
            raise DomainError("a overflows; pass log_a instead")
        la = math.log(a)
    else:
        la = float(log_a)
        if not math.isfinite(la):
            raise DomainError(f"log_a must be finite, got {la!r}")

    if la < -700.0:
        return math.exp(la)  # W(a) = a(1 - a + ...) and a < 1e-304
    # residual log(u) + u - la is increasing and concave; keep a bracket.
    if la <= 1.0:
        a_ = math.exp(la)
        lo, hi = a_ / math.e, min(a_, 1.0)
        u = a_ / (1.0 + a_)
    else:
        lo, hi = la - math.log(la), la
        u = lo + 0.5 * math.log(la) / la
    if not lo <= u <= hi:
        u = 0.5 * (lo + hi)
    for _ in range(100):
        r = math.log(u) + u - la
        if r == 0.0:
            return u
        if r > 0.0:
            hi = u
        else:
            lo = u
        new = u - r * u / (1.0 + u)
        if not lo <= new <= hi:
            new = 0.5 * (lo + hi)
        if abs(new - u) <= 2e-16 * new:
            return new
        u = new
    return u
