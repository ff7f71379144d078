"""Norming constants for powered normal maxima.

With ``b`` solving ``2 pi b^2 exp(b^2) = n^2`` the normalized variable is
``x = (|M_n|^t - d) / c`` where

* ``t != 2``: ``c = t b^(t-2)``, ``d = b^t``
* ``t == 2``: ``c = 2 - 2/b^2``, ``d = b^2 - 2/b^2``.

``n`` is treated as a real number; ``log_n`` is always derived from ``b`` so
that the defining relation holds to rounding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import LOG_SQRT_2PI, product_log

NEAR_TWO_WARNING = 1e-6


@dataclass(frozen=True)
class NormingScale:
    t: float
    is_two: bool
    b: float
    log_n: float
    c: float
    d: float

    @property
    def support_left(self) -> float:
        return -self.d / self.c

    @property
    def n(self) -> float:
        """Sample size; ``inf`` when it exceeds the float range."""
        return math.exp(self.log_n) if self.log_n < 709.0 else math.inf

    @property
    def order_shift(self) -> int:
        """2 for t == 2, else 1: the first correction is ``b^(-2*order_shift)``."""
        return 2 if self.is_two else 1


def _check_t(t: float) -> float:
    t = float(t)
    if not (t > 0.0 and math.isfinite(t)):
        raise DomainError(f"power index t must be positive and finite, got {t!r}")
    gap = abs(t - 2.0)
    if 0.0 < gap < NEAR_TWO_WARNING:
        warnings.warn(
            f"t = {t!r} is within {NEAR_TWO_WARNING:g} of 2 but uses the t != 2 branch; "
            "the two expansion families do not connect continuously",
            RuntimeWarning,
            stacklevel=3,
        )
    return t


def _build(t: float, b: float) -> NormingScale:
    is_two = t == 2.0
    if is_two:
        c = 2.0 - 2.0 / (b * b)
        d = b * b - 2.0 / (b * b)
    else:
        c = t * b ** (t - 2.0)
        d = b**t
    if not c > 0.0:
        raise DomainError(f"scale constant c = {c!r} is not positive (b = {b!r}, t = {t!r})")
    log_n = 0.5 * b * b + math.log(b) + LOG_SQRT_2PI
    return NormingScale(t=t, is_two=is_two, b=b, log_n=log_n, c=c, d=d)


def scale_from_n(t: float, n: float | None = None, *, log_n: float | None = None) -> NormingScale:
    """Norming for sample size ``n`` (or ``log_n`` for astronomically large n)."""
    t = _check_t(t)
    if (n is None) == (log_n is None):
        raise TypeError("pass exactly one of n or log_n")
    if n is not None:
        n = float(n)
        if not n > 3.0:
            raise DomainError(f"sample size must exceed 3, got {n!r}")
        log_n = math.log(n)
    elif not log_n > math.log(3.0):
        raise DomainError(f"log_n must exceed log 3, got {log_n!r}")
    # b^2 e^{b^2} = n^2 / (2 pi)
    u = product_log(log_a=2.0 * log_n - math.log(2.0 * math.pi))
    return _build(t, math.sqrt(u))


def scale_from_b(t: float, b: float) -> NormingScale:
    t = _check_t(t)
    b = float(b)
    if not (b > 1.0 and math.isfinite(b)):
        raise DomainError(f"b must exceed 1, got {b!r}")
    return _build(t, b)


def _check_support(s: NormingScale, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~(s.c * x + s.d > 0.0)):
        raise DomainError(
            f"x must exceed the support bound -d/c = {s.support_left!r} (t={s.t!r}, b={s.b!r})"
        )
    return x


def offset_of_x(s: NormingScale, x):
    """``z_n(x) - b`` computed without cancellation."""
    x = _check_support(s, x)
    b = s.b
    if s.is_two:
        w = s.c * x - 2.0 / (b * b)  # z^2 - b^2
        out = w / (np.sqrt(b * b + w) + b)
    else:
        out = b * np.expm1(np.log1p(s.t * x / (b * b)) / s.t)
    return float(out) if out.ndim == 0 else out


def x_of_offset(s: NormingScale, v):
    """Inverse of :func:`offset_of_x`: ``x`` for ``z_n = b + v`` (vectorized)."""
    v = np.asarray(v, dtype=float)
    b = s.b
    if s.is_two:
        out = (v * (2.0 * b + v) + 2.0 / (b * b)) / s.c
    else:
        out = b * b * np.expm1(s.t * np.log1p(v / b)) / s.t
    return float(out) if out.ndim == 0 else out


def z_of_x(s: NormingScale, x):
    """``z_n = (c x + d)^(1/t)``."""
    out = s.b + np.asarray(offset_of_x(s, x))
    return float(out) if out.ndim == 0 else out


def log_intensity_offset(s: NormingScale, v):
    """``log C_n`` as a function of the offset ``v = z_n - b``.

    ``log n + log phi(b + v) = log b - b v - v^2/2`` exactly, because ``log_n``
    is derived from ``b``.
    """
    v = np.asarray(v, dtype=float)
    b, t = s.b, s.t
    z = b + v
    # dz/dx = (c/t) (c x + d)^(1/t - 1) = (c/t) z^(1 - t)
    with np.errstate(divide="ignore"):
        log_z = np.log(z)
    out = math.log(b) - b * v - 0.5 * v * v + math.log(s.c / t) + (1.0 - t) * log_z
    return float(out) if out.ndim == 0 else out


def log_intensity(s: NormingScale, x):
    """``log C_n(x)`` with ``C_n(x) = n phi(z_n) dz_n/dx``."""
    return log_intensity_offset(s, offset_of_x(s, x))
