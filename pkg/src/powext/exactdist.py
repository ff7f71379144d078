"""Exact law of ``X = (|M_n|^t - d) / c`` for ``n`` iid standard normals.

Everything is evaluated through the offset ``v = z - b`` with ``z = (c x + d)^(1/t)``:

* ``log(n phi(z)) = log b - b v - v^2/2`` (no large cancelling terms),
* ``log(n Q(z)) = log(n phi(z)) + log R(z)`` with ``R`` the Mills ratio,
* ``n log Phi(z) = -n Q(z) * (-log1p(-Q)/Q)``.

Moments integrate over ``v``, where the density is a smooth bump near 0 and
the ``(cx+d)^(1/t-1)`` factor of the ``x``-density does not appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError
from .norming import NormingScale, log_intensity_offset, offset_of_x, x_of_offset
from .quadrature import IntegralResult, QuadratureConfig, integrate
from .specfun import log_mills_ratio

WINDOW_NATS = 60.0


@dataclass(frozen=True)
class MomentEstimate:
    r: int
    value: float
    error_bound: float
    method: Literal["quadrature", "montecarlo"]
    converged: bool = True
    std_error: float | None = None
    samples: int | None = None


def _log_nq(s: NormingScale, v: np.ndarray) -> np.ndarray:
    """``log(n Q(b + v))``."""
    b = s.b
    return math.log(b) - b * v - 0.5 * v * v + log_mills_ratio(b + v)


def _log1p_ratio(q: np.ndarray) -> np.ndarray:
    """``-log1p(-q)/q`` accurate for tiny ``q``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = -np.log1p(-q) / q
    series = 1.0 + q * (0.5 + q * (1.0 / 3.0 + q * 0.25))
    return np.where(q > 1e-4, direct, series)


def _log_powers(s: NormingScale, v: np.ndarray, power_shift: int):
    """``log Phi^(n - power_shift)(z)`` and ``log Phi^(n - power_shift)(-z)`` at ``z = b + v``."""
    log_nq = _log_nq(s, v)
    log_q = log_nq - s.log_n
    q = np.exp(log_q)
    frac = 1.0 if power_shift == 0 else -math.expm1(-s.log_n)  # (n - 1)/n
    upper = -np.exp(log_nq) * _log1p_ratio(q) * frac
    n_eff = math.exp(min(s.log_n, 700.0)) * frac
    lower = n_eff * log_q if s.log_n <= 700.0 else np.full_like(v, -np.inf)
    return upper, lower


def log_density_offset(s: NormingScale, v):
    """Log density of ``z = |M_n|`` at ``z = b + v`` (i.e. w.r.t. ``dv``)."""
    v = np.asarray(v, dtype=float)
    head = math.log(s.b) - s.b * v - 0.5 * v * v
    upper, lower = _log_powers(s, v, 1)
    return head + np.logaddexp(upper, lower)


def powered_pdf(s: NormingScale, x):
    """Density of ``(|M_n|^t - d)/c``; zero outside the support."""
    x = np.asarray(x, dtype=float)
    inside = s.c * x + s.d > 0.0
    out = np.zeros_like(x)
    if np.any(inside):
        v = np.asarray(offset_of_x(s, x[inside]))
        upper, lower = _log_powers(s, v, 1)
        out[inside] = np.exp(log_intensity_offset(s, v) + np.logaddexp(upper, lower))
    return float(out) if out.ndim == 0 else out


def powered_cdf(s: NormingScale, x):
    """``P(|M_n|^t <= c x + d) = Phi^n(z) - Phi^n(-z)``."""
    x = np.asarray(x, dtype=float)
    inside = s.c * x + s.d > 0.0
    out = np.zeros_like(x)
    if np.any(inside):
        v = np.asarray(offset_of_x(s, x[inside]))
        upper, lower = _log_powers(s, v, 0)
        # e^U - e^L with L <= U
        out[inside] = np.exp(upper) * -np.expm1(lower - upper)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _moment_window(s: NormingScale, r: int) -> tuple[list[float], float, float]:
    """Breakpoints in ``v`` covering the mass to WINDOW_NATS below the peak.

    Returns the breakpoints and log-integrand levels at the two ends (for
    tail bounds; ``-inf`` when the end is the support boundary).
    """
    b = s.b

    def ell(v):
        v = np.asarray([v], dtype=float)
        x = x_of_offset(s, v)
        return float(log_density_offset(s, v)[0] + r * np.log1p(np.abs(x))[0])

    h0 = min(1.0, 1.0 / b)
    peak = ell(0.0)
    right = [0.0]
    v = h0
    while True:
        lv = ell(v)
        peak = max(peak, lv)
        right.append(v)
        if lv < peak - WINDOW_NATS:
            break
        v *= 2.0
    level_right = lv
    left = []
    v = -h0
    level_left = -math.inf
    while v > -b:
        lv = ell(v)
        peak = max(peak, lv)
        left.append(v)
        if lv < peak - WINDOW_NATS:
            level_left = lv
            break
        v *= 2.0
    else:
        left.append(-b)
    return sorted(left) + right, level_left, level_right


def exact_moment(s: NormingScale, r: int, cfg: QuadratureConfig | None = None) -> MomentEstimate:
    """``E[((|M_n|^t - d)/c)^r]`` by quadrature in ``v = |M_n| - b``."""
    r = int(r)
    if r < 0:
        raise DomainError(f"moment order must be non-negative, got {r}")
    cfg = cfg or QuadratureConfig()
    points, level_left, level_right = _moment_window(s, r)

    def integrand(v):
        x = x_of_offset(s, v)
        return x**r * np.exp(log_density_offset(s, v))

    res: IntegralResult = integrate(integrand, points[0], points[-1], cfg, breakpoints=points[1:-1])
    b = s.b
    vr = points[-1]
    tail = 2.0 * math.exp(level_right) / (b + vr)
    if math.isfinite(level_left):
        tail += math.exp(level_left) * (points[0] + b)
    return MomentEstimate(
        r=r,
        value=res.value,
        error_bound=res.error_bound + tail,
        method="quadrature",
        converged=res.converged,
    )
