"""Monte-Carlo moments of the normalized powered maximum.

One uniform per maximum: ``M_n = Phi^{-1}(U^{1/n})``. Uniforms come from
NumPy's PCG64 generator; the replications are cut into ``PARTITIONS`` fixed
blocks, each fed by its own child of ``SeedSequence(seed)``, and the partial
power sums are merged in block order. Output therefore depends only on
``(seed, n, t, replications)``, not on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .convergence import worker_count
from .errors import DomainError, QuantityMismatchError
from .exactdist import MomentEstimate
from .norming import NormingScale
from .specfun import normal_quantile_complement

PARTITIONS = 16
MIN_REPLICATIONS = 10_000


@dataclass(frozen=True)
class McConfig:
    n: int
    replications: int
    seed: int
    t: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise DomainError(f"Monte-Carlo sample size must be an integer, got {self.n!r}")
        if self.n < 2:
            raise DomainError(f"n must be at least 2, got {self.n}")
        if self.replications < MIN_REPLICATIONS:
            raise DomainError(f"replications must be at least {MIN_REPLICATIONS}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


def max_from_uniform(u, n: int):
    """``Phi^{-1}(u^{1/n})``, the maximum of ``n`` normals driven by one uniform."""
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise DomainError("u must lie strictly inside (0, 1)")
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    log_p = np.log(u) / n
    q = -np.expm1(log_p)  # 1 - u^{1/n}, the upper-tail probability
    upper = q <= 0.5
    out = np.empty_like(u)
    if np.any(upper):
        out[upper] = normal_quantile_complement(q[upper])
    if np.any(~upper):
        out[~upper] = -np.asarray(normal_quantile_complement(np.exp(log_p[~upper])))
    return float(out) if out.ndim == 0 else out


def _partition_sums(seed_seq: np.random.SeedSequence, size: int, cfg: McConfig,
                    s: NormingScale, r_max: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    u = rng.random(size)
    u[u == 0.0] = np.finfo(float).tiny
    m = max_from_uniform(u, cfg.n)
    x = (np.abs(m) ** cfg.t - s.d) / s.c
    sums = np.empty((r_max, 2))
    p = np.ones_like(x)
    for r in range(r_max):
        p *= x
        sums[r] = (math.fsum(p), math.fsum(p * p))
    return sums


def _sizes(total: int) -> list[int]:
    base, extra = divmod(total, PARTITIONS)
    return [base + (1 if i < extra else 0) for i in range(PARTITIONS)]


def mc_moments(cfg: McConfig, s: NormingScale, r_max: int) -> list[MomentEstimate]:
    """Sample moments ``r = 1..r_max`` with standard errors."""
    if s.t != cfg.t or abs(s.log_n - math.log(cfg.n)) > 1e-9 * max(1.0, s.log_n):
        raise QuantityMismatchError(
            f"norming (t={s.t}, n={s.n:.6g}) does not match Monte-Carlo config (t={cfg.t}, n={cfg.n})"
        )
    if r_max < 1:
        raise DomainError("r_max must be at least 1")
    children = np.random.SeedSequence(cfg.seed).spawn(PARTITIONS)
    sizes = _sizes(cfg.replications)
    with ThreadPoolExecutor(max_workers=worker_count()) as ex:
        parts = list(ex.map(lambda a: _partition_sums(a[0], a[1], cfg, s, r_max),
                            zip(children, sizes)))
    N = cfg.replications
    out = []
    for r in range(1, r_max + 1):
        s1 = math.fsum(p[r - 1, 0] for p in parts)
        s2 = math.fsum(p[r - 1, 1] for p in parts)
        mean = s1 / N
        var = max(s2 / N - mean * mean, 0.0) * N / (N - 1)
        se = math.sqrt(var / N)
        out.append(MomentEstimate(r=r, value=mean, error_bound=4.0 * se, method="montecarlo",
                                  std_error=se, samples=N))
    return out
