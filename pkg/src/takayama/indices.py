"""Empirical and population Takayama index, plus the FGT benchmark.

The empirical index is the L-statistic

    T_n = 1 + 1/n - 2 / (mu_n n^2) * sum_{j=1}^{q} (n - j + 1) X_{j,n}

over the ascending order statistics, with q the number of poor and mu_n the
full-sample mean.  Its population counterpart is

    T = 1 - (2 / mu) * integral of x (1 - F(x)) over incomes below the line,

evaluated here in quantile space so no density is required.  The FGT family
serves as the exactly decomposable benchmark.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import AnalyticDistribution
from .quadrature import DEFAULT_QUADRATURE, QuadratureSettings, integrate
from .samples import EmpiricalDistribution, PovertyConfig, poor_count

TAKAYAMA_EMPIRICAL = "takayama-empirical"
TAKAYAMA_POPULATION = "takayama-population"
FGT = "fgt"


@dataclass(frozen=True)
class IndexValue:
    value: float
    index_kind: str
    sample_size: Optional[int] = None


def takayama_empirical(dist: EmpiricalDistribution, config: PovertyConfig) -> IndexValue:
    """Evaluate T_n exactly.  With no poor the sum is empty and T_n = 1 + 1/n."""
    n = dist.size
    q = poor_count(dist, config)
    ranks = np.arange(1, q + 1, dtype=float)
    weighted = float(np.dot(n - ranks + 1.0, dist.sorted_values[:q]))
    value = 1.0 + 1.0 / n - 2.0 * weighted / (dist.mean * n * n)
    return IndexValue(value, TAKAYAMA_EMPIRICAL, n)


def takayama_population(dist: AnalyticDistribution, config: PovertyConfig,
                        quad: QuadratureSettings = DEFAULT_QUADRATURE) -> IndexValue:
    """Evaluate T by adaptive quadrature of q(s) = Q(s) (1 - s) on (0, F(Z)]."""
    s_z = float(dist.cdf(config.poverty_line))
    if s_z <= 0.0:
        return IndexValue(1.0, TAKAYAMA_POPULATION)

    def integrand(s: float) -> float:
        return float(dist.quantile(s)) * (1.0 - s)

    partial = integrate(integrand, 0.0, s_z, quad)
    return IndexValue(1.0 - 2.0 * partial / dist.mean, TAKAYAMA_POPULATION)


def fgt_index(dist: EmpiricalDistribution, config: PovertyConfig,
              alpha: float) -> IndexValue:
    """FGT poverty index: mean of ((Z - X)/Z)^alpha over the poor.

    alpha = 0 gives the headcount ratio q/n (the zeroth power of a zero gap
    counts as 1 so incomes exactly at the line are still counted poor under
    the default comparison).
    """
    if alpha < 0:
        raise ValueError(f"FGT order must be non-negative, got {alpha}")
    z = config.poverty_line
    q = poor_count(dist, config)
    if q == 0:
        return IndexValue(0.0, FGT, dist.size)
    gaps = (z - dist.sorted_values[:q]) / z
    if alpha == 0:
        total = float(q)
    else:
        total = float(np.sum(gaps ** alpha))
    return IndexValue(total / dist.size, FGT, dist.size)
