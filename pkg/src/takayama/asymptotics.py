"""Influence kernels, the plug-in asymptotic variance, and confidence
intervals for the Takayama index.

For a distribution F with mean mu and poverty line Z, define on incomes

    ell(x) = x * 1{x poor}
    h(x)   = x * (1 - F(x)) * 1{x poor}
    g(x)   = 2 * (P(h) * x / mu^2  -  h(x) / mu)
    q(x)   = -2 * ell(x) / mu

and on the unit interval nu(s) = q(F^{-1}(s)).  The scaled index error
sqrt(n) (T_n - T) behaves like G_n(g) + beta_n(nu) where G_n is the
centered empirical mean process and beta_n is the rank-based residual
term

    beta_n = -(1/sqrt(n)) * sum_i (F_n(X_i) - F(X_i)) q(X_i),

whose limit is the integral of a Brownian bridge against nu.  The limiting
variance splits as

    sigma^2 = sigma1^2 + sigma2^2 + 2 sigma12,
    sigma1^2 = Var g(X),
    sigma2^2 = double integral of nu(s) nu(t) (min(s,t) - st),
    sigma12  = - integral of nu(s) (int_{x <= F^{-1}(s)} g dF - s E g) ds.

Note the leading minus in sigma12: it carries the sign of beta_n.  Dropping
it (an easy slip) inflates the variance by an order of magnitude; the
Monte Carlo and coverage tests pin the sign down.

The plug-in estimator replaces F by the empirical CDF and mu by the sample
mean; every integral then has a closed form over the n quantile cells and
is summed exactly below (no quadrature on the estimation path).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .distributions import AnalyticDistribution
from .errors import NumericalError
from .indices import takayama_empirical, takayama_population
from .normal import normal_quantile
from .quadrature import DEFAULT_QUADRATURE, QuadratureSettings, integrate
from .samples import (EmpiricalDistribution, PovertyConfig,
                      empirical_cdf, empirical_quantile, poor_count)

BoundDistribution = Union[EmpiricalDistribution, AnalyticDistribution]


class KernelSet:
    """The kernels ell/h/g/q/nu bound to one distribution and poverty line.

    Scalars mu, P(h) and P(g) are computed once at construction: exactly
    (sample averages) for an empirical binding, by quadrature in quantile
    space for an analytic one.  E g(X) is zero by construction; the cached
    p_g retains the numerical value as a consistency witness.
    """

    def __init__(self, source: BoundDistribution, config: PovertyConfig,
                 quad: QuadratureSettings = DEFAULT_QUADRATURE):
        self.source = source
        self.config = config
        self.poverty_line = config.poverty_line
        if isinstance(source, EmpiricalDistribution):
            self.kind = "empirical"
            self.mu = source.mean
            self._cdf = lambda x: empirical_cdf(source, x)
            self._quantile = lambda s: empirical_quantile(source, s)
            self.s_poor = poor_count(source, config) / source.size
            x = source.sorted_values
            f_at = np.searchsorted(x, x, side="right") / source.size
            h_at = x * (1.0 - f_at) * config.poor_mask(x)
            self.p_h = float(h_at.mean())
            self.p_g = float(self.g(x).mean())
        else:
            self.kind = "analytic"
            self.mu = source.mean
            self._cdf = source.cdf
            self._quantile = source.quantile
            self.s_poor = float(np.clip(source.cdf(config.poverty_line), 0.0, 1.0))
            quantile = source.quantile
            self.p_h = integrate(lambda s: float(quantile(s)) * (1.0 - s),
                                 0.0, self.s_poor, quad)
            # E g = head integral below the line + exact linear tail above it.
            head_g = integrate(lambda s: float(self.g(quantile(s))), 0.0, self.s_poor, quad)
            head_q = integrate(lambda s: float(quantile(s)), 0.0, self.s_poor, quad)
            self.p_g = head_g + (2.0 * self.p_h / self.mu ** 2) * (self.mu - head_q)

    def cdf(self, x):
        return self._cdf(x)

    def quantile(self, s):
        return self._quantile(s)

    def ell(self, x):
        """Income censored above the poverty line."""
        x = np.asarray(x, dtype=float)
        return x * self.config.poor_mask(x)

    def h(self, x):
        """Poor income weighted by the survival function 1 - F."""
        x = np.asarray(x, dtype=float)
        return x * (1.0 - np.asarray(self._cdf(x), dtype=float)) * self.config.poor_mask(x)

    def g(self, x):
        """Influence kernel of the index through the empirical mean."""
        x = np.asarray(x, dtype=float)
        return 2.0 * (self.p_h * x / self.mu ** 2 - self.h(x) / self.mu)

    def q(self, x):
        """Weight of the rank-based residual term, -2 ell(x) / mu."""
        return -2.0 * self.ell(x) / self.mu

    def nu(self, s):
        """q evaluated along the quantile function; vanishes for s > F(Z)."""
        arr = np.asarray(s, dtype=float)
        if arr.size and (arr.min() <= 0.0 or arr.max() >= 1.0):
            raise ValueError("nu argument must lie in (0, 1)")
        out = self.q(self._quantile(arr))
        return float(out) if np.isscalar(s) else out


_KERNEL_TAGS = {"ell": "ell", "h": "h", "g": "g", "q": "q", "nu": "nu"}


def kernel_eval(kernels: KernelSet, which: str, arg: float) -> float:
    """Evaluate one named kernel; `which` is one of ell/h/g/q/nu."""
    try:
        name = _KERNEL_TAGS[which]
    except KeyError:
        raise ValueError(f"unknown kernel tag {which!r}; expected one of "
                         f"{sorted(_KERNEL_TAGS)}") from None
    if name != "nu" and arg < 0:
        raise ValueError(f"kernel {which} takes a non-negative income, got {arg}")
    return float(getattr(kernels, name)(arg))


@dataclass(frozen=True)
class VarianceDecomposition:
    """sigma1^2, sigma2^2, sigma12 and the assembled total.

    The squared components are non-negative by construction.  The assembled
    total is a Gaussian variance in the limit, but the exact plug-in sums
    can dip below zero at toy sample sizes (the bridge integrals live on
    the continuous unit square while sigma1^2 averages over sample atoms,
    an O(1/n) mismatch); callers building confidence intervals should clamp
    at zero.
    """
    sigma1_sq: float
    sigma2_sq: float
    sigma12: float
    total: float

    def __post_init__(self):
        if self.sigma1_sq < -1e-9 or self.sigma2_sq < -1e-9:
            raise NumericalError(
                f"negative variance component: sigma1^2={self.sigma1_sq:.3e}, "
                f"sigma2^2={self.sigma2_sq:.3e}")

    @classmethod
    def assemble(cls, sigma1_sq: float, sigma2_sq: float,
                 sigma12: float) -> "VarianceDecomposition":
        return cls(sigma1_sq, sigma2_sq, sigma12,
                   sigma1_sq + sigma2_sq + 2.0 * sigma12)


@dataclass(frozen=True)
class ConfidenceInterval:
    center: float
    half_width: float
    level: float

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError(f"half width must be non-negative, got {self.half_width}")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def shifted(self, offset: float) -> "ConfidenceInterval":
        return ConfidenceInterval(self.center + offset, self.half_width, self.level)


def _bridge_min_antiderivative(u: float, v: float) -> float:
    # integral of min(s, t) over [0,u] x [0,v]
    w, z = (u, v) if u <= v else (v, u)
    return 0.5 * w * w * z - w ** 3 / 6.0


def bridge_cell_integral(a: float, b: float, c: float, d: float) -> float:
    """Exact integral of min(s,t) - s t over the rectangle [a,b] x [c,d].

    This is the Brownian-bridge covariance integrated in closed form; the
    diagonal split is folded into the min antiderivative.
    """
    if not (0.0 <= a <= b <= 1.0 and 0.0 <= c <= d <= 1.0):
        raise ValueError(f"rectangle [{a},{b}]x[{c},{d}] must sit inside the unit square")
    m = (_bridge_min_antiderivative(b, d) - _bridge_min_antiderivative(a, d)
         - _bridge_min_antiderivative(b, c) + _bridge_min_antiderivative(a, c))
    return m - 0.25 * (b * b - a * a) * (d * d - c * c)


def bridge_quadratic_step(step_values: np.ndarray) -> float:
    """Exact value of the double integral of w(s) w(t) (min(s,t) - st) for a
    step function w taking step_values on the uniform cell grid of [0, 1].

    Diagonal cells use the closed-form square-cell integral; off-diagonal
    cells factorize as s (1 - t), so one suffix sum gives the whole upper
    triangle and the quadratic form costs O(n)."""
    w_vals = np.asarray(step_values, dtype=float)
    n = w_vals.size
    j = np.arange(1, n + 1, dtype=float)
    cell_lo = (j - 1.0) / n
    cell_hi = j / n
    width = 1.0 / n
    cell_s = (2.0 * j - 1.0) / (2.0 * n * n)  # integral of s over each cell

    diag = (cell_hi ** 3 - cell_lo ** 3) / 3.0 - cell_lo ** 2 * width - cell_s ** 2
    tail = np.zeros(n)
    contrib = w_vals * (width - cell_s)
    tail[:-1] = np.cumsum(contrib[::-1])[::-1][1:]
    return float(np.dot(w_vals * w_vals, diag) + 2.0 * np.dot(w_vals * cell_s, tail))


def sigma_plugin(dist: EmpiricalDistribution,
                 config: PovertyConfig) -> VarianceDecomposition:
    """Plug-in variance with every integral summed exactly over the n
    quantile cells: O(n) after sorting (prefix/suffix sums)."""
    kernels = KernelSet(dist, config)
    x = dist.sorted_values
    n = dist.size
    g_at = kernels.g(x)
    p_g = float(g_at.mean())
    sigma1 = float(np.mean((g_at - p_g) ** 2))

    nu = np.where(config.poor_mask(x), -2.0 * x / dist.mean, 0.0)
    sigma2 = bridge_quadratic_step(nu)

    # sigma12: the partial-sum bracket is constant on each cell.
    j = np.arange(1, n + 1, dtype=float)
    cell_s = (2.0 * j - 1.0) / (2.0 * n * n)
    width = 1.0 / n
    last_le = np.searchsorted(x, x, side="right") - 1
    partial_g = np.cumsum(g_at)[last_le] / n
    sigma12 = -float(np.dot(nu, partial_g * width - p_g * cell_s))

    return VarianceDecomposition.assemble(sigma1, sigma2, sigma12)


def sigma_analytic(dist: AnalyticDistribution, config: PovertyConfig,
                   quad: QuadratureSettings = DEFAULT_QUADRATURE) -> VarianceDecomposition:
    """Population variance components by quadrature in quantile space.

    The cross-check path for sigma_plugin; nested integrals use a tighter
    inner tolerance.  Needs E X^2 < infinity (closed form when the
    distribution carries one, tail quadrature otherwise).
    """
    kernels = KernelSet(dist, config, quad)
    s_z = kernels.s_poor
    if s_z <= 0.0:
        return VarianceDecomposition.assemble(0.0, 0.0, 0.0)
    quantile = dist.quantile
    inner = quad.tighter()

    # sigma1^2 = E g^2 - (E g)^2, tail handled through the linear branch.
    head_g2 = integrate(lambda s: float(kernels.g(quantile(s))) ** 2, 0.0, s_z, quad)
    slope = 2.0 * kernels.p_h / kernels.mu ** 2
    if dist.second_moment is not None:
        head_q2 = integrate(lambda s: float(quantile(s)) ** 2, 0.0, s_z, inner)
        tail_g2 = slope ** 2 * (dist.second_moment - head_q2)
    else:
        tail_g2 = slope ** 2 * integrate(lambda s: float(quantile(s)) ** 2, s_z, 1.0, quad)
    sigma1 = head_g2 + tail_g2 - kernels.p_g ** 2

    def nu(s: float) -> float:
        return -2.0 * float(quantile(s)) / kernels.mu

    # sigma2^2 over the two triangles around the diagonal.
    def low_part(s: float) -> float:
        return integrate(lambda t: t * nu(t), 0.0, s, inner)

    def high_part(s: float) -> float:
        return integrate(lambda t: (1.0 - t) * nu(t), s, s_z, inner)

    sigma2 = integrate(lambda s: nu(s) * ((1.0 - s) * low_part(s) + s * high_part(s)),
                       0.0, s_z, quad)

    # sigma12 = - int nu(s) (int_0^s g(Q) dt - s E g) ds.
    def partial_g(s: float) -> float:
        return integrate(lambda t: float(kernels.g(quantile(t))), 0.0, s, inner)

    sigma12 = -integrate(lambda s: nu(s) * (partial_g(s) - s * kernels.p_g),
                         0.0, s_z, quad)

    decomposition = VarianceDecomposition.assemble(sigma1, sigma2, sigma12)
    if decomposition.total < -1e-9:
        # The population total is a Gaussian variance; a genuinely negative
        # value means the quadratures disagree beyond tolerance.
        raise NumericalError(f"negative population variance {decomposition.total:.3e}")
    return decomposition


def sigma2_step_quadrature(nu_values: np.ndarray,
                           quad: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """Numerically integrate the bridge form for a step weight on the uniform
    n-cell grid.  Independent cross-check of the exact cell sums (slow; test
    path only)."""
    nu_values = np.asarray(nu_values, dtype=float)
    n = nu_values.size
    grid = list(np.arange(1, n) / n)

    def nu_step(s: float) -> float:
        j = min(n, max(1, math.ceil(s * n)))
        return float(nu_values[j - 1])

    inner_quad = quad.tighter()

    def inner(s: float) -> float:
        return integrate(lambda t: nu_step(t) * (min(s, t) - s * t), 0.0, 1.0,
                         inner_quad, breakpoints=[*grid, s])

    return integrate(lambda s: nu_step(s) * inner(s), 0.0, 1.0, quad, breakpoints=grid)


def confidence_interval(point: float, variance: float, n: int,
                        level: float) -> ConfidenceInterval:
    """Normal interval point +- z_{(1+level)/2} sqrt(variance / n)."""
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    z = normal_quantile(0.5 * (1.0 + level))
    return ConfidenceInterval(point, z * math.sqrt(variance / n), level)


def representation_residual(values: np.ndarray, dist: AnalyticDistribution,
                            config: PovertyConfig,
                            quad: QuadratureSettings = DEFAULT_QUADRATURE,
                            kernels: Optional[KernelSet] = None,
                            population_value: Optional[float] = None) -> float:
    """sqrt(n)(T_n - T) minus its first-order expansion G_n(g) + beta_n.

    The expansion uses the true kernels of `dist`; beta_n is the exact
    rank-based sum -(1/sqrt n) sum_i (F_n(X_i) - F(X_i)) q(X_i).  The
    returned remainder should shrink (in median absolute value) as n grows.
    Pass precomputed `kernels` / `population_value` when evaluating many
    replicates from the same distribution.
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    emp = EmpiricalDistribution(x, float(x.mean()), n)
    if emp.mean == 0.0:
        raise NumericalError("degenerate sample mean")
    if kernels is None:
        kernels = KernelSet(dist, config, quad)
    if population_value is None:
        population_value = takayama_population(dist, config, quad).value
    t_n = takayama_empirical(emp, config).value

    root_n = math.sqrt(n)
    g_term = root_n * (float(kernels.g(x).mean()) - kernels.p_g)
    f_n_at = np.searchsorted(x, x, side="right") / n
    f_at = np.asarray(dist.cdf(x), dtype=float)
    beta = -float(np.dot(f_n_at - f_at, kernels.q(x))) / root_n
    return root_n * (t_n - population_value) - g_term - beta
