"""Analytic reference distributions with closed-form CDF/quantile/mean.

Shipped families: uniform, exponential, lognormal, Pareto, and finite
mixtures.  Every family exposes an increasing CDF together with its exact
inverse, so population functionals can be evaluated by quadrature in
quantile space without densities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf, erfinv


@dataclass(frozen=True, eq=False)
class AnalyticDistribution:
    """A distribution given by its CDF, exact quantile function, and mean.

    support is the closed interval carrying all mass (upper end may be
    inf).  second_moment is E[X^2] when known in closed form; population
    variance formulas fall back to quadrature when it is None.
    """
    cdf: Callable[[np.ndarray], np.ndarray]
    quantile: Callable[[np.ndarray], np.ndarray]
    mean: float
    identifier: str
    support: Tuple[float, float] = (0.0, math.inf)
    second_moment: Optional[float] = None

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError(f"distribution mean must be positive, got {self.mean}")


def uniform(a: float, b: float) -> AnalyticDistribution:
    if not 0 <= a < b:
        raise ValueError(f"uniform needs 0 <= a < b, got ({a}, {b})")
    width = b - a

    def cdf(x):
        return np.clip((np.asarray(x, dtype=float) - a) / width, 0.0, 1.0)

    def quantile(s):
        return a + np.asarray(s, dtype=float) * width

    return AnalyticDistribution(cdf, quantile, (a + b) / 2.0, f"uniform({a:g},{b:g})",
                                support=(a, b),
                                second_moment=(a * a + a * b + b * b) / 3.0)


def exponential(rate: float) -> AnalyticDistribution:
    if not rate > 0:
        raise ValueError(f"exponential rate must be positive, got {rate}")

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-rate * np.maximum(x, 0.0)), 0.0)

    def quantile(s):
        return -np.log1p(-np.asarray(s, dtype=float)) / rate

    return AnalyticDistribution(cdf, quantile, 1.0 / rate, f"exponential({rate:g})",
                                support=(0.0, math.inf),
                                second_moment=2.0 / (rate * rate))


def lognormal(mu: float, sigma: float) -> AnalyticDistribution:
    if not sigma > 0:
        raise ValueError(f"lognormal sigma must be positive, got {sigma}")
    root2 = math.sqrt(2.0)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(x, 1e-300)) - mu) / sigma
        return np.where(x > 0, 0.5 * (1.0 + erf(z / root2)), 0.0)

    def quantile(s):
        s = np.asarray(s, dtype=float)
        return np.exp(mu + sigma * root2 * erfinv(2.0 * s - 1.0))

    return AnalyticDistribution(cdf, quantile, math.exp(mu + 0.5 * sigma * sigma),
                                f"lognormal({mu:g},{sigma:g})",
                                support=(0.0, math.inf),
                                second_moment=math.exp(2.0 * mu + 2.0 * sigma * sigma))


def pareto(scale: float, shape: float) -> AnalyticDistribution:
    """Pareto with lower endpoint `scale` and tail index `shape` (> 1 so the
    mean exists; the second moment requires shape > 2)."""
    if not scale > 0:
        raise ValueError(f"pareto scale must be positive, got {scale}")
    if not shape > 1:
        raise ValueError(f"pareto shape must exceed 1 for a finite mean, got {shape}")

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= scale, 1.0 - (scale / np.maximum(x, scale)) ** shape, 0.0)

    def quantile(s):
        s = np.asarray(s, dtype=float)
        return scale * (1.0 - s) ** (-1.0 / shape)

    m2 = shape * scale * scale / (shape - 2.0) if shape > 2 else None
    return AnalyticDistribution(cdf, quantile, shape * scale / (shape - 1.0),
                                f"pareto({scale:g},{shape:g})",
                                support=(scale, math.inf), second_moment=m2)


def mixture(components: Sequence[AnalyticDistribution],
            weights: Sequence[float]) -> AnalyticDistribution:
    """Finite mixture sum(p_i * F_i); the quantile inverts the CDF numerically
    (bracketed bisection to ~1e-13)."""
    comps = tuple(components)
    w = np.asarray(weights, dtype=float)
    if len(comps) != w.size or len(comps) == 0:
        raise ValueError("components and weights must be non-empty and match")
    if w.min() <= 0:
        raise ValueError("mixture weights must be positive")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError(f"mixture weights must sum to 1, got {w.sum()!r}")

    def cdf(x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x, dtype=float)
        for p, comp in zip(w, comps):
            total += p * comp.cdf(x)
        return total

    def _invert_one(s: float) -> float:
        qs = [float(comp.quantile(s)) for comp in comps]
        lo, hi = min(qs), max(qs)
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            return lo
        return brentq(lambda x: float(cdf(x)) - s, lo, hi, xtol=1e-13, rtol=8.9e-16)

    def quantile(s):
        arr = np.asarray(s, dtype=float)
        if arr.ndim == 0:
            return np.float64(_invert_one(float(arr)))
        return np.array([_invert_one(v) for v in arr.ravel()]).reshape(arr.shape)

    mean = float(np.dot(w, [c.mean for c in comps]))
    m2 = None
    if all(c.second_moment is not None for c in comps):
        m2 = float(np.dot(w, [c.second_moment for c in comps]))
    lo = min(c.support[0] for c in comps)
    hi = max(c.support[1] for c in comps)
    label = "mixture(" + ", ".join(f"{p:g}*{c.identifier}" for p, c in zip(w, comps)) + ")"
    return AnalyticDistribution(cdf, quantile, mean, label, support=(lo, hi),
                                second_moment=m2)


_FAMILIES = {
    "uniform": (uniform, 2),
    "exponential": (exponential, 1),
    "lognormal": (lognormal, 2),
    "pareto": (pareto, 2),
}


def parse_distribution(spec: str) -> AnalyticDistribution:
    """Parse "family:arg1,arg2" specs, e.g. "uniform:0,1" or "exponential:1"."""
    name, _, argtext = spec.partition(":")
    name = name.strip().lower()
    if name not in _FAMILIES:
        known = ", ".join(sorted(_FAMILIES))
        raise ValueError(f"unknown distribution family {name!r} (known: {known})")
    factory, arity = _FAMILIES[name]
    try:
        args = [float(tok) for tok in argtext.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"bad numeric arguments in distribution spec {spec!r}") from exc
    if len(args) != arity:
        raise ValueError(f"{name} takes {arity} parameter(s), got {len(args)} in {spec!r}")
    return factory(*args)


__all__ = [
    "AnalyticDistribution", "uniform", "exponential", "lognormal", "pareto",
    "mixture", "parse_distribution",
]
