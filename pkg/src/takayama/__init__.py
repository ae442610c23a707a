"""Takayama poverty index: estimation, asymptotic inference, and
decomposability-gap analysis on income microdata."""

from .asymptotics import (ConfidenceInterval, KernelSet, VarianceDecomposition,
                          bridge_cell_integral, bridge_quadratic_step,
                          confidence_interval, kernel_eval,
                          representation_residual, sigma_analytic, sigma_plugin,
                          sigma2_step_quadrature)
from .decomposition import (GapEstimate, GapVariance, Subgroup, SubgroupPartition,
                            analytic_partition, decomposability_gap, gap_variance,
                            partition, recompose_global, recompose_interval)
from .distributions import (AnalyticDistribution, exponential, lognormal,
                            mixture, pareto, parse_distribution, uniform)
from .errors import DataFormatError, NumericalError, QuadratureError
from .indices import (FGT, TAKAYAMA_EMPIRICAL, TAKAYAMA_POPULATION, IndexValue,
                      fgt_index, takayama_empirical, takayama_population)
from .montecarlo import (KsNormalityResult, MixtureModel, ReplicateRecords,
                         ReplicateStudy, bootstrap_variance, draw_mixture_sample,
                         ks_normality, population_truth, run_replicates)
from .normal import kolmogorov_critical_value, normal_cdf, normal_quantile
from .quadrature import DEFAULT_QUADRATURE, QuadratureSettings, integrate
from .samples import (EmpiricalDistribution, IncomeSample, PovertyConfig,
                      build_empirical, empirical_cdf,
                      empirical_distribution_from_values, empirical_quantile,
                      poor_count, standardize)

__version__ = "0.1.0"

__all__ = [
    "AnalyticDistribution", "ConfidenceInterval", "DataFormatError",
    "DEFAULT_QUADRATURE", "EmpiricalDistribution", "FGT", "GapEstimate",
    "GapVariance", "IncomeSample", "IndexValue", "KernelSet",
    "KsNormalityResult", "MixtureModel", "NumericalError", "PovertyConfig",
    "QuadratureError", "QuadratureSettings", "ReplicateRecords",
    "ReplicateStudy", "Subgroup", "SubgroupPartition", "TAKAYAMA_EMPIRICAL",
    "TAKAYAMA_POPULATION", "VarianceDecomposition", "analytic_partition",
    "bootstrap_variance", "bridge_cell_integral", "bridge_quadratic_step",
    "build_empirical", "confidence_interval", "decomposability_gap",
    "draw_mixture_sample", "empirical_cdf", "empirical_distribution_from_values",
    "empirical_quantile", "exponential", "fgt_index", "gap_variance",
    "integrate", "kernel_eval", "kolmogorov_critical_value", "ks_normality",
    "lognormal", "mixture", "normal_cdf", "normal_quantile", "pareto",
    "parse_distribution", "partition", "poor_count", "population_truth",
    "recompose_global", "recompose_interval", "representation_residual",
    "run_replicates", "sigma2_step_quadrature", "sigma_analytic",
    "sigma_plugin", "standardize", "takayama_empirical", "takayama_population",
    "uniform",
]
