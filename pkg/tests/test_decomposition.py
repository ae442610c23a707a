import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from takayama import (ConfidenceInterval, GapVariance, IncomeSample,
                      NumericalError, PovertyConfig, QuadratureSettings,
                      Subgroup, analytic_partition, build_empirical,
                      decomposability_gap, draw_mixture_sample,
                      empirical_cdf, exponential, fgt_index, gap_variance,
                      lognormal, partition, recompose_global,
                      recompose_interval, uniform, MixtureModel)

from _oracles import gap_variance_influence_oracle

CFG1 = PovertyConfig(1.0)

labelled_samples = st.lists(
    st.tuples(st.floats(0.01, 100.0, allow_nan=False),
              st.sampled_from(["a", "b", "c"])),
    min_size=2, max_size=40)


def _sample(pairs):
    values = np.array([v for v, _ in pairs])
    labels = np.array([lab for _, lab in pairs], dtype=object)
    return IncomeSample(values, group_labels=labels)


# ---------------------------------------------------------------------------
# partitioning


def test_partition_weights_and_order():
    part = partition(_sample([(1.0, "a"), (2.0, "a"), (3.0, "b")]))
    assert part.group_count == 2
    assert [g.label for g in part.groups] == ["a", "b"]
    assert part.weights.tolist() == [2 / 3, 1 / 3]
    assert part.pooled.size == 3


def test_partition_single_label():
    part = partition(_sample([(1.0, "a"), (2.0, "a")]))
    assert part.group_count == 1
    assert part.groups[0].weight == 1.0


def test_partition_singleton_groups():
    part = partition(_sample([(1.0, "a"), (2.0, "b")]))
    assert part.group_count == 2
    assert all(g.size == 1 for g in part.groups)


def test_partition_requires_labels():
    with pytest.raises(ValueError, match="labels"):
        partition(IncomeSample([1.0, 2.0]))


def test_empty_group_rejected():
    with pytest.raises(ValueError):
        Subgroup("empty", build_empirical(IncomeSample([1.0])), weight=0.0)


def test_pooled_cdf_is_weighted_mixture_of_group_cdfs(rng):
    values = rng.uniform(0.1, 3.0, 60)
    labels = rng.choice(np.array(["a", "b", "c"], dtype=object), 60)
    part = partition(IncomeSample(values, group_labels=labels))
    for x in values:
        mix = sum(g.weight * empirical_cdf(g.dist, x) for g in part.groups)
        assert empirical_cdf(part.pooled, x) == pytest.approx(mix, abs=1e-15)


# ---------------------------------------------------------------------------
# the gap


def test_gap_single_group_is_zero():
    part = partition(_sample([(0.5, "a"), (2.0, "a"), (0.7, "a")]))
    assert decomposability_gap(part, CFG1).gap == 0.0


def test_gap_identical_analytic_components():
    part = analytic_partition([("a", uniform(0.0, 1.0), 0.5),
                               ("b", uniform(0.0, 1.0), 0.5)])
    estimate = decomposability_gap(part, CFG1)
    assert estimate.population_gap == pytest.approx(0.0, abs=1e-8)


def test_gap_hand_worked_two_groups():
    # pooled (1,2,3,4) at Z=2.5: direct arithmetic of the L-statistic
    sample = _sample([(1.0, "a"), (3.0, "a"), (2.0, "b"), (4.0, "b")])
    part = partition(sample)
    estimate = decomposability_gap(part, PovertyConfig(2.5))
    pooled = 1 + 1 / 4 - 2 * (4 * 1 + 3 * 2) / (2.5 * 16)
    group_a = 1 + 1 / 2 - 2 * (2 * 1) / (2.0 * 4)
    group_b = 1 + 1 / 2 - 2 * (2 * 2) / (3.0 * 4)
    assert estimate.global_index == pytest.approx(pooled, abs=1e-15)
    assert estimate.gap == pytest.approx(pooled - (group_a + group_b) / 2, abs=1e-14)
    assert estimate.gap == pytest.approx(-1 / 6, abs=1e-12)


@given(labelled_samples, st.floats(0.1, 50.0))
def test_gap_identity_is_bit_exact(pairs, z):
    part = partition(_sample(pairs))
    estimate = decomposability_gap(part, PovertyConfig(z))
    reconstructed = estimate.global_index - float(
        np.dot(estimate.weights, estimate.local_indices))
    assert estimate.gap == reconstructed


@given(labelled_samples, st.floats(0.1, 50.0), st.sampled_from([0.0, 1.0, 2.0]))
def test_fgt_gap_vanishes_through_partition_machinery(pairs, z, alpha):
    part = partition(_sample(pairs))
    estimate = decomposability_gap(
        part, PovertyConfig(z),
        index_fn=lambda dist, cfg: fgt_index(dist, cfg, alpha).value)
    assert abs(estimate.gap) < 1e-12


def test_mixed_gap_with_sizes():
    part = analytic_partition([("a", exponential(1.0), 0.5),
                               ("b", exponential(0.5), 0.5)], sizes=[300, 100])
    estimate = decomposability_gap(part, CFG1)
    assert estimate.population_gap is not None
    assert estimate.mixed_gap is not None
    assert estimate.mixed_gap != pytest.approx(estimate.population_gap, abs=1e-6)


# ---------------------------------------------------------------------------
# gap variance: degenerate cases


def _flat(gv: GapVariance):
    return (gv.a1, gv.a2, gv.a31, gv.a32, gv.b1, gv.b2, gv.b3,
            gv.theta1_sq, gv.theta2_sq, gv.theta3_sq)


def test_gap_variance_single_group_all_zero_empirical(rng):
    labels = np.array(["g"] * 150, dtype=object)
    part = partition(IncomeSample(rng.random(150), group_labels=labels))
    assert all(abs(v) < 1e-12 for v in _flat(gap_variance(part, CFG1)))


def test_gap_variance_single_group_all_zero_analytic():
    part = analytic_partition([("g", exponential(1.0), 1.0)])
    assert all(abs(v) < 1e-10 for v in _flat(gap_variance(part, CFG1)))


def test_gap_variance_identical_groups_thetas_vanish_analytic():
    part = analytic_partition([("a", exponential(1.0), 0.5),
                               ("b", exponential(1.0), 0.5)])
    gv = gap_variance(part, CFG1, QuadratureSettings(abs_tol=1e-11))
    assert abs(gv.theta1_sq) < 1e-10
    assert abs(gv.theta2_sq) < 1e-10
    assert abs(gv.theta3_sq) < 1e-10
    # the individual bridge components do not vanish; they cancel
    assert gv.a2 > 1e-4


def test_gap_variance_identical_groups_thetas_vanish_empirical(rng):
    values = rng.uniform(0.05, 2.0, 80)
    doubled = np.concatenate([values, values])
    labels = np.array(["a"] * 80 + ["b"] * 80, dtype=object)
    part = partition(IncomeSample(doubled, group_labels=labels))
    gv = gap_variance(part, CFG1)
    assert abs(gv.theta2_sq) < 1e-12
    assert abs(gv.theta3_sq) < 1e-12


def test_gap_variance_permutation_invariant(rng):
    base = [("a", exponential(1.0), 0.25), ("b", exponential(0.5), 0.4),
            ("c", uniform(0.0, 2.0), 0.35)]
    quad = QuadratureSettings(abs_tol=1e-9)
    gv1 = gap_variance(analytic_partition(base), CFG1, quad)
    gv2 = gap_variance(analytic_partition(base[::-1]), CFG1, quad)
    assert gv1.theta1_sq == pytest.approx(gv2.theta1_sq, rel=1e-6, abs=1e-9)
    assert gv1.theta2_sq == pytest.approx(gv2.theta2_sq, rel=1e-6, abs=1e-9)
    assert gv1.theta3_sq == pytest.approx(gv2.theta3_sq, rel=1e-6, abs=1e-9)
    for name in ("a1", "a2", "a31", "a32", "b1", "b2", "b3"):
        assert getattr(gv1, name) == pytest.approx(getattr(gv2, name),
                                                   rel=1e-6, abs=1e-9)


def test_gap_variance_inconsistent_assembly_rejected():
    with pytest.raises(NumericalError, match="inconsistent"):
        GapVariance(1, 0, 0, 0, 0, 0, 0, theta1_sq=5.0, theta2_sq=0.0,
                    theta3_sq=0.0, gap_scalars=(0.0,), mean_scalars=(0.0,))
    with pytest.raises(NumericalError, match="inconsistent"):
        GapVariance(0, 0, 0, 0, 0, 0, 0, theta1_sq=0.0, theta2_sq=-1.0,
                    theta3_sq=0.0, gap_scalars=(0.0,), mean_scalars=(0.0,))


# ---------------------------------------------------------------------------
# gap variance: oracle agreement


def test_gap_variance_matches_influence_oracle_two_groups():
    groups = [exponential(1.0), exponential(0.5)]
    weights = [0.5, 0.5]
    part = analytic_partition([("0", groups[0], 0.5), ("1", groups[1], 0.5)])
    gv = gap_variance(part, CFG1)
    v_gd, v_gd0 = gap_variance_influence_oracle(groups, weights, CFG1)
    assert gv.gap_centered_total == pytest.approx(v_gd, rel=2e-4)
    assert gv.mixed_centered_total == pytest.approx(v_gd0, rel=2e-4)


def test_gap_variance_matches_influence_oracle_three_groups():
    # three distinct groups exercise the cross-pair component a32
    groups = [exponential(1.0), exponential(0.5), uniform(0.0, 2.0)]
    weights = [0.5, 0.3, 0.2]
    part = analytic_partition(list(zip("012", groups, weights)))
    gv = gap_variance(part, CFG1)
    assert abs(gv.a32) > 1e-5
    v_gd, v_gd0 = gap_variance_influence_oracle(groups, weights, CFG1)
    assert gv.gap_centered_total == pytest.approx(v_gd, rel=5e-4)
    assert gv.mixed_centered_total == pytest.approx(v_gd0, rel=5e-4)


def test_empirical_gap_variance_consistent_with_analytic(rng):
    model = MixtureModel((exponential(1.0), exponential(0.5)), (0.5, 0.5))
    sample = draw_mixture_sample(model, 40_000, rng)
    emp = gap_variance(partition(sample), CFG1)
    ana = gap_variance(model.to_partition(), CFG1)
    assert emp.gap_centered_total == pytest.approx(ana.gap_centered_total, rel=0.10)
    assert emp.theta1_sq == pytest.approx(ana.theta1_sq, rel=0.10)


def test_gap_scalar_hook():
    part = analytic_partition([("0", exponential(1.0), 0.5),
                               ("1", exponential(0.5), 0.5)])
    default = gap_variance(part, CFG1)
    hooked = gap_variance(part, CFG1, index_functional=lambda dist: 0.0)
    assert hooked.mean_scalars == pytest.approx(default.mean_scalars)
    assert hooked.gap_scalars == pytest.approx(hooked.mean_scalars)
    assert hooked.theta3_sq == pytest.approx(default.theta3_sq)


# ---------------------------------------------------------------------------
# recomposition


def test_recompose_interval_degenerate_gap():
    ci = recompose_interval(0.9111, ConfidenceInterval(0.0, 0.0, 0.95))
    assert ci.lower == ci.upper == pytest.approx(0.9111)


def test_recompose_reported_area_numbers():
    gap_ci = ConfidenceInterval(0.0203, 0.0099, 0.95)
    ci = recompose_interval(0.9111, gap_ci)
    assert ci.lower == pytest.approx(0.9215, abs=1e-12)
    assert ci.upper == pytest.approx(0.9413, abs=1e-12)


def test_recompose_global_from_partition():
    sample = _sample([(0.4, "a"), (1.5, "a"), (0.9, "b"), (2.5, "b")])
    part = partition(sample)
    gap_ci = ConfidenceInterval(0.01, 0.005, 0.95)
    estimate = decomposability_gap(part, CFG1)
    ci = recompose_global(part, gap_ci, CFG1)
    assert ci.center == pytest.approx(estimate.weighted_local_sum + 0.01, abs=1e-14)
    assert ci.half_width == 0.005
