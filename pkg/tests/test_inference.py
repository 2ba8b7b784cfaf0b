"""Influence values, standard errors, aggregation, and cross-effect covariance."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tridiff import (
    DataError,
    NumericalError,
    UsageError,
    aggregate_group_time,
    default_dgp_spec,
    estimate_cdatt,
    estimate_datt_unadjusted,
    generate_trial,
    influence_covariance,
    standard_error_ci,
    z_value,
)
from tridiff.inference import InfluenceVector

from conftest import build_two_period_panel, four_cell_panel, spec_ss
from oracles import contrast_variance


# ---------------------------------------------------------------------------
# influence values (through the DR estimator)
# ---------------------------------------------------------------------------

def test_closed_form_contrast_variance():
    # degenerate X and a sample built so the within-arm subgroup gaps vanish
    # exactly (the symmetric CDATT=0 design): the DR influence variance must
    # match the four-cell-means contrast variance computed directly
    rng = np.random.default_rng(61)
    k = 60
    noise_g = rng.normal(0.0, 0.9, size=k)
    noise_c = rng.normal(0.0, 0.9, size=k)
    dy = np.concatenate([0.5 + noise_g, 0.5 + noise_g, 0.2 + noise_c, 0.2 + noise_c])
    d = build_two_period_panel(
        dy,
        cohorts=[2] * (2 * k) + [None] * (2 * k),
        subgroups=["s"] * k + ["sp"] * k + ["s"] * k + ["sp"] * k,
    )
    est = estimate_cdatt(d, 2, 2, spec_ss(), method="dr")
    g = ~d.never
    s = d.subgroup == "s"
    oracle_var = contrast_variance(dy, g, ~g, s, ~s)
    assert est.se**2 == pytest.approx(oracle_var, rel=1e-9)


def test_constant_dy_zero_influence():
    d = four_cell_panel(cell_dy=(3.0, 3.0, 3.0, 3.0))
    est = estimate_cdatt(d, 2, 2, spec_ss(), method="dr")
    np.testing.assert_allclose(np.asarray(est.influence), 0.0, atol=1e-10)
    assert est.se < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 99_999))
def test_influence_mean_zero_property(seed):
    data, _ = generate_trial(default_dgp_spec(n=400), seed=seed)
    est = estimate_cdatt(data, 2, 2, spec_ss(), method="dr")
    inf = np.asarray(est.influence)
    scale = max(1.0, float(np.abs(inf).max()))
    assert abs(inf.mean()) < 1e-8 * scale


def test_influence_vector_rejects_noncentered():
    with pytest.raises(NumericalError):
        InfluenceVector(
            values=np.array([1.0, 2.0, 3.0]),
            index=("a", "b", "c"),
            estimand="CDATT",
            g=2,
            t=2,
            comparison="never",
        )


# ---------------------------------------------------------------------------
# standard_error_ci
# ---------------------------------------------------------------------------

def test_se_arithmetic():
    se, ci = standard_error_ci(np.array([1.0, -1.0]), 0.95, 0.0)
    assert se == pytest.approx(math.sqrt(0.5), rel=1e-12)
    z = z_value(0.95)
    assert ci[0] == pytest.approx(-z * se, rel=1e-12)


def test_se_zero_for_zero_influence():
    se, ci = standard_error_ci(np.zeros(10), 0.95, 1.5)
    assert se == 0.0
    assert ci == (1.5, 1.5)


def test_se_needs_two_values():
    with pytest.raises(DataError):
        standard_error_ci(np.array([0.0]), 0.95, 0.0)


def test_stored_ci_reproducible_bit_for_bit():
    data, _ = generate_trial(default_dgp_spec(n=500), seed=63)
    est = estimate_cdatt(data, 2, 2, spec_ss(), method="dr")
    se, ci = standard_error_ci(np.asarray(est.influence), est.level, est.estimate)
    assert se == est.se
    assert ci == tuple(est.ci)


def test_z_values():
    assert z_value(0.95) == pytest.approx(1.959964, abs=1e-6)
    assert z_value(0.95, two_sided=False) == pytest.approx(1.644854, abs=1e-6)
    assert z_value(0.90) == pytest.approx(1.644854, abs=1e-6)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

def _two_estimates():
    d1 = four_cell_panel(n_per_cell=30, cell_dy=(1.0, 0.4, 0.3, 0.2), noise=0.7, seed=64)
    d2 = four_cell_panel(n_per_cell=45, cell_dy=(0.8, 0.2, 0.1, 0.0), noise=0.5, seed=65)
    e1 = estimate_datt_unadjusted(d1, 2, 2, spec_ss())
    e2 = estimate_datt_unadjusted(d2, 2, 2, spec_ss())
    # disjoint unit ids across the two datasets
    e2 = type(e2)(**{**e2.__dict__, "index": tuple("v" + str(i) for i in range(len(e2.index)))})
    return e1, e2


def test_single_effect_identity():
    e1, _ = _two_estimates()
    agg = aggregate_group_time([e1], [1.0])
    assert agg.estimate == pytest.approx(e1.estimate, rel=1e-12)
    assert agg.se == pytest.approx(e1.se, rel=1e-12)


def test_disjoint_equal_weights_variance():
    e1, e2 = _two_estimates()
    agg = aggregate_group_time([e1, e2], [0.5, 0.5])
    assert agg.estimate == pytest.approx(0.5 * (e1.estimate + e2.estimate), rel=1e-12)
    assert agg.se**2 == pytest.approx((e1.se**2 + e2.se**2) / 4.0, rel=1e-9)


def test_weights_must_sum_to_one():
    e1, e2 = _two_estimates()
    with pytest.raises(UsageError):
        aggregate_group_time([e1, e2], [0.5, 0.4])
    with pytest.raises(UsageError):
        aggregate_group_time([e1, e2], [1.5, -0.5])


def test_mismatched_estimands_rejected():
    e1, _ = _two_estimates()
    data, _ = generate_trial(default_dgp_spec(n=300), seed=66)
    cd = estimate_cdatt(data, 2, 2, spec_ss(), method="dr")
    with pytest.raises(UsageError):
        aggregate_group_time([e1, cd], [0.5, 0.5])


def test_shared_units_sum_before_squaring():
    # the same dataset twice with weights (0.5, 0.5) must reproduce the
    # single-effect SE exactly: influence contributions add per unit
    d = four_cell_panel(n_per_cell=30, noise=0.8, seed=67)
    e = estimate_datt_unadjusted(d, 2, 2, spec_ss())
    agg = aggregate_group_time([e, e], [0.5, 0.5])
    assert agg.estimate == pytest.approx(e.estimate, rel=1e-12)
    assert agg.se == pytest.approx(e.se, rel=1e-9)


# ---------------------------------------------------------------------------
# cross-effect covariance
# ---------------------------------------------------------------------------

def test_covariance_diagonal_is_se_squared():
    e1, e2 = _two_estimates()
    cov, index = influence_covariance([e1, e2])
    assert cov.shape == (2, 2)
    assert cov[0, 0] == pytest.approx(e1.se**2, rel=1e-9)
    assert cov[1, 1] == pytest.approx(e2.se**2, rel=1e-9)
    assert len(index) == len(e1.index) + len(e2.index)


def test_covariance_disjoint_samples_zero():
    e1, e2 = _two_estimates()
    cov, _ = influence_covariance([e1, e2])
    assert cov[0, 1] == 0.0
    assert cov[1, 0] == 0.0


def test_covariance_same_effect_full():
    e1, _ = _two_estimates()
    cov, _ = influence_covariance([e1, e1])
    assert cov[0, 1] == pytest.approx(cov[0, 0], rel=1e-12)


def test_covariance_needs_influence():
    with pytest.raises(UsageError):
        influence_covariance([])
