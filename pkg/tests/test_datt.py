"""DATT estimators: unadjusted, three-way fixed effects, RA/IPW/DR."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tridiff import (
    OverlapError,
    PanelDataset,
    RankError,
    cluster_weighted_check,
    default_dgp_spec,
    estimate_datt_3wfe,
    estimate_datt_adjusted,
    estimate_datt_unadjusted,
    generate_trial,
)

from conftest import build_two_period_panel, four_cell_panel, spec_ss
from oracles import hc1_standard_error, triple_diff_of_means


# ---------------------------------------------------------------------------
# unadjusted
# ---------------------------------------------------------------------------

def test_constant_dy_gives_zero():
    d = four_cell_panel(cell_dy=(7.0, 7.0, 7.0, 7.0))
    est = estimate_datt_unadjusted(d, 2, 2, spec_ss())
    assert est.estimate == pytest.approx(0.0, abs=1e-12)


def test_cell_means_arithmetic():
    d = four_cell_panel(cell_dy=(1.0, 0.4, 0.3, 0.2))
    est = estimate_datt_unadjusted(d, 2, 2, spec_ss())
    assert est.estimate == pytest.approx(0.5, abs=1e-12)


def test_matches_cell_mean_oracle_with_noise():
    d = four_cell_panel(cell_dy=(1.0, 0.4, 0.3, 0.2), noise=0.7, seed=44)
    est = estimate_datt_unadjusted(d, 2, 2, spec_ss())
    dy = d.y[:, 1] - d.y[:, 0]
    g = ~d.never
    s = d.subgroup == "s"
    oracle = triple_diff_of_means(dy, g, ~g, s, ~s)
    assert est.estimate == pytest.approx(oracle, abs=1e-12)


def test_antisymmetry_exact():
    d = four_cell_panel(cell_dy=(1.0, 0.4, 0.3, 0.2), noise=0.5, seed=9)
    a = estimate_datt_unadjusted(d, 2, 2, spec_ss())
    b = estimate_datt_unadjusted(d, 2, 2, spec_ss(s="sp", s_prime="s"))
    assert a.estimate == -b.estimate


def test_influence_mean_zero_and_ci():
    d = four_cell_panel(noise=0.5, seed=2)
    est = estimate_datt_unadjusted(d, 2, 2, spec_ss())
    inf = np.asarray(est.influence)
    assert abs(inf.mean()) < 1e-10
    se = np.sqrt(np.mean(inf**2) / inf.size)
    assert est.se == pytest.approx(se, rel=1e-12)


# ---------------------------------------------------------------------------
# three-way fixed effects
# ---------------------------------------------------------------------------

def test_3wfe_no_covariates_equals_unadjusted():
    d = four_cell_panel(cell_dy=(1.0, 0.4, 0.3, 0.2), noise=0.6, seed=5)
    un = estimate_datt_unadjusted(d, 2, 2, spec_ss())
    fe = estimate_datt_3wfe(d, 2, 2, spec_ss(covariates=()))
    assert fe.estimate == pytest.approx(un.estimate, abs=1e-10)


def test_3wfe_shift_invariance():
    d = four_cell_panel(noise=0.6, seed=6, x_mode="random")
    fe1 = estimate_datt_3wfe(d, 2, 2, spec_ss())
    shifted = PanelDataset.from_arrays(
        unit_id=d.unit_id,
        cohort=d.cohort,
        never=d.never,
        subgroup=d.subgroup,
        x=d.x,
        x_names=d.x_names,
        times=d.times,
        y=d.y + 100.0,
    )
    fe2 = estimate_datt_3wfe(shifted, 2, 2, spec_ss())
    assert fe2.estimate == pytest.approx(fe1.estimate, abs=1e-10)


def test_3wfe_hc1_oracle():
    # rebuild the stacked regression by hand and compare the HC1 SE
    d = four_cell_panel(n_per_cell=40, noise=0.8, seed=31, x_mode="random")
    fe = estimate_datt_3wfe(d, 2, 2, spec_ss())

    post_rows = []
    for j, t in enumerate((1, 2)):
        post = float(t == 2)
        for i in range(d.n_units):
            treated = 0.0 if d.never[i] else 1.0
            sub = 1.0 if d.subgroup[i] == "s" else 0.0
            post_rows.append(
                [
                    1.0,
                    d.x[i, 0],
                    d.x[i, 1],
                    post,
                    treated,
                    sub,
                    post * treated,
                    post * sub,
                    treated * sub,
                    post * treated * sub,
                    d.y[i, j],
                ]
            )
    arr = np.array(post_rows)
    F, y = arr[:, :-1], arr[:, -1]
    beta, *_ = np.linalg.lstsq(F, y, rcond=None)
    assert fe.estimate == pytest.approx(beta[-1], abs=1e-8)
    assert fe.se == pytest.approx(hc1_standard_error(F, y, k=9), rel=1e-6)


def test_3wfe_null_calibration():
    # no triple-interaction effect: |estimate| < 4 SE in >= 99% of trials
    hits = 0
    trials = 120
    rng = np.random.default_rng(2024)
    for _ in range(trials):
        n = 4000
        quarter = n // 4
        cohorts = [2] * (2 * quarter) + [None] * (2 * quarter)
        subgroups = (["s"] * quarter + ["sp"] * quarter) * 2
        x = rng.normal(size=n)
        # additive group effects, no triple interaction
        g = np.repeat([1.0, 1.0, 0.0, 0.0], quarter)
        s = np.tile(np.repeat([1.0, 0.0], quarter), 2)
        dy = 0.3 * g + 0.2 * s + 0.1 * x + rng.normal(size=n)
        d = build_two_period_panel(dy, cohorts, subgroups, x=x, x_names=("x1",))
        fe = estimate_datt_3wfe(d, 2, 2, spec_ss())
        if abs(fe.estimate) < 4.0 * fe.se:
            hits += 1
    assert hits / trials >= 0.99


def test_3wfe_absorbs_constant_covariate():
    d = four_cell_panel(noise=0.5, seed=8)  # x1 constant
    fe = estimate_datt_3wfe(d, 2, 2, spec_ss())
    assert fe.diagnostics["absorbed_constant_covariates"] == ["x1"]
    un = estimate_datt_unadjusted(d, 2, 2, spec_ss())
    assert fe.estimate == pytest.approx(un.estimate, abs=1e-10)


def test_3wfe_collinear_covariates_error():
    base = four_cell_panel(noise=0.5, seed=12, x_mode="random")
    x = np.column_stack([base.x[:, 0], 2.0 * base.x[:, 0]])
    d = PanelDataset.from_arrays(
        unit_id=base.unit_id,
        cohort=base.cohort,
        never=base.never,
        subgroup=base.subgroup,
        x=x,
        x_names=("x1", "x2"),
        times=base.times,
        y=base.y,
    )
    with pytest.raises(RankError):
        estimate_datt_3wfe(d, 2, 2, spec_ss())


# ---------------------------------------------------------------------------
# adjusted (RA / IPW / DR)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("method", ["ra", "ipw", "dr"])
def test_degenerate_x_collapses_to_cell_means(method):
    d = four_cell_panel(cell_dy=(1.0, 0.4, 0.3, 0.2), noise=0.4, seed=3)
    un = estimate_datt_unadjusted(d, 2, 2, spec_ss())
    adj = estimate_datt_adjusted(d, 2, 2, spec_ss(), method=method)
    assert adj.estimate == pytest.approx(un.estimate, abs=1e-8)


@pytest.mark.parametrize("method", ["ra", "ipw", "dr"])
def test_adjusted_shift_invariance(method):
    data, _ = generate_trial(default_dgp_spec(n=400), seed=15)
    a = estimate_datt_adjusted(data, 2, 2, spec_ss(), method=method)
    shifted = PanelDataset.from_arrays(
        unit_id=data.unit_id,
        cohort=data.cohort,
        never=data.never,
        subgroup=data.subgroup,
        x=data.x,
        x_names=data.x_names,
        times=data.times,
        y=data.y + 55.0,
    )
    b = estimate_datt_adjusted(shifted, 2, 2, spec_ss(), method=method)
    assert b.estimate == pytest.approx(a.estimate, abs=1e-10)


@pytest.mark.parametrize("method", ["ra", "ipw", "dr"])
def test_adjusted_antisymmetry_shared_models(method):
    data, _ = generate_trial(default_dgp_spec(n=500), seed=16)
    a = estimate_datt_adjusted(data, 2, 2, spec_ss(), method=method)
    b = estimate_datt_adjusted(data, 2, 2, spec_ss(s="sp", s_prime="s"), method=method)
    assert a.estimate == pytest.approx(-b.estimate, abs=1e-8)


def test_null_design_within_4_se():
    spec = default_dgp_spec(effect="none", n=1500)
    data, _ = generate_trial(spec, seed=77)
    for method in ("ra", "ipw", "dr"):
        est = estimate_datt_adjusted(data, 2, 2, spec_ss(), method=method)
        assert abs(est.estimate) < 4.0 * est.se


def test_influence_mean_zero_adjusted():
    data, _ = generate_trial(default_dgp_spec(n=600), seed=18)
    for method in ("ra", "ipw", "dr"):
        est = estimate_datt_adjusted(data, 2, 2, spec_ss(), method=method)
        inf = np.asarray(est.influence)
        scale = max(1.0, np.abs(inf).max())
        assert abs(inf.mean()) < 1e-8 * scale


def test_trim_hard_error_lists_count():
    # an aggressive threshold puts a few units below it: hard error by
    # default, drop-and-warn under trim=True
    data, _ = generate_trial(default_dgp_spec(n=800), seed=15)
    with pytest.raises(OverlapError, match=r"\d+"):
        estimate_datt_adjusted(data, 2, 2, spec_ss(trim_eps=0.12), method="dr")
    est = estimate_datt_adjusted(data, 2, 2, spec_ss(trim_eps=0.12, trim=True), method="dr")
    assert est.diagnostics["trim_dropped"] > 0
    assert np.isfinite(est.estimate)


# ---------------------------------------------------------------------------
# cluster-collapse cross-check
# ---------------------------------------------------------------------------

def test_cluster_weighted_check():
    # whole clusters per arm, equal subgroup counts within each cluster:
    # the cluster-collapsed DiD must reproduce the unadjusted DATT
    rng = np.random.default_rng(30)
    n_per_cluster = 20
    clusters = np.repeat(np.arange(10), n_per_cluster)
    n = clusters.size
    cohorts = [2 if c < 5 else None for c in clusters]
    treated = np.array([c is not None for c in cohorts], dtype=float)
    subgroups = ["s" if i % 2 == 0 else "sp" for i in range(n)]
    dy = rng.normal(size=n) + 0.5 * treated
    d = build_two_period_panel(dy, cohorts, subgroups)
    diff = cluster_weighted_check(d, 2, 2, spec_ss(), clusters)
    un = estimate_datt_unadjusted(d, 2, 2, spec_ss())
    assert abs(diff - un.estimate) < 1e-10


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_unadjusted_shift_invariance_property(seed):
    d = four_cell_panel(noise=1.0, seed=seed)
    base = estimate_datt_unadjusted(d, 2, 2, spec_ss()).estimate
    shifted = PanelDataset.from_arrays(
        unit_id=d.unit_id,
        cohort=d.cohort,
        never=d.never,
        subgroup=d.subgroup,
        x=d.x,
        x_names=d.x_names,
        times=d.times,
        y=d.y + 17.3,
    )
    est = estimate_datt_unadjusted(shifted, 2, 2, spec_ss()).estimate
    assert est == pytest.approx(base, abs=1e-10)
