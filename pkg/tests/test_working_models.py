"""Nuisance-model fitting: multinomial logit and least squares."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tridiff import (
    ConvergenceError,
    DataError,
    fit_least_squares,
    fit_multinomial_logit,
    predict_cell_probabilities,
    predict_outcome,
)
from tridiff.working_models import PropensityModel

from oracles import qr_least_squares, stratum_frequencies


def _labels(counts):
    return np.repeat(np.arange(4), counts)


# ---------------------------------------------------------------------------
# fit_multinomial_logit
# ---------------------------------------------------------------------------

def test_intercept_only_equal_counts():
    X = np.ones((100, 1))
    m = fit_multinomial_logit(X, _labels([25, 25, 25, 25]))
    probs = predict_cell_probabilities(m, np.array([1.0]))
    np.testing.assert_allclose(probs, [0.25, 0.25, 0.25, 0.25], atol=1e-9)
    assert m.converged


def test_intercept_only_unequal_counts():
    X = np.ones((100, 1))
    m = fit_multinomial_logit(X, _labels([10, 20, 30, 40]))
    probs = predict_cell_probabilities(m, np.array([1.0]))
    np.testing.assert_allclose(probs, [0.1, 0.2, 0.3, 0.4], atol=1e-8)


def test_binary_covariate_matches_stratum_frequencies():
    rng = np.random.default_rng(8)
    z = rng.integers(0, 2, size=600)
    # draw labels with z-dependent cell probabilities
    table = {0: [0.10, 0.30, 0.40, 0.20], 1: [0.35, 0.15, 0.20, 0.30]}
    labels = np.array([rng.choice(4, p=table[v]) for v in z])
    X = np.column_stack([np.ones(z.size), z.astype(float)])
    m = fit_multinomial_logit(X, labels)
    oracle = stratum_frequencies(z, labels, categories=(0, 1, 2, 3))
    for v in (0, 1):
        got = predict_cell_probabilities(m, np.array([1.0, float(v)]))
        np.testing.assert_allclose(got, oracle[v], atol=1e-6)


def test_refit_bit_identical():
    rng = np.random.default_rng(3)
    X = np.column_stack([np.ones(200), rng.normal(size=(200, 2))])
    labels = rng.integers(0, 4, size=200)
    a = fit_multinomial_logit(X, labels)
    b = fit_multinomial_logit(X, labels)
    assert np.array_equal(a.theta, b.theta)


def test_score_equation_for_intercept():
    # summed fitted probabilities per category reproduce the observed counts
    rng = np.random.default_rng(5)
    X = np.column_stack([np.ones(400), rng.normal(size=(400, 2))])
    labels = rng.integers(0, 4, size=400)
    m = fit_multinomial_logit(X, labels)
    probs = predict_cell_probabilities(m, X)
    counts = np.bincount(labels, minlength=4).astype(float)
    np.testing.assert_allclose(probs.sum(axis=0), counts, atol=1e-6)


def test_log_likelihood_trace_monotone():
    rng = np.random.default_rng(11)
    X = np.column_stack([np.ones(300), rng.normal(size=(300, 3))])
    labels = rng.integers(0, 4, size=300)
    m = fit_multinomial_logit(X, labels)
    trace = np.array(m.ll_trace)
    assert np.all(np.diff(trace) >= -1e-10)
    assert m.grad_norm < 1e-8


def test_standardization_invariance_of_predictions():
    rng = np.random.default_rng(13)
    raw = rng.normal(size=(300, 2))
    labels = rng.integers(0, 4, size=300)
    X1 = np.column_stack([np.ones(300), raw])
    X2 = np.column_stack([np.ones(300), 1000.0 + 50.0 * raw])
    p1 = predict_cell_probabilities(fit_multinomial_logit(X1, labels), X1)
    p2 = predict_cell_probabilities(fit_multinomial_logit(X2, labels), X2)
    np.testing.assert_allclose(p1, p2, atol=1e-6)


def test_nonconvergence_reports_gradient():
    rng = np.random.default_rng(17)
    X = np.column_stack([np.ones(200), rng.normal(size=(200, 3))])
    labels = rng.integers(0, 4, size=200)
    with pytest.raises(ConvergenceError, match="gradient"):
        fit_multinomial_logit(X, labels, max_iter=1)


def test_separation_warns_but_proceeds():
    # category determined exactly by the sign pattern of z: quasi-separated
    z = np.repeat([0.0, 1.0, 2.0, 3.0], 30)
    labels = np.repeat([0, 1, 2, 3], 30)
    X = np.column_stack([np.ones(z.size), z])
    m = fit_multinomial_logit(X, labels, max_iter=200)
    probs = predict_cell_probabilities(m, X)
    assert np.all(probs > 0)  # returned probabilities are never clamped
    assert m.warnings  # quasi-separation surfaced


def test_every_row_present_precondition():
    X = np.ones((8, 1))
    with pytest.raises(DataError, match="category"):
        fit_multinomial_logit(X, np.array([0, 0, 1, 1, 2, 2, 2, 2]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    theta = rng.normal(scale=2.0, size=(3, 3))
    m = PropensityModel(
        theta=theta,
        category_order=("g_s", "g_sp", "c_s", "c_sp"),
        iterations=0,
        grad_norm=0.0,
        converged=True,
        ll_trace=(),
        warnings=(),
    )
    X = np.column_stack([np.ones(40), rng.normal(size=(40, 2))])
    probs = predict_cell_probabilities(m, X)
    assert np.all(probs > 0)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_predict_zero_theta():
    m = PropensityModel(
        theta=np.zeros((3, 2)),
        category_order=("g_s", "g_sp", "c_s", "c_sp"),
        iterations=0,
        grad_norm=0.0,
        converged=True,
        ll_trace=(),
        warnings=(),
    )
    np.testing.assert_allclose(
        predict_cell_probabilities(m, np.array([1.0, 5.0])), [0.25] * 4, atol=1e-15
    )


def test_predict_log2_row():
    theta = np.zeros((3, 1))
    theta[0, 0] = np.log(2.0)
    m = PropensityModel(
        theta=theta,
        category_order=("g_s", "g_sp", "c_s", "c_sp"),
        iterations=0,
        grad_norm=0.0,
        converged=True,
        ll_trace=(),
        warnings=(),
    )
    np.testing.assert_allclose(
        predict_cell_probabilities(m, np.array([1.0])), [0.4, 0.2, 0.2, 0.2], atol=1e-12
    )


def test_predict_arity_mismatch():
    m = PropensityModel(
        theta=np.zeros((3, 2)),
        category_order=("g_s", "g_sp", "c_s", "c_sp"),
        iterations=0,
        grad_norm=0.0,
        converged=True,
        ll_trace=(),
        warnings=(),
    )
    with pytest.raises(DataError):
        predict_cell_probabilities(m, np.array([1.0, 2.0, 3.0]))


# ---------------------------------------------------------------------------
# fit_least_squares
# ---------------------------------------------------------------------------

def test_exact_affine_fit():
    x = np.linspace(-2, 3, 10)
    y = 3.0 + 2.0 * x
    m = fit_least_squares(x, y)
    np.testing.assert_allclose(m.beta, [3.0, 2.0], atol=1e-10)
    assert m.residual_variance < 1e-10


def test_intercept_only_mean():
    y = np.array([1.0, 2.0, 6.0])
    m = fit_least_squares(np.empty((3, 0)), y)
    np.testing.assert_allclose(m.beta, [3.0], atol=1e-12)


def test_random_problem_matches_qr_oracle():
    rng = np.random.default_rng(21)
    X = rng.normal(size=(50, 4))
    y = rng.normal(size=50)
    m = fit_least_squares(X, y)
    oracle = qr_least_squares(np.column_stack([np.ones(50), X]), y)
    np.testing.assert_allclose(m.beta, oracle, atol=1e-8)


def test_weighted_matches_qr_oracle():
    rng = np.random.default_rng(22)
    X = rng.normal(size=(60, 3))
    y = rng.normal(size=60)
    w = rng.uniform(0.2, 2.0, size=60)
    m = fit_least_squares(X, y, weights=w)
    oracle = qr_least_squares(np.column_stack([np.ones(60), X]), y, weights=w)
    np.testing.assert_allclose(m.beta, oracle, atol=1e-8)


def test_constant_weights_equal_unweighted():
    rng = np.random.default_rng(23)
    X = rng.normal(size=(40, 2))
    y = rng.normal(size=40)
    a = fit_least_squares(X, y)
    b = fit_least_squares(X, y, weights=np.full(40, 7.5))
    np.testing.assert_allclose(a.beta, b.beta, atol=1e-10)


def test_collinear_column_rescued_and_named():
    rng = np.random.default_rng(24)
    x1 = rng.normal(size=30)
    X = np.column_stack([x1, 2.0 * x1])
    y = rng.normal(size=30)
    m = fit_least_squares(X, y, column_names=("x1", "x2"))
    assert m.ridge_used
    assert m.collinear == ("x2",)
    # rescued predictions equal the least-squares projection
    oracle = qr_least_squares(np.column_stack([np.ones(30), X]), y)
    np.testing.assert_allclose(
        predict_outcome(m, X), np.column_stack([np.ones(30), X]) @ oracle, atol=1e-6
    )


def test_collinear_message_names_columns():
    from tridiff.working_models import _collinear_message

    x1 = np.linspace(0, 1, 12)
    D = np.column_stack([np.ones(12), x1, 2.0 * x1])
    msg = _collinear_message(D, ("x1", "x2"))
    assert "x2" in msg


def test_non_finite_inputs_rejected():
    with pytest.raises(DataError, match="finite"):
        fit_least_squares(np.array([1.0, np.nan, 2.0]), np.zeros(3))


def test_predict_outcome_values():
    m = fit_least_squares(np.linspace(0, 1, 5), np.zeros(5))
    assert predict_outcome(m, np.array([3.0])) == pytest.approx(0.0, abs=1e-12)
    m2 = fit_least_squares(np.array([0.0, 1.0, 2.0]), np.array([1.0, 3.0, 5.0]))
    assert predict_outcome(m2, np.array([3.0])) == pytest.approx(7.0, abs=1e-9)


def test_duplicated_row_invariance_on_exact_data():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = 1.0 + 2.0 * x
    m1 = fit_least_squares(x, y)
    m2 = fit_least_squares(np.append(x, 1.0), np.append(y, 3.0))
    grid = np.linspace(-1, 4, 7)[:, None]
    np.testing.assert_allclose(
        predict_outcome(m1, grid), predict_outcome(m2, grid), atol=1e-9
    )


def test_predict_outcome_arity_mismatch():
    m = fit_least_squares(np.linspace(0, 1, 5), np.zeros(5))
    with pytest.raises(DataError):
        predict_outcome(m, np.array([1.0, 2.0]))
