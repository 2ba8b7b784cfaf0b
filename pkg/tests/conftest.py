"""Shared builders and fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from tridiff import DesignSpec, PanelDataset, default_dgp_spec, generate_trial


def build_two_period_panel(
    dy,
    cohorts,
    subgroups,
    x=None,
    x_names=("x1",),
    never_label=None,
    y0=None,
    times=(1, 2),
):
    """Assemble a balanced 2-period panel with Y_2 - Y_1 = dy.

    cohorts: iterable of ints or None (never treated).
    """
    dy = np.asarray(dy, dtype=float)
    n = dy.size
    never = np.array([c is None for c in cohorts])
    cohort = np.array([0 if c is None else int(c) for c in cohorts])
    if x is None:
        x = np.ones((n, 1))
        x_names = ("x1",)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    base = np.zeros(n) if y0 is None else np.asarray(y0, dtype=float)
    y = np.column_stack([base, base + dy])
    return PanelDataset.from_arrays(
        unit_id=[f"u{i}" for i in range(n)],
        cohort=cohort,
        never=never,
        subgroup=list(subgroups),
        x=x,
        x_names=x_names,
        times=times,
        y=y,
    )


def four_cell_panel(
    n_per_cell=25,
    cell_dy=(1.0, 0.4, 0.3, 0.2),
    noise=0.0,
    seed=0,
    x_mode="constant",
):
    """Panel with the four (treated/comparison x s/sp) cells filled evenly.

    cell_dy: mean outcome change for (g_s, g_sp, c_s, c_sp).
    x_mode: "constant" (single degenerate column) or "random" (2 columns).
    """
    rng = np.random.default_rng(seed)
    n = 4 * n_per_cell
    cohorts = [2] * (2 * n_per_cell) + [None] * (2 * n_per_cell)
    subgroups = (["s"] * n_per_cell + ["sp"] * n_per_cell) * 2
    dy = np.repeat(np.asarray(cell_dy, dtype=float), n_per_cell)
    if noise:
        dy = dy + rng.normal(0.0, noise, size=n)
    if x_mode == "constant":
        x, x_names = np.ones((n, 1)), ("x1",)
    else:
        x = rng.normal(size=(n, 2))
        x_names = ("x1", "x2")
    return build_two_period_panel(dy, cohorts, subgroups, x=x, x_names=x_names)


def spec_ss(**kw):
    """DesignSpec for the (s, sp) pair used by the builders above."""
    kw.setdefault("s", "s")
    kw.setdefault("s_prime", "sp")
    return DesignSpec(**kw)


@pytest.fixture(scope="session")
def calibrated_panel():
    """One medium draw from the calibrated heterogeneous-effect generator."""
    spec = default_dgp_spec(gamma=1.0, n=800)
    data, truth = generate_trial(spec, seed=4242)
    return data, truth


@pytest.fixture(scope="session")
def null_panel():
    """One draw from the no-treatment-effect generator."""
    spec = default_dgp_spec(effect="none", n=800)
    data, truth = generate_trial(spec, seed=4243)
    return data, truth
