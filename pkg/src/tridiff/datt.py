"""DATT estimators: the (non-causal) difference in subgroup ATTs.

Three routes to the same estimand:
  * unadjusted four-cell-means triple difference,
  * three-way fixed-effects OLS (triple-interaction coefficient, HC1 SE),
  * covariate-adjusted RA / IPW / DR as a difference of two within-subgroup
    group-time ATT estimators sharing one 4-cell propensity fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import CELL_KEYS, DesignSpec, build_cells
from .errors import DataError, OverlapError, RankError, UsageError
from .inference import standard_error_ci
from .working_models import (
    fit_least_squares,
    fit_multinomial_logit,
    predict_cell_probabilities,
    predict_outcome,
)


@dataclass(frozen=True)
class EffectEstimate:
    """One estimand value with inference and provenance.

    ``influence`` is aligned with ``index``; SE = sqrt(mean(influence^2)/n)
    and CI = estimate +/- z * SE hold by construction whenever influence
    values are present.
    """

    estimand: str
    estimator: str
    comparison: str
    g: int
    t: int
    estimate: float
    se: float
    ci: tuple[float, float]
    level: float
    influence: np.ndarray
    index: tuple
    diagnostics: dict

    def to_row(self) -> dict:
        return {
            "estimand": self.estimand,
            "estimator": self.estimator,
            "comparison": self.comparison,
            "g": self.g,
            "t": self.t,
            "estimate": self.estimate,
            "se": self.se,
            "ci_lo": self.ci[0],
            "ci_hi": self.ci[1],
        }

    def to_dict(self) -> dict:
        out = self.to_row()
        out["level"] = self.level
        out["n_influence"] = int(len(self.influence)) if self.influence is not None else 0
        out["diagnostics"] = _jsonable(self.diagnostics)
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _delta_y(data, cells) -> np.ndarray:
    pos = cells.included
    return data.y_at(cells.t)[pos] - data.y_at(cells.g - 1)[pos]


def _finish(estimand, estimator, cells, estimate, influence, level, diagnostics) -> EffectEstimate:
    values = np.asarray(getattr(influence, "values", influence), dtype=np.float64)
    index = getattr(influence, "index", cells.index)
    se, ci = standard_error_ci(values, level, estimate)
    if se == 0.0:
        diagnostics = dict(diagnostics)
        diagnostics["degenerate_ci"] = "all influence values are zero; CI collapses to a point"
    return EffectEstimate(
        estimand=estimand,
        estimator=estimator,
        comparison=cells.comparison,
        g=cells.g,
        t=cells.t,
        estimate=float(estimate),
        se=se,
        ci=ci,
        level=level,
        influence=values,
        index=index,
        diagnostics=diagnostics,
    )


def estimate_datt_unadjusted(data, g: int, t: int, spec: DesignSpec) -> EffectEstimate:
    """Four-cell-means triple difference of Y_t - Y_{g-1}.

    Influence values are the centered cell-mean contributions
    sign_j * (dy_i - mean_j) / share_j, giving SE^2 = sum_j var_j / n_j.
    """
    cells = build_cells(data, g, t, spec)
    dy = _delta_y(data, cells)
    masks = cells.masks()
    signs = {"g_s": 1.0, "g_sp": -1.0, "c_s": -1.0, "c_sp": 1.0}
    means = {}
    eta = np.zeros(cells.n)
    for key in CELL_KEYS:
        m = masks[key]
        means[key] = float(dy[m].mean())
        eta[m] = signs[key] * (dy[m] - means[key]) / m.mean()
    # grouped so that swapping s and s' negates the estimate exactly
    estimate = (means["g_s"] - means["g_sp"]) - (means["c_s"] - means["c_sp"])
    diag = {"cells": cells.counts, "excluded": len(cells.excluded_units)}
    return _finish("DATT", "unadjusted", cells, estimate, eta, spec.level, diag)


def estimate_datt_3wfe(data, g: int, t: int, spec: DesignSpec) -> EffectEstimate:
    """Three-way fixed-effects OLS on the stacked two-period sample.

    Y is regressed on {1, X, post, treated, subgroup, all two-way
    interactions of the three indicators, their triple interaction}; the
    estimate is the triple-interaction coefficient with HC1 standard errors.
    Influence values are per stacked row (two rows per unit), scaled so that
    sqrt(mean(influence^2)/n_rows) reproduces the HC1 SE exactly.
    """
    cells = build_cells(data, g, t, spec)
    pos = cells.included
    Xc = data.x_cols(spec.or_cols())[pos]
    names = list(data.x_names if spec.or_cols() is None else spec.or_cols())
    keep = np.ptp(Xc, axis=0) > 0.0  # constant columns are absorbed by the intercept
    absorbed = [nm for nm, k in zip(names, keep) if not k]
    Xc = Xc[:, keep]
    n = cells.n
    tr = cells.in_g.astype(np.float64)
    sub = cells.in_s.astype(np.float64)

    y_pre = data.y_at(g - 1)[pos]
    y_post = data.y_at(t)[pos]
    post = np.concatenate([np.zeros(n), np.ones(n)])
    tr2 = np.concatenate([tr, tr])
    sub2 = np.concatenate([sub, sub])
    X2 = np.vstack([Xc, Xc])
    yy = np.concatenate([y_pre, y_post])

    F = np.column_stack(
        [
            np.ones(2 * n),
            X2,
            post,
            tr2,
            sub2,
            tr2 * post,
            tr2 * sub2,
            post * sub2,
            tr2 * post * sub2,
        ]
    )
    N, p = F.shape
    k_idx = p - 1  # triple-interaction column
    if np.linalg.matrix_rank(F) < p:
        raise RankError(
            "three-way fixed-effects design is collinear; drop redundant covariates"
        )
    scale = F.std(axis=0)
    scale[scale == 0.0] = 1.0
    Fz = F / scale
    gram = Fz.T @ Fz
    beta_z = np.linalg.solve(gram, Fz.T @ yy)
    resid = yy - Fz @ beta_z
    estimate = float(beta_z[k_idx] / scale[k_idx])

    u = np.linalg.solve(gram / N, np.eye(p)[k_idx])
    a = (Fz @ u) / scale[k_idx]  # e_k' (F'F/N)^{-1} f_r per row
    c_hc1 = math.sqrt(N / (N - p))
    eta = c_hc1 * a * resid

    index = tuple(f"{uid}@{per}" for per in (g - 1, t) for uid in cells.index)
    diag = {
        "cells": cells.counts,
        "rows": N,
        "coefficients": p,
        "influence_unit": "stacked row (unit, period)",
    }
    if absorbed:
        diag["absorbed_constant_covariates"] = absorbed
    se, ci = standard_error_ci(eta, spec.level, estimate)
    return EffectEstimate(
        estimand="DATT",
        estimator="3wfe",
        comparison=cells.comparison,
        g=cells.g,
        t=cells.t,
        estimate=estimate,
        se=se,
        ci=ci,
        level=spec.level,
        influence=eta,
        index=index,
        diagnostics=diag,
    )


def _fit_shared_propensity(data, cells, spec):
    """One 4-cell multinomial fit per (g, t) problem; returns (model, probs, design)."""
    Xps = data.x_cols(spec.ps_cols())[cells.included]
    D = np.column_stack([np.ones(cells.n), Xps])
    masks = cells.masks()
    labels = np.zeros(cells.n, dtype=np.int64)
    for code, key in enumerate(CELL_KEYS):
        labels[masks[key]] = code
    pm = fit_multinomial_logit(D, labels)
    probs = predict_cell_probabilities(pm, D)
    return pm, probs, D


def _trim(cells, probs, denom_cols, trim_eps, trim):
    """Enforce the overlap threshold on the listed probability columns.

    Returns (cells, probs, n_dropped); hard error unless ``trim`` is set.
    """
    viol = np.zeros(cells.n, dtype=bool)
    for c in denom_cols:
        viol |= probs[:, c] < trim_eps
    if not viol.any():
        return cells, probs, 0
    ids = tuple(np.asarray(cells.index, dtype=object)[viol])
    if not trim:
        shown = ", ".join(str(u) for u in ids[:20])
        more = "" if len(ids) <= 20 else f" (+{len(ids) - 20} more)"
        raise OverlapError(
            f"{len(ids)} unit(s) have fitted cell propensities below the trim "
            f"threshold {trim_eps}: {shown}{more}; re-run with trimming "
            f"enabled to drop them"
        )
    return cells.subset(~viol), probs[~viol], int(viol.sum())


def _att_per_subgroup(dy, treated_mask, comp_mask, ratio, pred_comp, method):
    """Within-subgroup group-time ATT (RA / IPW / DR) with per-term-centered IF."""
    w_t = treated_mask / treated_mask.mean()
    if method == "ra":
        a = dy - pred_comp
        t1 = float(np.mean(w_t * a))
        return t1, w_t * (a - t1)
    raw = comp_mask * ratio
    w_c = raw / raw.mean()
    if method == "ipw":
        t1 = float(np.mean(w_t * dy))
        t3 = float(np.mean(w_c * dy))
        return t1 - t3, w_t * (dy - t1) - w_c * (dy - t3)
    if method == "dr":
        a = dy - pred_comp
        t1 = float(np.mean(w_t * a))
        t3 = float(np.mean(w_c * a))
        return t1 - t3, w_t * (a - t1) - w_c * (a - t3)
    raise UsageError(f"method must be 'ra', 'ipw', or 'dr', got {method!r}")


def estimate_datt_adjusted(data, g: int, t: int, spec: DesignSpec, method: str = "dr") -> EffectEstimate:
    """Covariate-adjusted DATT = ATT within s minus ATT within s'.

    Both within-subgroup ATTs reuse the shared four-cell propensity model,
    renormalized pairwise (treated cell vs comparison cell of the same
    subgroup); outcome models are fitted per comparison cell.  With degenerate
    covariates every method collapses to the unadjusted cell-means formula.
    """
    if method not in ("ra", "ipw", "dr"):
        raise UsageError(f"method must be 'ra', 'ipw', or 'dr', got {method!r}")
    cells = build_cells(data, g, t, spec)
    pm, probs, _ = _fit_shared_propensity(data, cells, spec)
    cells, probs, n_trim = _trim(cells, probs, (2, 3), spec.trim_eps, spec.trim)

    dy = _delta_y(data, cells)
    masks = cells.masks()
    Xor = data.x_cols(spec.or_cols())[cells.included]

    fits = {}
    preds = {}
    for key in ("c_s", "c_sp"):
        fits[key] = fit_least_squares(Xor[masks[key]], dy[masks[key]], cell=key, target="delta")
        preds[key] = np.asarray(predict_outcome(fits[key], Xor), dtype=np.float64)

    att_s, eta_s = _att_per_subgroup(
        dy,
        masks["g_s"].astype(np.float64),
        masks["c_s"].astype(np.float64),
        probs[:, 0] / probs[:, 2],
        preds["c_s"],
        method,
    )
    att_sp, eta_sp = _att_per_subgroup(
        dy,
        masks["g_sp"].astype(np.float64),
        masks["c_sp"].astype(np.float64),
        probs[:, 1] / probs[:, 3],
        preds["c_sp"],
        method,
    )
    estimate = att_s - att_sp
    eta = eta_s - eta_sp
    diag = {
        "cells": cells.counts,
        "att_s": att_s,
        "att_sprime": att_sp,
        "propensity": {
            "iterations": pm.iterations,
            "grad_norm": pm.grad_norm,
            "converged": pm.converged,
            "warnings": list(pm.warnings),
        },
        "outcome_fits": {
            k: {"rank": m.rank, "ridge_used": m.ridge_used, "residual_variance": m.residual_variance}
            for k, m in fits.items()
        },
        "trim_dropped": n_trim,
    }
    return _finish("DATT", method, cells, estimate, eta, spec.level, diag)


def cluster_weighted_check(data, g: int, t: int, spec: DesignSpec, cluster: np.ndarray) -> float:
    """Cross-check utility: cluster-size-weighted DiD on per-cluster subgroup gaps.

    Collapses dy to cluster means of the within-cluster (s minus s') gap and
    takes the treated-vs-comparison difference, weighting clusters by their
    included unit counts.  Equals the unadjusted DATT when every cluster holds
    both subgroups of one treatment arm in the same within-arm proportions;
    exposed for aggregation sanity checks, not as a user estimator.
    """
    cells = build_cells(data, g, t, spec)
    dy = _delta_y(data, cells)
    cl = np.asarray(cluster)[cells.included]
    masks = cells.masks()
    out = {}
    for side, mg, msp in (
        ("g", masks["g_s"], masks["g_sp"]),
        ("c", masks["c_s"], masks["c_sp"]),
    ):
        any_side = mg | msp
        total_w = 0.0
        acc = 0.0
        for c in np.unique(cl[any_side]):
            sel_s = mg & (cl == c)
            sel_sp = msp & (cl == c)
            if not sel_s.any() or not sel_sp.any():
                raise DataError(f"cluster {c!r} lacks one subgroup; gap undefined")
            w = float(sel_s.sum() + sel_sp.sum())
            acc += w * (float(dy[sel_s].mean()) - float(dy[sel_sp].mean()))
            total_w += w
        out[side] = acc / total_w
    return out["g"] - out["c"]
