"""Causal DATT estimators: IPW, RA, and DR for panels, DR for repeated
cross-sections, ATT recovery under an unaffected comparison subgroup, and the
monotone-selection lower bound.

The causal DATT (CDATT) is the part of the subgroup contrast caused by
subgroup membership itself, holding the population fixed at the units
actually in the subgroup of interest.  Identification additionally requires
the parallel-gaps condition for the s' potential outcomes, which cannot be
tested from data; estimates record that as a maintained assumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dataset import CELL_KEYS, DesignSpec, build_cells
from .errors import DegenerateDesignError, UsageError
from .datt import EffectEstimate, _delta_y, _finish, _fit_shared_propensity, _trim
from .inference import influence_values, z_value
from .working_models import (
    fit_least_squares,
    predict_cell_probabilities,
    predict_outcome,
)

_UNTESTABLE_NOTE = (
    "maintained assumption: parallel gaps for the s' potential outcomes "
    "(not testable from data)"
)


@dataclass(frozen=True)
class CdattWeights:
    """Self-normalized sample weights w1..w4 for one (g, t, c, s, s') problem.

    Support: w1 on g_s, w2 on g_sp, w3 on c_s, w4 on c_sp; each averages to 1
    over the estimation sample.  ``normalizers`` records the sample means that
    scaled each weight; ``positions`` indexes the estimation sample (after any
    trimming) into the parent dataset, aligned with ``index``.
    """

    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    w4: np.ndarray
    normalizers: dict[str, float]
    comparison: str
    index: tuple
    positions: np.ndarray
    cells: object
    diagnostics: dict


def compute_cdatt_weights(cells, pm, X, trim_eps: float = 0.005, trim: bool = False) -> CdattWeights:
    """Hatted sample weights from the fitted 4-cell propensity model.

        w1 = G_g S_s / En[G_g S_s]
        w2 = (G_g S_s' e_gs/e_gs') / En[ same ]
        w3 = (C_c S_s  e_gs/e_cs ) / En[ same ]
        w4 = (C_c S_s' e_gs/e_cs') / En[ same ]

    Probabilities e_gs' , e_cs , e_cs' appear in denominators, so every unit
    must clear the trim threshold there; violations raise unless ``trim``
    drops the offenders (recorded in diagnostics, normalizers recomputed).
    """
    X = np.asarray(X, dtype=np.float64)
    probs = predict_cell_probabilities(pm, X)
    cells, probs, n_dropped = _trim(cells, probs, (1, 2, 3), trim_eps, trim)

    masks = cells.masks()
    bases = {
        "g_s": masks["g_s"].astype(np.float64),
        "g_sp": masks["g_sp"] * probs[:, 0] / probs[:, 1],
        "c_s": masks["c_s"] * probs[:, 0] / probs[:, 2],
        "c_sp": masks["c_sp"] * probs[:, 0] / probs[:, 3],
    }
    normalizers = {}
    weights = {}
    for key in CELL_KEYS:
        mean = float(bases[key].mean())
        if mean <= 0.0:
            raise DegenerateDesignError(f"empty normalizer for weight on cell {key}")
        normalizers[key] = mean
        weights[key] = bases[key] / mean
    return CdattWeights(
        w1=weights["g_s"],
        w2=weights["g_sp"],
        w3=weights["c_s"],
        w4=weights["c_sp"],
        normalizers=normalizers,
        comparison=cells.comparison,
        index=cells.index,
        positions=cells.included,
        cells=cells,
        diagnostics={
            "max_weight": {k: float(w.max()) for k, w in weights.items()},
            "trim_dropped": n_dropped,
        },
    )


def _fit_cell_outcome(Xor, dy, mask, key):
    fit = fit_least_squares(Xor[mask], dy[mask], cell=key, target="delta")
    return fit, np.asarray(predict_outcome(fit, Xor), dtype=np.float64)


def estimate_cdatt(data, g: int, t: int, spec: DesignSpec, method: str = "dr") -> EffectEstimate:
    """Panel CDATT estimate for (g, t) by IPW, RA, or DR.

        ipw = En[(w1 - w2) dy] - En[(w3 - w4) dy]
        ra  = En[w1 (dy - m_gsp)] - En[(C_c S_s / En[C_c S_s]) (dy - m_csp)]
        dr  = En[(w1 - w2)(dy - m_gsp)] - En[(w3 - w4)(dy - m_csp)]

    where dy = Y_t - Y_{g-1} and m_gsp, m_csp are least-squares fits of dy on
    the s'-subgroup cells.  The RA comparison weight is the plain cell
    frequency, not a propensity weight.  DR influence values come from the
    efficient influence function (inference.influence_values); IPW and RA get
    per-term-centered plug-in influence values.
    """
    if method not in ("ipw", "ra", "dr"):
        raise UsageError(f"method must be 'ipw', 'ra', or 'dr', got {method!r}")
    cells = build_cells(data, g, t, spec)
    pm, _, D = _fit_shared_propensity(data, cells, spec)
    weights = compute_cdatt_weights(cells, pm, D, trim_eps=spec.trim_eps, trim=spec.trim)
    cells = weights.cells
    dy = _delta_y(data, cells)
    masks = cells.masks()
    Xor = data.x_cols(spec.or_cols())[cells.included]

    fits: dict[str, object] = {}
    preds: dict[str, np.ndarray] = {}
    need = {"ipw": (), "ra": ("g_sp", "c_sp"), "dr": ("g_sp", "c_sp", "g_s", "c_s")}[method]
    for key in need:
        fits[key], preds[key] = _fit_cell_outcome(Xor, dy, masks[key], key)

    w1, w2, w3, w4 = weights.w1, weights.w2, weights.w3, weights.w4
    if method == "ipw":
        t1 = float(np.mean(w1 * dy))
        t2 = float(np.mean(w2 * dy))
        t3 = float(np.mean(w3 * dy))
        t4 = float(np.mean(w4 * dy))
        estimate = (t1 - t2) - (t3 - t4)
        eta = w1 * (dy - t1) - w2 * (dy - t2) - w3 * (dy - t3) + w4 * (dy - t4)
        iv = eta
    elif method == "ra":
        w3ra = masks["c_s"] / masks["c_s"].mean()
        r_g = dy - preds["g_sp"]
        r_c = dy - preds["c_sp"]
        t1 = float(np.mean(w1 * r_g))
        t3 = float(np.mean(w3ra * r_c))
        estimate = t1 - t3
        eta = w1 * (r_g - t1) - w3ra * (r_c - t3)
        iv = eta
    else:
        r_g = dy - preds["g_sp"]
        r_c = dy - preds["c_sp"]
        estimate = float(np.mean((w1 - w2) * r_g) - np.mean((w3 - w4) * r_c))
        models = {
            "mu_s_g": fits["g_s"],
            "mu_sp_g": fits["g_sp"],
            "mu_s_c": fits["c_s"],
            "mu_sp_c": fits["c_sp"],
        }
        iv = influence_values(data, g, t, spec, models, weights, estimate)

    diag = {
        "cells": cells.counts,
        "propensity": {
            "iterations": pm.iterations,
            "grad_norm": pm.grad_norm,
            "converged": pm.converged,
            "warnings": list(pm.warnings),
        },
        "weights": weights.diagnostics,
        "outcome_fits": {
            k: {"rank": m.rank, "ridge_used": m.ridge_used, "residual_variance": m.residual_variance}
            for k, m in fits.items()
            if k in ("g_sp", "c_sp")
        },
        "inference_only_fits": {
            k: {"rank": m.rank, "ridge_used": m.ridge_used, "residual_variance": m.residual_variance}
            for k, m in fits.items()
            if k in ("g_s", "c_s")
        },
        "assumptions": _UNTESTABLE_NOTE,
    }
    return _finish("CDATT", method, cells, estimate, iv, spec.level, diag)


def estimate_cdatt_rc(data, g: int, t: int, spec: DesignSpec) -> EffectEstimate:
    """Doubly-robust CDATT from repeated cross-sections.

    Pools observations from periods {g-1, t}; fits the 4-cell propensity on
    the pooled sample and one level-outcome regression per (cell, period);
    combines two regression-adjustment blocks (model-implied gap trends,
    averaged over the g_s and c_s cells) with four pairs of weighted residual
    corrections, one pair per cell, evaluated at both periods.
    """
    cells = build_cells(data, g, t, spec)
    if cells.period is None:
        raise UsageError("estimate_cdatt_rc expects a RepeatedCrossSection")
    pm, _, D = _fit_shared_propensity(data, cells, spec)
    weights = compute_cdatt_weights(cells, pm, D, trim_eps=spec.trim_eps, trim=spec.trim)
    cells = weights.cells
    pos = cells.included
    y = data.y[pos]
    period = cells.period
    masks = cells.masks()
    Xor = data.x_cols(spec.or_cols())[pos]
    probs = predict_cell_probabilities(pm, np.column_stack([np.ones(cells.n), data.x_cols(spec.ps_cols())[pos]]))

    both = {"t": period == t, "pre": period == (g - 1)}
    fits: dict[tuple[str, str], object] = {}
    preds: dict[tuple[str, str], np.ndarray] = {}
    for key in CELL_KEYS:
        for tag, tm in both.items():
            sel = masks[key] & tm
            if not sel.any():
                raise DegenerateDesignError(
                    f"no observations in cell {key} at period "
                    f"{t if tag == 't' else g - 1} (g={g}, t={t})"
                )
            fit = fit_least_squares(Xor[sel], y[sel], cell=f"{key}@{tag}", target="level")
            fits[(key, tag)] = fit
            preds[(key, tag)] = np.asarray(predict_outcome(fit, Xor), dtype=np.float64)

    b1 = masks["g_s"] / masks["g_s"].mean()
    b3 = masks["c_s"] / masks["c_s"].mean()
    d1 = (preds[("g_s", "t")] - preds[("g_s", "pre")]) - (preds[("g_sp", "t")] - preds[("g_sp", "pre")])
    d3 = (preds[("c_s", "t")] - preds[("c_s", "pre")]) - (preds[("c_sp", "t")] - preds[("c_sp", "pre")])
    block_g = float(np.mean(b1 * d1))
    block_c = float(np.mean(b3 * d3))

    ratios = {
        "g_s": np.ones(cells.n),
        "g_sp": probs[:, 0] / probs[:, 1],
        "c_s": probs[:, 0] / probs[:, 2],
        "c_sp": probs[:, 0] / probs[:, 3],
    }
    signs = {"g_s": 1.0, "g_sp": -1.0, "c_s": -1.0, "c_sp": 1.0}
    estimate = block_g - block_c
    eta = b1 * (d1 - block_g) - b3 * (d3 - block_c)
    max_w = 0.0
    for key in CELL_KEYS:
        for tag, tm in both.items():
            base = masks[key] * tm * ratios[key]
            mean = float(base.mean())
            if mean <= 0.0:
                raise DegenerateDesignError(f"empty normalizer for cell {key} at {tag}")
            w = base / mean
            max_w = max(max_w, float(w.max()))
            resid = y - preds[(key, tag)]
            term = float(np.mean(w * resid))
            sgn = signs[key] * (1.0 if tag == "t" else -1.0)
            estimate += sgn * term
            eta += sgn * w * (resid - term)

    diag = {
        "cells": cells.counts,
        "per_period_counts": {
            f"{key}@{tag}": int((masks[key] & tm).sum())
            for key in CELL_KEYS
            for tag, tm in both.items()
        },
        "propensity": {
            "iterations": pm.iterations,
            "grad_norm": pm.grad_norm,
            "converged": pm.converged,
            "warnings": list(pm.warnings),
        },
        "weights": {"max_weight": max_w, "trim_dropped": weights.diagnostics["trim_dropped"]},
        "assumptions": _UNTESTABLE_NOTE,
    }
    return _finish("CDATT", "dr_rc", cells, estimate, eta, spec.level, diag)


def recover_att_unaffected(datt: EffectEstimate, shares) -> tuple[EffectEstimate, EffectEstimate]:
    """Reinterpret a DATT as the subgroup-s ATT under an unaffected s'.

    If the comparison subgroup's ATT is zero, the DATT equals [ATT | S=s]
    unchanged, and the population ATT is share_s times it (the s' term
    contributes nothing); the SE and CI scale by share_s accordingly.
    """
    if datt.estimand != "DATT":
        raise UsageError(f"expected a DATT estimate, got {datt.estimand!r}")
    shares = tuple(float(v) for v in shares)
    if len(shares) != 2:
        raise UsageError("shares must be (share_s, share_s_prime)")
    if min(shares) <= 0.0:
        raise UsageError("both subgroup shares must be positive (comparison subgroup must exist)")
    if abs(sum(shares) - 1.0) > 1e-8:
        raise UsageError(f"shares must sum to 1, got {sum(shares)}")
    share_s = shares[0]
    note = dict(datt.diagnostics)
    note["recovery"] = "comparison-subgroup ATT assumed 0; DATT relabeled as [ATT | S=s]"
    att_s = replace(datt, estimand="ATT_unaffected", diagnostics=note)
    pop_note = dict(note)
    pop_note["recovery"] = f"population ATT = share_s * [ATT | S=s] with share_s={share_s}"
    att_pop = replace(
        datt,
        estimand="ATT_unaffected",
        estimate=datt.estimate * share_s,
        se=datt.se * share_s,
        ci=(datt.ci[0] * share_s, datt.ci[1] * share_s),
        influence=datt.influence * share_s,
        diagnostics=pop_note,
    )
    return att_s, att_pop


def mts_lower_bound(datt: EffectEstimate) -> EffectEstimate:
    """One-sided lower bound for the CDATT under monotone selection.

    When units select into the subgroup with the larger treatment effect,
    CDATT >= DATT; the DATT point estimate becomes a lower bound with
    interval [estimate - z_level * SE, +inf).
    """
    if datt.estimand != "DATT":
        raise UsageError(f"expected a DATT estimate, got {datt.estimand!r}")
    z = z_value(datt.level, two_sided=False)
    note = dict(datt.diagnostics)
    note["bound"] = (
        "one-sided lower confidence bound for CDATT under monotone treatment-"
        "effect selection"
    )
    return replace(
        datt,
        estimand="bound",
        ci=(datt.estimate - z * datt.se, math.inf),
        diagnostics=note,
    )
