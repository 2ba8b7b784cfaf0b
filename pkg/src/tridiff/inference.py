"""Influence-function inference: plug-in SEs, CIs, and (g, t) aggregation.

Standard errors use the correct-specification influence function only; the
estimation-effect corrections that would be needed under misspecified working
models are documented as a known limitation, not computed.  Critical values
are standard normal (asymptotic), with no small-sample correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .errors import DataError, NumericalError, UsageError
from .working_models import predict_outcome


def z_value(level: float, two_sided: bool = True) -> float:
    q = 0.5 + level / 2.0 if two_sided else level
    return NormalDist().inv_cdf(q)


@dataclass(frozen=True)
class InfluenceVector:
    """Per-included-unit values eta_i for one (estimand, g, t, comparison)."""

    values: np.ndarray
    index: tuple
    estimand: str
    g: int
    t: int
    comparison: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if not np.isfinite(v).all():
            raise NumericalError("influence values must be finite")
        scale = max(1.0, float(np.abs(v).max())) if v.size else 1.0
        if v.size and abs(float(v.mean())) > 1e-8 * scale:
            raise NumericalError(
                f"influence values must center at 0 (got mean {float(v.mean()):.3e})"
            )
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class AggregatedEffect:
    """Weighted combination of group-time effects sharing one estimand."""

    components: tuple  # (g, t, weight, estimate) per effect
    estimate: float
    se: float
    ci: tuple[float, float]
    level: float
    influence: np.ndarray
    index: tuple

    def __post_init__(self):
        total = sum(w for _, _, w, _ in self.components)
        if abs(total - 1.0) > 1e-8:
            raise UsageError(f"aggregation weights must sum to 1, got {total}")


def influence_values(data, g: int, t: int, spec, models: dict, weights, estimate: float) -> InfluenceVector:
    """Efficient influence values for the doubly-robust CDATT estimator.

    ``models`` must hold the four cell outcome fits keyed "mu_s_g", "mu_sp_g",
    "mu_s_c", "mu_sp_c" (targets: Y_t - Y_{g-1} on cells g_s, g_sp, c_s, c_sp).
    ``weights`` are the self-normalized sample weights the estimate used; the
    components are

        w1 (dy - mu_s_g) - w2 (dy - mu_sp_g) - w3 (dy - mu_s_c) + w4 (dy - mu_sp_c)
        + w1 (mu_s_g - mu_sp_g - estimate)        (treated-side centering)
        - w3 (mu_s_c - mu_sp_c)                   (comparison-side centering)

    The mu_s fits cancel pointwise between the residual and centering rows, so
    they affect diagnostics but not the values; they are kept explicit because
    the centering terms are defined through them.
    """
    for key in ("mu_s_g", "mu_sp_g", "mu_s_c", "mu_sp_c"):
        if key not in models:
            raise UsageError(f"missing outcome model {key!r} for influence computation")
    pos = weights.positions
    dy = data.y_at(t)[pos] - data.y_at(g - 1)[pos]
    Xor = data.x_cols(spec.or_cols())[pos]
    mu_s_g = np.asarray(predict_outcome(models["mu_s_g"], Xor), dtype=np.float64)
    mu_sp_g = np.asarray(predict_outcome(models["mu_sp_g"], Xor), dtype=np.float64)
    mu_s_c = np.asarray(predict_outcome(models["mu_s_c"], Xor), dtype=np.float64)
    mu_sp_c = np.asarray(predict_outcome(models["mu_sp_c"], Xor), dtype=np.float64)

    w1, w2, w3, w4 = weights.w1, weights.w2, weights.w3, weights.w4
    eta = (
        w1 * (dy - mu_s_g)
        - w2 * (dy - mu_sp_g)
        - w3 * (dy - mu_s_c)
        + w4 * (dy - mu_sp_c)
        + w1 * (mu_s_g - mu_sp_g - estimate)
        - w3 * (mu_s_c - mu_sp_c)
    )
    return InfluenceVector(
        values=eta,
        index=weights.index,
        estimand="CDATT",
        g=int(g),
        t=int(t),
        comparison=weights.comparison,
    )


def standard_error_ci(influence, level: float, estimate: float) -> tuple[float, tuple[float, float]]:
    """Plug-in SE = sqrt(mean(eta^2)/n) and the two-sided normal CI."""
    values = np.asarray(getattr(influence, "values", influence), dtype=np.float64)
    n = values.size
    if n < 2:
        raise DataError(f"need at least 2 influence values for a standard error, got {n}")
    se = float(math.sqrt(float(np.mean(values * values)) / n))
    z = z_value(level)
    return se, (estimate - z * se, estimate + z * se)


def aggregate_group_time(effects: Sequence, weights: Sequence[float]) -> AggregatedEffect:
    """User-weighted sum of group-time effects with joint influence-based SE.

    Each effect's influence values are defined over its own included sample;
    they are rescaled to the union sample (factor N_union / n_effect) and
    summed per unit before squaring, so units that appear in several (g, t)
    problems contribute their combined influence.
    """
    effects = list(effects)
    weights = [float(w) for w in weights]
    if not effects or len(effects) != len(weights):
        raise UsageError("need one weight per effect")
    if any(w < 0 for w in weights):
        raise UsageError("aggregation weights must be nonnegative")
    if abs(sum(weights) - 1.0) > 1e-8:
        raise UsageError(f"aggregation weights must sum to 1, got {sum(weights)}")
    estimands = {e.estimand for e in effects}
    if len(estimands) != 1:
        raise UsageError(f"cannot aggregate mixed estimands: {sorted(estimands)}")
    comparisons = {e.comparison for e in effects}
    if len(comparisons) != 1:
        raise UsageError(f"cannot aggregate mixed comparison groups: {sorted(comparisons)}")
    if len({float(e.level) for e in effects}) != 1:
        raise UsageError("cannot aggregate effects with different confidence levels")
    for e in effects:
        if e.influence is None or len(e.influence) == 0:
            raise UsageError(f"effect (g={e.g}, t={e.t}) carries no influence values")

    union: dict = {}
    for e in effects:
        for uid in e.index:
            if uid not in union:
                union[uid] = len(union)
    n_union = len(union)
    combined = np.zeros(n_union)
    estimate = 0.0
    for e, w in zip(effects, weights):
        slots = np.fromiter((union[uid] for uid in e.index), dtype=np.int64, count=len(e.index))
        combined[slots] += w * (n_union / len(e.index)) * np.asarray(e.influence)
        estimate += w * float(e.estimate)

    level = float(effects[0].level)
    centered = combined - combined.mean()  # exact 0 in theory; guard roundoff
    se = float(math.sqrt(float(np.mean(centered * centered)) / n_union))
    z = z_value(level)
    return AggregatedEffect(
        components=tuple((e.g, e.t, w, float(e.estimate)) for e, w in zip(effects, weights)),
        estimate=float(estimate),
        se=se,
        ci=(estimate - z * se, estimate + z * se),
        level=level,
        influence=combined,
        index=tuple(union.keys()),
    )


def influence_covariance(effects: Sequence) -> tuple[np.ndarray, tuple]:
    """Pairwise covariance matrix of group-time estimates from influence values.

    Effects are aligned on the union of their unit indices with the same
    N_union/n_effect rescaling as aggregate_group_time, so the diagonal equals
    each effect's SE squared; off-diagonals come from units shared between
    estimation samples (disjoint samples give exact zeros).  Returns the
    (m, m) matrix together with the union index.  Joint Wald tests can be
    built on top; no simultaneous confidence bands are provided.
    """
    effects = list(effects)
    if not effects:
        raise UsageError("need at least one effect")
    for e in effects:
        if e.influence is None or len(e.influence) == 0:
            raise UsageError(f"effect (g={e.g}, t={e.t}) carries no influence values")
    union: dict = {}
    for e in effects:
        for uid in e.index:
            if uid not in union:
                union[uid] = len(union)
    n_union = len(union)
    H = np.zeros((len(effects), n_union))
    for row, e in enumerate(effects):
        slots = np.fromiter((union[uid] for uid in e.index), dtype=np.int64, count=len(e.index))
        H[row, slots] = (n_union / len(e.index)) * np.asarray(e.influence)
    cov = (H @ H.T) / float(n_union) ** 2
    return cov, tuple(union.keys())
