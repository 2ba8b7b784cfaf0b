"""Seeded Monte Carlo laboratory for the triple-difference estimators.

Generates synthetic panels and repeated cross-sections from a calibrated
data-generating process, runs estimator suites over many seeded trials, and
summarizes bias / RMSE / coverage per estimator.

Design of the DGP
-----------------
Covariates are resampled (with replacement) from a bundled synthetic table,
so the resampling population is finite and known: every population quantity
below has a closed form as a probability-weighted sum over table rows.
Treatment cohort and subgroup are assigned jointly by a multinomial softmax
whose coefficient vectors carry an intercept slot that is zero by default
(balance is maintained through the covariate loadings instead).  Outcomes
follow

    Y_it = beta0 + beta'X_i + 1[t >= g_i] * R_i + u_it,      u_it ~ N(0, sigma_u)

with R_i ~ Normal(beta'X_i, gamma * sd(beta'X)) when the heterogeneous
treatment effect is switched on and R_i absent when it is off.  Because the
effect distribution depends on the subgroup only through X, the causal
subgroup contrast (CDATT) is exactly zero by construction, while the plain
subgroup contrast (DATT) equals the between-cell difference in E[beta'X] and
is generally far from zero.  Covariates are drawn once per unit and copied
forward, so panels have time-invariant covariates.

Misspecification is applied to the *working models*, never to the DGP: each
trial carries an extra column ``xtilde`` = ln(x+1) + sign(x)|x|^nu of the
education column (nu drawn once per trial), and a misspecified propensity or
outcome model regresses on that single column only.

Reproducibility: per-trial generators are counter-based (Philox) with
substreams spawned as SeedSequence(master_seed, spawn_key=(trial,)), so
serial and parallel execution produce byte-identical reports.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .cdatt import estimate_cdatt, estimate_cdatt_rc
from .dataset import DesignSpec, PanelDataset, RepeatedCrossSection
from .datt import (
    estimate_datt_3wfe,
    estimate_datt_adjusted,
    estimate_datt_unadjusted,
)
from .errors import DataError, NumericalError, UsageError
from .inference import aggregate_group_time, z_value

_TABLE_KEY = 20240817  # fixed Philox key for the bundled covariate table
_TABLE_N = 5000

TABLE_COLUMNS = ("educ", "age", "agesq", "b35", "b45", "b55", "white", "union")

#: Covariate columns the default process loads on (quadratic-in-age form; the
#: binned-age form b35/b45/b55 is available by listing it in ``columns``).
DEFAULT_COLUMNS = ("educ", "age", "agesq", "white", "union")

#: Calibrated softmax coefficients over (intercept, educ, age, agesq, white,
#: union).  Intercept slots are zero; the age coefficients were solved once
#: against the bundled table so every cell's mean score is about zero, which
#: keeps the four cell shares near 1/4 (each inside [0.15, 0.35] at n = 1e5)
#: while the education contrast of -/+1.5 between the two treated cells puts
#: the implied DATT near +0.2.
DEFAULT_ALPHA_WS = (0.0, -1.50, 0.458, -0.25, 0.35, 0.45)
DEFAULT_ALPHA_WSP = (0.0, 1.50, -0.481, 0.25, -0.25, -0.35)
DEFAULT_ALPHA_CS = (0.0, 0.15, -0.068, 0.0, 0.10, 0.15)

DEFAULT_BETA0 = 0.5
DEFAULT_BETA = (1.30, 0.40, 0.30, 0.40, 0.30)
DEFAULT_SIGMA_U = 0.35

#: Estimator suite mirroring the main simulation table.
TABLE_SUITE = (
    "datt_unadj",
    "datt_3wfe",
    "datt_ra",
    "datt_ipw",
    "datt_dr",
    "cdatt_ra",
    "cdatt_ipw",
    "cdatt_dr",
)

_PANEL_ESTIMATORS = (
    "datt_unadj",
    "datt_3wfe",
    "datt_ra",
    "datt_ipw",
    "datt_dr",
    "cdatt_ra",
    "cdatt_ipw",
    "cdatt_dr",
)
_RC_ESTIMATORS = ("cdatt_dr_rc",)


def default_covariate_table() -> tuple[np.ndarray, tuple[str, ...]]:
    """Bundled synthetic covariate table (5000 rows), regenerated on demand.

    Generator: Philox keyed by a fixed constant, so the table is identical in
    every process.  Columns (scales chosen so everything is O(1)):

      educ   years of schooling / 10; integer years on 8..18, peaked at 12
      age    age in decades; integer years uniform on 25..60
      agesq  age^2 / 10 with age in decades (quadratic-in-age regressor)
      b35, b45, b55   age-bin indicators 35-44, 45-54, 55+ (base 25-34)
      white  indicator, population share about 0.8
      union  indicator, share about 0.15, weakly decreasing in education

    Both the quadratic and the binned form of age are included so either can
    be selected as the working covariate set.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(_TABLE_KEY)))
    n = _TABLE_N
    years = np.clip(np.round(rng.normal(12.0, 2.4, size=n)), 8, 18)
    educ = years / 10.0
    age_years = rng.integers(25, 61, size=n).astype(np.float64)
    age = age_years / 10.0
    agesq = age * age / 10.0
    b35 = ((age_years >= 35) & (age_years < 45)).astype(np.float64)
    b45 = ((age_years >= 45) & (age_years < 55)).astype(np.float64)
    b55 = (age_years >= 55).astype(np.float64)
    white = (rng.random(n) < 0.8).astype(np.float64)
    union = (rng.random(n) < (0.25 - 0.08 * educ)).astype(np.float64)
    table = np.column_stack([educ, age, agesq, b35, b45, b55, white, union])
    return table, TABLE_COLUMNS


@dataclass(frozen=True, eq=False)
class DgpSpec:
    """Full description of one synthetic scenario.

    ``table`` is the finite resampling population; ``columns`` the covariates
    the process loads on.  The softmax coefficient vectors have length k+1
    with the intercept slot first (zero in all defaults).  ``effect`` switches
    the treatment effect off entirely ("none") or on with per-unit draws
    R_i ~ Normal(beta'X_i, gamma * sd(beta'X)) ("heterogeneous").  The
    misspecification switches do not alter the data: they mark which working
    models the Monte Carlo runner hands the distorted single-column design.
    """

    table: np.ndarray
    table_columns: tuple[str, ...]
    columns: tuple[str, ...] = DEFAULT_COLUMNS
    alpha_ws: np.ndarray = None
    alpha_wsp: np.ndarray = None
    alpha_cs: np.ndarray = None
    beta0: float = DEFAULT_BETA0
    beta: np.ndarray = None
    sigma_u: float = DEFAULT_SIGMA_U
    gamma: float = 0.0
    effect: str = "heterogeneous"
    ps_wrong: bool = False
    or_wrong: bool = False
    nu_range: tuple[float, float] = (2.0, 5.0)
    misspec_column: str = "educ"
    n: int = 1000
    periods: tuple[int, ...] = (1, 2)
    cohorts: tuple[int, ...] = (2,)

    def __post_init__(self):
        object.__setattr__(self, "table", np.asarray(self.table, dtype=np.float64))
        if self.table.ndim != 2 or self.table.shape[0] < 2:
            raise UsageError("covariate table must be a 2-D array with at least 2 rows")
        if self.table.shape[1] != len(self.table_columns):
            raise UsageError("table_columns must name every table column")
        object.__setattr__(self, "table_columns", tuple(self.table_columns))
        object.__setattr__(self, "columns", tuple(self.columns))
        missing = [c for c in self.columns if c not in self.table_columns]
        if missing:
            raise UsageError(f"columns not present in the covariate table: {missing}")
        k = len(self.columns)
        defaults = {
            "alpha_ws": DEFAULT_ALPHA_WS,
            "alpha_wsp": DEFAULT_ALPHA_WSP,
            "alpha_cs": DEFAULT_ALPHA_CS,
            "beta": DEFAULT_BETA,
        }
        for name, default in defaults.items():
            value = getattr(self, name)
            if value is None:
                if k != len(DEFAULT_COLUMNS) and name != "beta":
                    raise UsageError(
                        f"{name} must be supplied when columns differ from the default set"
                    )
                value = default
            arr = np.asarray(value, dtype=np.float64)
            want = k if name == "beta" else k + 1
            if arr.shape != (want,):
                raise UsageError(
                    f"{name} must have length {want} for {k} covariates, got shape {arr.shape}"
                )
            object.__setattr__(self, name, arr)
        if self.effect not in ("none", "heterogeneous"):
            raise UsageError(f"effect must be 'none' or 'heterogeneous', got {self.effect!r}")
        if not (self.gamma >= 0.0):
            raise UsageError(f"gamma must be >= 0, got {self.gamma}")
        if not (self.sigma_u >= 0.0):
            raise UsageError(f"sigma_u must be >= 0, got {self.sigma_u}")
        if self.n < 100:
            raise UsageError(f"n must be at least 100, got {self.n}")
        lo, hi = (float(v) for v in self.nu_range)
        if not (lo <= hi):
            raise UsageError(f"nu_range must be ordered, got {self.nu_range}")
        object.__setattr__(self, "nu_range", (lo, hi))
        if self.misspec_column not in self.columns:
            raise UsageError(f"misspec_column {self.misspec_column!r} not among columns")
        periods = tuple(int(p) for p in self.periods)
        if len(periods) < 2 or list(periods) != sorted(set(periods)):
            raise UsageError("periods must be at least two strictly increasing integers")
        object.__setattr__(self, "periods", periods)
        cohorts = tuple(int(g) for g in self.cohorts)
        if not cohorts or list(cohorts) != sorted(set(cohorts)):
            raise UsageError("cohorts must be strictly increasing integers")
        for g in cohorts:
            if g not in periods or (g - 1) not in periods:
                raise UsageError(
                    f"cohort {g} needs both {g} and its anchor period {g - 1} in periods"
                )
        object.__setattr__(self, "cohorts", cohorts)

    def x_table(self) -> np.ndarray:
        idx = [self.table_columns.index(c) for c in self.columns]
        return self.table[:, idx]


def default_dgp_spec(**overrides) -> DgpSpec:
    """Calibrated default scenario; keyword overrides replace any field."""
    table, names = default_covariate_table()
    base = DgpSpec(table=table, table_columns=names)
    return replace(base, **overrides) if overrides else base


def dgp_spec_from_json(source) -> DgpSpec:
    """Build a DgpSpec from a JSON file path, JSON text, or a plain dict.

    Recognized keys are the DgpSpec field names plus ``covariate_csv`` (path
    to a CSV whose header names the table columns).  Unknown keys are
    rejected.  Omitted fields keep the calibrated defaults.
    """
    if isinstance(source, dict):
        raw = dict(source)
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid scenario JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise DataError("scenario JSON must be an object")
    field_names = {
        "columns", "alpha_ws", "alpha_wsp", "alpha_cs", "beta0", "beta",
        "sigma_u", "gamma", "effect", "ps_wrong", "or_wrong", "nu_range",
        "misspec_column", "n", "periods", "cohorts",
    }
    unknown = set(raw) - field_names - {"covariate_csv"}
    if unknown:
        raise UsageError(f"unknown scenario keys: {sorted(unknown)}")
    kwargs = {}
    csv_path = raw.pop("covariate_csv", None)
    if csv_path is not None:
        import pandas as pd

        frame = pd.read_csv(csv_path)
        kwargs["table"] = frame.to_numpy(dtype=np.float64)
        kwargs["table_columns"] = tuple(frame.columns)
    else:
        table, names = default_covariate_table()
        kwargs["table"] = table
        kwargs["table_columns"] = names
    for key, value in raw.items():
        if key in ("columns", "periods", "cohorts", "nu_range"):
            kwargs[key] = tuple(value)
        elif key in ("alpha_ws", "alpha_wsp", "alpha_cs", "beta"):
            kwargs[key] = np.asarray(value, dtype=np.float64)
        else:
            kwargs[key] = value
    return DgpSpec(**kwargs)


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(_as_seedseq(seed)))


def _cell_layout(spec: DgpSpec) -> list[tuple[object, str]]:
    """Non-base softmax cells in row order; base cell is (never, 'sp')."""
    rows: list[tuple[object, str]] = []
    for g in spec.cohorts:
        rows.append((g, "s"))
        rows.append((g, "sp"))
    rows.append((None, "s"))
    return rows


def _alpha_matrix(spec: DgpSpec) -> np.ndarray:
    rows = []
    for g in spec.cohorts:
        rows.append(spec.alpha_ws)
        rows.append(spec.alpha_wsp)
    rows.append(spec.alpha_cs)
    return np.vstack(rows)


def _cell_probabilities(spec: DgpSpec, X: np.ndarray) -> np.ndarray:
    """Softmax cell probabilities (columns: layout cells then the base cell)."""
    D = np.column_stack([np.ones(X.shape[0]), X])
    scores = D @ _alpha_matrix(spec).T
    scores = np.column_stack([scores, np.zeros(X.shape[0])])
    scores -= scores.max(axis=1, keepdims=True)
    e = np.exp(scores)
    return e / e.sum(axis=1, keepdims=True)


def _draw_cells(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    cum = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0])
    return np.minimum((cum < u[:, None]).sum(axis=1), probs.shape[1] - 1)


def feasible_group_times(spec: DgpSpec) -> tuple[tuple[int, int], ...]:
    """All (g, t) pairs the scenario identifies (t >= g, anchor in periods)."""
    return tuple((g, t) for g in spec.cohorts for t in spec.periods if t >= g)


def misspecify_covariates(x, seed=None, nu_range=(2.0, 5.0), nu=None) -> np.ndarray:
    """Distorted education column ln(x+1) + sign(x) |x|^nu.

    ``nu`` is drawn once (uniform on ``nu_range``) when not supplied, so the
    transform is a fixed function within a trial.  Requires x > -1.
    """
    x = np.asarray(x, dtype=np.float64)
    if (x <= -1.0).any():
        raise DataError("misspecify_covariates requires every value > -1")
    if nu is None:
        if seed is None:
            raise UsageError("supply either a seed or an explicit nu")
        nu = float(_rng(seed).uniform(nu_range[0], nu_range[1]))
    return np.log1p(x) + np.sign(x) * np.abs(x) ** float(nu)


def trial_truth(spec: DgpSpec) -> dict:
    """Closed-form truth record for a scenario.

    Because covariates are resampled from the finite table, population cell
    expectations are exact probability-weighted sums over table rows:

        E[beta'X | cell] = sum_r pi_cell(x_r) beta'x_r / sum_r pi_cell(x_r).

    The CDATT is 0 by construction.  The DATT at (g, t) equals
    E[beta'X | G=g, S=s] - E[beta'X | G=g, S=s'] whenever the heterogeneous
    effect is on (the effect mean is beta'X regardless of gamma) and 0 when
    the effect is off.
    """
    layout = _cell_layout(spec)
    X = spec.x_table()
    probs = _cell_probabilities(spec, X)
    bx = X @ spec.beta
    datt: dict[tuple[int, int], float] = {}
    for g, t in feasible_group_times(spec):
        if spec.effect == "none":
            datt[(g, t)] = 0.0
            continue
        i_s = layout.index((g, "s"))
        i_sp = layout.index((g, "sp"))
        m_s = float(np.sum(probs[:, i_s] * bx) / np.sum(probs[:, i_s]))
        m_sp = float(np.sum(probs[:, i_sp] * bx) / np.sum(probs[:, i_sp]))
        datt[(g, t)] = m_s - m_sp
    return {"cdatt": 0.0, "datt": datt}


def oracle_datt(spec: DgpSpec, mode: str = "closed_form", draws: int = 1_000_000, seed: int = 0) -> dict:
    """DATT truth per (g, t): exact table sums or an oversampling cross-check.

    ``mode="draws"`` resamples ``draws`` covariate rows, assigns cells by the
    softmax, and takes realized cell means of beta'X — an independent check
    that converges to the closed form at the usual root-n rate.
    """
    if mode == "closed_form":
        return dict(trial_truth(spec)["datt"])
    if mode != "draws":
        raise UsageError(f"mode must be 'closed_form' or 'draws', got {mode!r}")
    rng = _rng(seed)
    X = spec.x_table()[rng.integers(0, spec.table.shape[0], size=draws)]
    cells = _draw_cells(rng, _cell_probabilities(spec, X))
    bx = X @ spec.beta
    layout = _cell_layout(spec)
    out: dict[tuple[int, int], float] = {}
    for g, t in feasible_group_times(spec):
        if spec.effect == "none":
            out[(g, t)] = 0.0
            continue
        m_s = float(bx[cells == layout.index((g, "s"))].mean())
        m_sp = float(bx[cells == layout.index((g, "sp"))].mean())
        out[(g, t)] = m_s - m_sp
    return out


def _draw_common(spec: DgpSpec, rng: np.random.Generator, n: int):
    """Covariates, cell labels, and effect draws shared by both data shapes."""
    idx = rng.integers(0, spec.table.shape[0], size=n)
    X = spec.x_table()[idx]
    probs = _cell_probabilities(spec, X)
    cells = _draw_cells(rng, probs)
    layout = _cell_layout(spec)
    cohort = np.full(n, -1, dtype=np.int64)
    never = np.ones(n, dtype=bool)
    sub = np.empty(n, dtype=object)
    for code, (g, s_label) in enumerate(layout):
        sel = cells == code
        sub[sel] = s_label
        if g is not None:
            cohort[sel] = g
            never[sel] = False
    sub[cells == len(layout)] = "sp"  # base cell: never-treated, subgroup s'
    bx = X @ spec.beta
    if spec.effect == "heterogeneous":
        sigma_bx = float(bx.std())
        R = bx + spec.gamma * sigma_bx * rng.standard_normal(n)
    else:
        R = np.zeros(n)
    return X, cohort, never, sub.astype(str), bx, R


def generate_trial(spec: DgpSpec, seed) -> tuple[PanelDataset, dict]:
    """One synthetic panel plus its truth record.

    The panel carries the true covariate columns and one extra column
    ``xtilde`` (the per-trial distorted education column) so that a single
    dataset serves both correctly and incorrectly specified working models.
    Determinism: the same seed reproduces the dataset bit for bit.
    """
    rng = _rng(seed)
    n = spec.n
    X, cohort, never, sub, bx, R = _draw_common(spec, rng, n)
    T = len(spec.periods)
    u = rng.normal(0.0, spec.sigma_u, size=(n, T))
    nu = float(rng.uniform(spec.nu_range[0], spec.nu_range[1]))
    base = spec.beta0 + bx
    y = np.empty((n, T))
    for j, t in enumerate(spec.periods):
        on = (~never) & (cohort <= t)
        y[:, j] = base + u[:, j] + np.where(on, R, 0.0)
    educ = X[:, spec.columns.index(spec.misspec_column)]
    xt = misspecify_covariates(educ, nu=nu)
    data = PanelDataset.from_arrays(
        unit_id=np.arange(n),
        cohort=cohort,
        never=never,
        subgroup=sub,
        x=np.column_stack([X, xt]),
        x_names=spec.columns + ("xtilde",),
        times=spec.periods,
        y=y,
    )
    return data, trial_truth(spec)


def generate_trial_rc(spec: DgpSpec, seed) -> tuple[RepeatedCrossSection, dict]:
    """One synthetic repeated cross-section plus its truth record.

    Each row is an independent observation: a period drawn uniformly from the
    scenario's periods, one covariate draw, one cell assignment, and a single
    outcome at that period.
    """
    rng = _rng(seed)
    n = spec.n
    X, cohort, never, sub, bx, R = _draw_common(spec, rng, n)
    time = np.asarray(spec.periods)[rng.integers(0, len(spec.periods), size=n)]
    u = rng.normal(0.0, spec.sigma_u, size=n)
    nu = float(rng.uniform(spec.nu_range[0], spec.nu_range[1]))
    on = (~never) & (cohort <= time)
    y = spec.beta0 + bx + u + np.where(on, R, 0.0)
    educ = X[:, spec.columns.index(spec.misspec_column)]
    xt = misspecify_covariates(educ, nu=nu)
    data = RepeatedCrossSection.from_arrays(
        time=time,
        y=y,
        cohort=cohort,
        never=never,
        subgroup=sub,
        x=np.column_stack([X, xt]),
        x_names=spec.columns + ("xtilde",),
    )
    return data, trial_truth(spec)


def summarize_metrics(estimates, ses, truth: float, level: float = 0.95) -> dict:
    """Bias / RMSE / SE / coverage metrics for one estimator row.

    avg_bias and med_bias average and take the median of estimate - truth;
    RMSE is the root mean squared error; emp_sd the standard deviation of the
    estimates; mean_se the average reported standard error; coverage the
    fraction of two-sided normal CIs (estimate +/- z se) containing the
    truth; ci_length the mean CI width.
    """
    est = np.asarray(estimates, dtype=np.float64)
    se = np.asarray(ses, dtype=np.float64)
    if est.size == 0:
        raise DataError("no estimates to summarize")
    if est.shape != se.shape:
        raise DataError("estimates and standard errors must align")
    z = z_value(level)
    bias = est - truth
    lo = est - z * se
    hi = est + z * se
    return {
        "avg_bias": float(bias.mean()),
        "med_bias": float(np.median(bias)),
        "rmse": float(np.sqrt(np.mean(bias * bias))),
        "emp_sd": float(est.std()),
        "mean_se": float(se.mean()),
        "coverage": float(np.mean((lo <= truth) & (truth <= hi))),
        "ci_length": float(np.mean(hi - lo)),
    }


_ROW_FIELDS = (
    "estimator",
    "g",
    "t",
    "truth",
    "n_trials",
    "n_failed",
    "avg_bias",
    "med_bias",
    "rmse",
    "emp_sd",
    "mean_se",
    "coverage",
    "ci_length",
)


@dataclass(frozen=True)
class McReport:
    """Monte Carlo study summary: one row per (estimator, g, t).

    ``rows`` are plain dicts with the _ROW_FIELDS keys (aggregated rows use
    g = t = None).  Serialization is deterministic: identical inputs and
    master seed produce byte-identical JSON and CSV.
    """

    rows: tuple
    trials: int
    master_seed: int
    level: float
    scenario: dict
    per_trial: tuple = field(default=(), repr=False)

    def __post_init__(self):
        for row in self.rows:
            if not (0.0 <= row["coverage"] <= 1.0):
                raise NumericalError(f"coverage out of [0,1] in row {row['estimator']}")
            if row["rmse"] + 1e-12 < abs(row["avg_bias"]):
                raise NumericalError(f"rmse < |avg bias| in row {row['estimator']}")

    def to_json(self) -> str:
        payload = {
            "trials": self.trials,
            "master_seed": self.master_seed,
            "level": self.level,
            "scenario": self.scenario,
            "rows": list(self.rows),
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = [",".join(_ROW_FIELDS)]
        for row in self.rows:
            cells = []
            for key in _ROW_FIELDS:
                value = row[key]
                if value is None:
                    cells.append("")
                elif isinstance(value, float):
                    cells.append(repr(value))
                else:
                    cells.append(str(value))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def per_trial_csv(self) -> str:
        header = "trial,estimator,g,t,estimate,se,ci_lo,ci_hi,error"
        lines = [header]
        for rec in self.per_trial:
            lines.append(
                ",".join(
                    [
                        str(rec["trial"]),
                        rec["estimator"],
                        "" if rec["g"] is None else str(rec["g"]),
                        "" if rec["t"] is None else str(rec["t"]),
                        "" if rec["estimate"] is None else repr(rec["estimate"]),
                        "" if rec["se"] is None else repr(rec["se"]),
                        "" if rec["ci_lo"] is None else repr(rec["ci_lo"]),
                        "" if rec["ci_hi"] is None else repr(rec["ci_hi"]),
                        (rec["error"] or "").replace(",", ";"),
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def row(self, estimator: str, g=None, t=None) -> dict:
        for r in self.rows:
            if r["estimator"] == estimator and r["g"] == g and r["t"] == t:
                return r
        raise KeyError(f"no report row for ({estimator}, g={g}, t={t})")


def mc_design(spec: DgpSpec, level: float = 0.95) -> DesignSpec:
    """DesignSpec the Monte Carlo runner hands the estimators.

    Correct working models see the true covariate columns; a misspecified
    propensity or outcome model sees only the distorted ``xtilde`` column.
    Trimming is drop-and-warn here (an intentionally wrong propensity can
    produce extreme fitted probabilities; that is part of the experiment).
    """
    return DesignSpec(
        s="s",
        s_prime="sp",
        covariates=tuple(spec.columns),
        ps_covariates=("xtilde",) if spec.ps_wrong else None,
        or_covariates=("xtilde",) if spec.or_wrong else None,
        trim=True,
        level=level,
    )


def _run_estimator(name: str, data, g: int, t: int, design: DesignSpec):
    if name == "datt_unadj":
        return estimate_datt_unadjusted(data, g, t, design)
    if name == "datt_3wfe":
        return estimate_datt_3wfe(data, g, t, design)
    if name in ("datt_ra", "datt_ipw", "datt_dr"):
        return estimate_datt_adjusted(data, g, t, design, method=name.split("_")[1])
    if name in ("cdatt_ra", "cdatt_ipw", "cdatt_dr"):
        return estimate_cdatt(data, g, t, design, method=name.split("_")[1])
    if name == "cdatt_dr_rc":
        return estimate_cdatt_rc(data, g, t, design)
    raise UsageError(f"unknown estimator {name!r}")


def _mc_trial(args) -> list[dict]:
    """Worker for one trial; module-level so process pools can pickle it."""
    spec, suite, master_seed, trial, gts, rc, level, agg_weights = args
    from .errors import TridiffError

    seed = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))
    data, _ = generate_trial_rc(spec, seed) if rc else generate_trial(spec, seed)
    design = mc_design(spec, level)
    records: list[dict] = []
    effects: dict[str, list] = {name: [] for name in suite}
    for name in suite:
        for g, t in gts:
            rec = {
                "trial": trial, "estimator": name, "g": g, "t": t,
                "estimate": None, "se": None, "ci_lo": None, "ci_hi": None,
                "error": None,
            }
            try:
                e = _run_estimator(name, data, g, t, design)
                rec.update(estimate=e.estimate, se=e.se, ci_lo=e.ci[0], ci_hi=e.ci[1])
                effects[name].append(e)
            except TridiffError as exc:
                rec["error"] = f"{type(exc).__name__}: {exc}"
            records.append(rec)
    if agg_weights is not None:
        weights = [agg_weights[gt] for gt in gts]
        for name in suite:
            rec = {
                "trial": trial, "estimator": f"{name}#agg", "g": None, "t": None,
                "estimate": None, "se": None, "ci_lo": None, "ci_hi": None,
                "error": None,
            }
            if len(effects[name]) == len(gts):
                try:
                    a = aggregate_group_time(effects[name], weights)
                    rec.update(estimate=a.estimate, se=a.se, ci_lo=a.ci[0], ci_hi=a.ci[1])
                except TridiffError as exc:
                    rec["error"] = f"{type(exc).__name__}: {exc}"
            else:
                rec["error"] = "component (g,t) estimates missing"
            records.append(rec)
    return records


def run_monte_carlo(
    spec: DgpSpec,
    suite=TABLE_SUITE,
    trials: int = 1000,
    master_seed: int = 20250101,
    *,
    n_jobs: int = 1,
    level: float = 0.95,
    rc: bool = False,
    aggregate_weights=None,
    keep_per_trial: bool = False,
) -> McReport:
    """Seeded Monte Carlo study over an estimator suite.

    Per-trial seeds come from SeedSequence(master_seed, spawn_key=(trial,)),
    so results do not depend on ``n_jobs``; with n_jobs > 1 trials execute in
    a process pool and the report is byte-identical to serial execution.
    CDATT rows are scored against the construction truth 0; DATT rows against
    the closed-form table oracle.  ``aggregate_weights`` (a {(g, t): weight}
    map summing to 1) adds one user-weighted aggregated row per estimator.
    A trial-level estimator failure is recorded and excluded; a report-level
    error is raised if more than 1% of trials fail for any row.
    """
    suite = tuple(suite)
    if trials < 1:
        raise UsageError("trials must be >= 1")
    valid = _RC_ESTIMATORS if rc else _PANEL_ESTIMATORS
    bad = [name for name in suite if name not in valid]
    if bad:
        kind = "repeated cross-section" if rc else "panel"
        raise UsageError(f"estimators {bad} are not available for {kind} data")
    gts = feasible_group_times(spec)
    if aggregate_weights is not None:
        aggregate_weights = {
            (int(g), int(t)): float(w) for (g, t), w in dict(aggregate_weights).items()
        }
        missing = [gt for gt in gts if gt not in aggregate_weights]
        if missing:
            raise UsageError(f"aggregate_weights missing entries for {missing}")
        total = sum(aggregate_weights[gt] for gt in gts)
        if abs(total - 1.0) > 1e-8:
            raise UsageError(f"aggregate weights must sum to 1, got {total}")

    tasks = [
        (spec, suite, int(master_seed), trial, gts, rc, float(level), aggregate_weights)
        for trial in range(trials)
    ]
    if n_jobs == 1:
        per_trial = [_mc_trial(task) for task in tasks]
    else:
        chunk = max(1, trials // (8 * int(n_jobs)))
        with ProcessPoolExecutor(max_workers=int(n_jobs)) as pool:
            per_trial = list(pool.map(_mc_trial, tasks, chunksize=chunk))
    records = [rec for batch in per_trial for rec in batch]

    truth_rec = trial_truth(spec)
    row_keys = [(name, g, t) for name in suite for g, t in gts]
    if aggregate_weights is not None:
        row_keys += [(f"{name}#agg", None, None) for name in suite]
    rows = []
    for name, g, t in row_keys:
        got = [r for r in records if r["estimator"] == name and r["g"] == g and r["t"] == t]
        ok = [r for r in got if r["error"] is None]
        n_failed = len(got) - len(ok)
        if n_failed > 0.01 * trials:
            first = next(r["error"] for r in got if r["error"] is not None)
            raise NumericalError(
                f"estimator {name} (g={g}, t={t}) failed in {n_failed}/{trials} "
                f"trials; first failure: {first}"
            )
        if name.endswith("#agg"):
            base = name[: -len("#agg")]
            truths = truth_rec["datt"] if base.startswith("datt") else {gt: 0.0 for gt in gts}
            truth = sum(aggregate_weights[gt] * truths[gt] for gt in gts)
        else:
            truth = truth_rec["datt"][(g, t)] if name.startswith("datt") else 0.0
        metrics = summarize_metrics(
            [r["estimate"] for r in ok], [r["se"] for r in ok], truth, level
        )
        row = {"estimator": name, "g": g, "t": t, "truth": float(truth),
               "n_trials": len(ok), "n_failed": n_failed}
        row.update(metrics)
        rows.append(row)

    scenario = {
        "n": spec.n,
        "gamma": spec.gamma,
        "effect": spec.effect,
        "ps_wrong": spec.ps_wrong,
        "or_wrong": spec.or_wrong,
        "sigma_u": spec.sigma_u,
        "periods": list(spec.periods),
        "cohorts": list(spec.cohorts),
        "data_shape": "repeated_cross_section" if rc else "panel",
    }
    return McReport(
        rows=tuple(rows),
        trials=trials,
        master_seed=int(master_seed),
        level=float(level),
        scenario=scenario,
        per_trial=tuple(records) if keep_per_trial else (),
    )
