"""Data ingestion, indexing, and design validation.

Panel data arrive as long-format CSV (``unit,time,y,cohort,subgroup,x1..xk``),
repeated cross-sections without the ``unit`` column.  ``cohort`` is the first
treated period; blank, ``never`` or ``inf`` mean never treated.  Treatment
status is always derived as W_it = 1[t >= cohort], so it is irreversible by
construction and never stored.

Never-treated status is kept as a separate boolean mask next to an integer
cohort array (the integer slot of a never-treated unit is unspecified and must
not be used in arithmetic).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import (
    BalanceError,
    DataError,
    DegenerateDesignError,
    ParseError,
    SchemaError,
    UsageError,
)

NEVER = "never"

_PANEL_COLUMNS = ("unit", "time", "y", "cohort", "subgroup")
_RC_COLUMNS = ("time", "y", "cohort", "subgroup")

# Cell keys, in the fixed order used everywhere downstream:
# treated cohort x subgroup of interest, treated cohort x comparison subgroup,
# comparison group x subgroup of interest, comparison group x comparison subgroup.
CELL_KEYS = ("g_s", "g_sp", "c_s", "c_sp")


@dataclass(frozen=True)
class UnitRecord:
    unit_id: str
    cohort: int | None  # None encodes never treated
    subgroup: str
    x: tuple[float, ...]
    outcomes: dict[int, float]


@dataclass(frozen=True)
class PanelDataset:
    """Balanced panel, stored column-wise for vectorized estimation.

    ``cohort[i]`` is meaningful only where ``never[i]`` is False.
    ``y`` has one row per unit and one column per entry of ``times``.
    """

    unit_id: np.ndarray
    cohort: np.ndarray
    never: np.ndarray
    subgroup: np.ndarray
    x: np.ndarray
    x_names: tuple[str, ...]
    times: tuple[int, ...]
    y: np.ndarray
    subgroup_levels: tuple[str, ...]

    @property
    def n_units(self) -> int:
        return len(self.unit_id)

    @property
    def units(self) -> list[UnitRecord]:
        out = []
        for i in range(self.n_units):
            out.append(
                UnitRecord(
                    unit_id=str(self.unit_id[i]),
                    cohort=None if self.never[i] else int(self.cohort[i]),
                    subgroup=str(self.subgroup[i]),
                    x=tuple(float(v) for v in self.x[i]),
                    outcomes={t: float(self.y[i, j]) for j, t in enumerate(self.times)},
                )
            )
        return out

    def y_at(self, t: int) -> np.ndarray:
        return self.y[:, self.times.index(int(t))]

    def treated_at(self, t: int) -> np.ndarray:
        """Derived treatment indicator W_it = 1[t >= cohort]."""
        return ~self.never & (self.cohort <= int(t))

    def x_cols(self, names: Sequence[str] | None) -> np.ndarray:
        if names is None:
            return self.x
        try:
            idx = [self.x_names.index(c) for c in names]
        except ValueError as exc:
            raise SchemaError(f"unknown covariate column: {exc.args[0].split()[0]!r}") from None
        return self.x[:, idx]

    @classmethod
    def from_arrays(
        cls,
        unit_id: Sequence[str],
        cohort: Sequence[int],
        never: Sequence[bool],
        subgroup: Sequence[str],
        x: np.ndarray,
        x_names: Sequence[str],
        times: Sequence[int],
        y: np.ndarray,
    ) -> "PanelDataset":
        unit_id = np.asarray(unit_id, dtype=object)
        cohort = np.asarray(cohort, dtype=np.int64)
        never = np.asarray(never, dtype=bool)
        subgroup = np.asarray(subgroup, dtype=object)
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] != len(unit_id):
            raise DataError("covariate matrix must be (n_units, k)")
        y = np.asarray(y, dtype=np.float64)
        times = tuple(int(t) for t in times)
        if y.shape != (len(unit_id), len(times)):
            raise BalanceError("outcome matrix must be (n_units, n_times)")
        if sorted(times) != list(times) or len(set(times)) != len(times):
            raise DataError("times must be strictly increasing")
        _check_cohorts(cohort, never, times)
        levels = tuple(sorted({str(s) for s in subgroup}))
        if len(levels) < 2:
            raise DataError("need at least two subgroup labels, got " + repr(levels))
        return cls(unit_id, cohort, never, subgroup, x, tuple(x_names), times, y, levels)


@dataclass(frozen=True)
class RepeatedCrossSection:
    """Independent draws of (time, outcome, cohort, subgroup, covariates)."""

    time: np.ndarray
    y: np.ndarray
    cohort: np.ndarray
    never: np.ndarray
    subgroup: np.ndarray
    x: np.ndarray
    x_names: tuple[str, ...]
    times: tuple[int, ...]
    subgroup_levels: tuple[str, ...]

    @property
    def n_obs(self) -> int:
        return len(self.y)

    def x_cols(self, names: Sequence[str] | None) -> np.ndarray:
        if names is None:
            return self.x
        try:
            idx = [self.x_names.index(c) for c in names]
        except ValueError as exc:
            raise SchemaError(f"unknown covariate column: {exc.args[0].split()[0]!r}") from None
        return self.x[:, idx]

    @classmethod
    def from_arrays(cls, time, y, cohort, never, subgroup, x, x_names) -> "RepeatedCrossSection":
        time = np.asarray(time, dtype=np.int64)
        y = np.asarray(y, dtype=np.float64)
        cohort = np.asarray(cohort, dtype=np.int64)
        never = np.asarray(never, dtype=bool)
        subgroup = np.asarray(subgroup, dtype=object)
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] != len(y):
            raise DataError("covariate matrix must be (n_obs, k)")
        times = tuple(sorted({int(t) for t in time}))
        _check_cohorts(cohort, never, times)
        levels = tuple(sorted({str(s) for s in subgroup}))
        if len(levels) < 2:
            raise DataError("need at least two subgroup labels, got " + repr(levels))
        return cls(time, y, cohort, never, subgroup, x, tuple(x_names), times, levels)


@dataclass(frozen=True)
class CellIndicators:
    """Per-unit cell flags for one (g, t, comparison, s, s') problem.

    Arrays run over the *included* subsample: units (or observations) whose
    cohort places them in the treated-at-g or comparison group and whose
    subgroup is s or s'.  ``index`` maps positions back to unit ids (panel)
    or row numbers (repeated cross-section).
    """

    g: int
    t: int
    comparison: str
    s: str
    s_prime: str
    index: tuple
    included: np.ndarray  # positions into the parent dataset
    in_g: np.ndarray  # treated cohort flag G_g over included
    in_s: np.ndarray  # subgroup-of-interest flag S_s over included
    counts: dict[str, int]
    excluded_units: tuple
    period: np.ndarray | None = None  # observation period (RC only)

    @property
    def n(self) -> int:
        return len(self.included)

    def masks(self) -> dict[str, np.ndarray]:
        """The four cell masks, keyed by CELL_KEYS."""
        return {
            "g_s": self.in_g & self.in_s,
            "g_sp": self.in_g & ~self.in_s,
            "c_s": ~self.in_g & self.in_s,
            "c_sp": ~self.in_g & ~self.in_s,
        }

    def subset(self, keep: np.ndarray) -> "CellIndicators":
        """Restrict to ``keep`` (bool over included), re-validating cells."""
        counts = _cell_counts(self.in_g[keep], self.in_s[keep])
        _require_nonempty(counts, self.g, self.t, self.comparison, self.s, self.s_prime)
        dropped = tuple(np.asarray(self.index, dtype=object)[~keep])
        return CellIndicators(
            g=self.g,
            t=self.t,
            comparison=self.comparison,
            s=self.s,
            s_prime=self.s_prime,
            index=tuple(np.asarray(self.index, dtype=object)[keep]),
            included=self.included[keep],
            in_g=self.in_g[keep],
            in_s=self.in_s[keep],
            counts=counts,
            excluded_units=self.excluded_units + dropped,
            period=None if self.period is None else self.period[keep],
        )


@dataclass(frozen=True)
class DesignSpec:
    """User choices for one estimation problem.

    ``comparison`` may be "never", "notyet", or "auto" (never-treated when any
    exist, else not-yet-treated).  ``ps_covariates``/``or_covariates`` override
    ``covariates`` for the propensity and outcome models separately; None
    falls back to ``covariates`` (and ``covariates=None`` means all columns).
    """

    estimand: str = "cdatt"
    estimator: str = "dr"
    comparison: str = "auto"
    s: str = ""
    s_prime: str = ""
    covariates: tuple[str, ...] | None = None
    ps_covariates: tuple[str, ...] | None = None
    or_covariates: tuple[str, ...] | None = None
    trim_eps: float = 0.005
    trim: bool = False
    level: float = 0.95

    def __post_init__(self):
        if not (0.0 < self.trim_eps < 0.5):
            raise UsageError(f"trim_eps must lie in (0, 0.5), got {self.trim_eps}")
        if not (0.0 < self.level < 1.0):
            raise UsageError(f"confidence level must lie in (0, 1), got {self.level}")

    def ps_cols(self) -> tuple[str, ...] | None:
        return self.ps_covariates if self.ps_covariates is not None else self.covariates

    def or_cols(self) -> tuple[str, ...] | None:
        return self.or_covariates if self.or_covariates is not None else self.covariates


def _check_cohorts(cohort: np.ndarray, never: np.ndarray, times: Sequence[int]) -> None:
    if len(times) < 2:
        raise DataError("need at least two periods")
    tmin, tmax = min(times), max(times)
    treated = ~never
    if treated.any():
        bad_early = treated & (cohort <= tmin)
        if bad_early.any():
            raise DataError(
                f"cohort <= first period {tmin} would mean always-treated units "
                f"({int(bad_early.sum())} offending); encode them as '{NEVER}' only if untreated"
            )
        bad_late = treated & (cohort > tmax)
        if bad_late.any():
            raise DataError(
                f"cohort beyond last period {tmax} ({int(bad_late.sum())} offending); "
                f"use '{NEVER}' for units untreated throughout"
            )


def _parse_cohort_column(raw: pd.Series) -> tuple[np.ndarray, np.ndarray]:
    """Map blank/'never'/'inf' to the never mask, everything else to int."""
    never = np.zeros(len(raw), dtype=bool)
    cohort = np.zeros(len(raw), dtype=np.int64)
    for i, v in enumerate(raw):
        text = "" if v is None or (isinstance(v, float) and np.isnan(v)) else str(v).strip()
        if text.lower() in ("", NEVER, "inf", "infinity"):
            never[i] = True
            continue
        try:
            cohort[i] = int(float(text))
        except ValueError:
            raise ParseError(f"row {i + 2}: cannot parse cohort value {text!r}") from None
        if float(text) != cohort[i]:
            raise ParseError(f"row {i + 2}: cohort must be an integer period, got {text!r}")
    return cohort, never


def _numeric_column(df: pd.DataFrame, col: str, kind: str = "float") -> np.ndarray:
    vals = pd.to_numeric(df[col], errors="coerce")
    bad = vals.isna() & df[col].notna()
    if df[col].isna().any():
        row = int(np.flatnonzero(df[col].isna().to_numpy())[0]) + 2
        raise ParseError(f"row {row}: missing value in column {col!r}")
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0]) + 2
        raise ParseError(f"row {row}: non-numeric value in column {col!r}: {df[col].iloc[row - 2]!r}")
    if kind == "int":
        out = vals.to_numpy()
        if not np.all(out == np.floor(out)):
            row = int(np.flatnonzero(out != np.floor(out))[0]) + 2
            raise ParseError(f"row {row}: column {col!r} must be integer")
        return out.astype(np.int64)
    return vals.to_numpy(dtype=np.float64)


def _resolve_schema(df: pd.DataFrame, schema: Mapping[str, str] | None, required: tuple[str, ...]):
    schema = dict(schema or {})
    mapping = {k: schema.get(k, k) for k in required}
    missing = [mapping[k] for k in required if mapping[k] not in df.columns]
    if missing:
        raise SchemaError(f"missing required column(s): {', '.join(missing)}")
    declared_x = schema.get("covariates")
    if declared_x is None:
        used = set(mapping.values())
        x_cols = [c for c in df.columns if c not in used]
    else:
        x_cols = list(declared_x)
        absent = [c for c in x_cols if c not in df.columns]
        if absent:
            raise SchemaError(f"missing covariate column(s): {', '.join(absent)}")
    return mapping, x_cols


def load_panel(path, schema: Mapping[str, str] | None = None) -> PanelDataset:
    """Read a long-format panel CSV into a balanced PanelDataset.

    ``schema`` may rename the required columns, e.g. ``{"y": "logwage"}``,
    and may pin covariate columns via ``{"covariates": [...]}`` (default: all
    remaining columns).
    """
    df = pd.read_csv(
        path,
        dtype={c: object for c in ("unit", "cohort", "subgroup")},
        float_precision="round_trip",
    )
    mapping, x_cols = _resolve_schema(df, schema, _PANEL_COLUMNS)

    unit = df[mapping["unit"]].astype(str).to_numpy(dtype=object)
    time = _numeric_column(df, mapping["time"], kind="int")
    yv = _numeric_column(df, mapping["y"])
    cohort, never = _parse_cohort_column(df[mapping["cohort"]])
    subgroup = df[mapping["subgroup"]].astype(str).to_numpy(dtype=object)
    x = np.column_stack([_numeric_column(df, c) for c in x_cols]) if x_cols else np.empty((len(df), 0))

    times = tuple(sorted(set(int(t) for t in time)))
    t_pos = {t: j for j, t in enumerate(times)}
    uids, first = np.unique(unit, return_index=True)
    order = np.argsort(first)  # keep first-appearance order, not lexicographic
    uids, first = uids[order], first[order]
    first_pos = {u: i for u, i in zip(uids, first)}

    n, T = len(uids), len(times)
    y_mat = np.full((n, T), np.nan)
    u_pos = {u: i for i, u in enumerate(uids)}
    seen = np.zeros((n, T), dtype=bool)
    for r in range(len(df)):
        i, j = u_pos[unit[r]], t_pos[int(time[r])]
        if seen[i, j]:
            raise BalanceError(f"unit {unit[r]!r} has duplicate rows for period {int(time[r])}")
        seen[i, j] = True
        y_mat[i, j] = yv[r]
        f = first_pos[unit[r]]
        if subgroup[r] != subgroup[f]:
            raise DataError(f"unit {unit[r]!r} changes subgroup across rows")
        if never[r] != never[f] or (not never[r] and cohort[r] != cohort[f]):
            raise DataError(f"unit {unit[r]!r} changes cohort across rows")
        if x.shape[1] and not np.array_equal(x[r], x[f]):
            raise DataError(f"unit {unit[r]!r} has time-varying covariates (unsupported)")
    if not seen.all():
        i, j = np.argwhere(~seen)[0]
        raise BalanceError(f"unbalanced panel: unit {uids[i]!r} lacks period {times[j]}")

    sel = np.array([first_pos[u] for u in uids])
    return PanelDataset.from_arrays(
        unit_id=uids.astype(object),
        cohort=cohort[sel],
        never=never[sel],
        subgroup=subgroup[sel],
        x=x[sel] if x.shape[1] else np.empty((n, 0)),
        x_names=tuple(x_cols),
        times=times,
        y=y_mat,
    )


def load_repeated_cross_section(path, schema: Mapping[str, str] | None = None) -> RepeatedCrossSection:
    """Read a repeated-cross-section CSV (no unit column)."""
    df = pd.read_csv(
        path,
        dtype={c: object for c in ("cohort", "subgroup")},
        float_precision="round_trip",
    )
    mapping, x_cols = _resolve_schema(df, schema, _RC_COLUMNS)
    time = _numeric_column(df, mapping["time"], kind="int")
    yv = _numeric_column(df, mapping["y"])
    cohort, never = _parse_cohort_column(df[mapping["cohort"]])
    subgroup = df[mapping["subgroup"]].astype(str).to_numpy(dtype=object)
    x = np.column_stack([_numeric_column(df, c) for c in x_cols]) if x_cols else np.empty((len(df), 0))
    return RepeatedCrossSection.from_arrays(time, yv, cohort, never, subgroup, x, tuple(x_cols))


def write_panel(data: PanelDataset, path) -> None:
    """Emit the long-format CSV that load_panel reads (round-trip safe)."""
    rows = []
    for i in range(data.n_units):
        coh = NEVER if data.never[i] else str(int(data.cohort[i]))
        for j, t in enumerate(data.times):
            rows.append(
                [data.unit_id[i], t, repr(float(data.y[i, j])), coh, data.subgroup[i]]
                + [repr(float(v)) for v in data.x[i]]
            )
    cols = list(_PANEL_COLUMNS) + list(data.x_names)
    pd.DataFrame(rows, columns=cols).to_csv(path, index=False)


def write_repeated_cross_section(data: RepeatedCrossSection, path) -> None:
    rows = []
    for i in range(data.n_obs):
        coh = NEVER if data.never[i] else str(int(data.cohort[i]))
        rows.append(
            [int(data.time[i]), repr(float(data.y[i])), coh, data.subgroup[i]]
            + [repr(float(v)) for v in data.x[i]]
        )
    cols = list(_RC_COLUMNS) + list(data.x_names)
    pd.DataFrame(rows, columns=cols).to_csv(path, index=False)


def _cell_counts(in_g: np.ndarray, in_s: np.ndarray) -> dict[str, int]:
    return {
        "g_s": int((in_g & in_s).sum()),
        "g_sp": int((in_g & ~in_s).sum()),
        "c_s": int((~in_g & in_s).sum()),
        "c_sp": int((~in_g & ~in_s).sum()),
    }


_CELL_TEXT = {
    "g_s": "treated cohort x subgroup of interest",
    "g_sp": "treated cohort x comparison subgroup",
    "c_s": "comparison group x subgroup of interest",
    "c_sp": "comparison group x comparison subgroup",
}


def _require_nonempty(counts, g, t, comparison, s, s_prime) -> None:
    for key, cnt in counts.items():
        if cnt == 0:
            raise DegenerateDesignError(
                f"empty cell {key} ({_CELL_TEXT[key]}) for g={g}, t={t}, "
                f"comparison={comparison}, s={s!r}, s'={s_prime!r}"
            )


def resolve_comparison(data, requested: str) -> str:
    """Apply the 'auto' rule: never-treated when available, else not-yet."""
    if requested in ("never", "notyet"):
        return requested
    if requested != "auto":
        raise UsageError(f"comparison must be 'never', 'notyet', or 'auto', got {requested!r}")
    return "never" if bool(np.asarray(data.never).any()) else "notyet"


def build_cells(data, g: int, t: int, spec: DesignSpec) -> CellIndicators:
    """Materialize per-unit cell flags for one (g, t) problem.

    Works for both PanelDataset and RepeatedCrossSection; for the latter the
    result also records each observation's sampling period and keeps only
    periods {g-1, t}.
    """
    g, t = int(g), int(t)
    if t < g:
        raise UsageError(f"require t >= g, got g={g}, t={t}")
    if (g - 1) not in data.times:
        raise DesignSpecTimeError(g, t, data.times)
    if t not in data.times:
        raise DesignSpecTimeError(g, t, data.times)
    if not spec.s or not spec.s_prime or spec.s == spec.s_prime:
        raise UsageError("DesignSpec must name two distinct subgroups s and s'")

    comparison = resolve_comparison(data, spec.comparison)
    never = data.never
    cohort = data.cohort
    subgroup = np.asarray(data.subgroup, dtype=object)

    in_gg = ~never & (cohort == g)
    if comparison == "never":
        if not never.any():
            raise DegenerateDesignError(
                "comparison='never' but no never-treated units exist; "
                "use comparison='notyet' for this design"
            )
        in_cc = never.copy()
    else:
        # untreated at t and not in cohort g: never-treated or cohort > t
        in_cc = never | (cohort > t)
        in_cc &= ~in_gg
    in_sub = (subgroup == spec.s) | (subgroup == spec.s_prime)
    keep = (in_gg | in_cc) & in_sub

    is_panel = isinstance(data, PanelDataset)
    if not is_panel:
        keep &= (data.time == g - 1) | (data.time == t)

    included = np.flatnonzero(keep)
    in_g = in_gg[included]
    in_s = subgroup[included] == spec.s
    counts = _cell_counts(in_g, in_s)
    _require_nonempty(counts, g, t, comparison, spec.s, spec.s_prime)

    if is_panel:
        index = tuple(data.unit_id[included])
        excluded = tuple(data.unit_id[np.flatnonzero(~keep)])
        period = None
    else:
        index = tuple(int(i) for i in included)
        excluded = tuple(int(i) for i in np.flatnonzero(~keep))
        period = data.time[included].copy()

    return CellIndicators(
        g=g,
        t=t,
        comparison=comparison,
        s=spec.s,
        s_prime=spec.s_prime,
        index=index,
        included=included,
        in_g=in_g,
        in_s=in_s,
        counts=counts,
        excluded_units=excluded,
        period=period,
    )


class DesignSpecTimeError(UsageError):
    def __init__(self, g, t, times):
        super().__init__(
            f"periods {g - 1} (base) and {t} (effect) must both be observed; "
            f"time set is {tuple(times)}"
        )


@dataclass(frozen=True)
class ValidationReport:
    """Overlap and cell-count report for every feasible (g, t) pair."""

    ok: bool
    findings: tuple[str, ...]
    tables: dict  # (g, t) -> {"counts": {...}, "shares": {...}, "flags": [...]}
    irreversibility: str

    def to_text(self) -> str:
        lines = ["design validation: " + ("pass" if self.ok else "FAIL")]
        for (g, t), tab in sorted(self.tables.items()):
            lines.append(f"  (g={g}, t={t}) counts={tab['counts']} shares=" +
                         "{" + ", ".join(f"{k}: {v:.4f}" for k, v in tab["shares"].items()) + "}")
            for f in tab["flags"]:
                lines.append(f"    flag: {f}")
        for f in self.findings:
            lines.append("  finding: " + f)
        lines.append("  irreversibility: " + self.irreversibility)
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "ok": self.ok,
                "findings": list(self.findings),
                "tables": {f"g={g},t={t}": tab for (g, t), tab in sorted(self.tables.items())},
                "irreversibility": self.irreversibility,
            },
            indent=2,
            sort_keys=True,
        )


def validate_design(data, spec: DesignSpec) -> ValidationReport:
    """Report cell counts/shares for every feasible (g, t); never raises.

    Empty cells are fatal findings.  Cell shares below the trim threshold are
    flagged.  Treatment irreversibility holds by construction (W is derived
    from the cohort), which the report documents rather than re-tests.
    """
    findings: list[str] = []
    tables: dict = {}
    times = data.times
    cohorts = sorted({int(c) for c, nv in zip(data.cohort, data.never) if not nv})
    ok = True
    for g in cohorts:
        if (g - 1) not in times:
            findings.append(f"cohort g={g}: base period {g - 1} unobserved; skipped")
            ok = False
            continue
        for t in [tt for tt in times if tt >= g]:
            try:
                cells = build_cells(data, g, t, spec)
            except DegenerateDesignError as exc:
                findings.append(f"(g={g}, t={t}): FATAL {exc}")
                tables[(g, t)] = {"counts": {}, "shares": {}, "flags": ["degenerate"]}
                ok = False
                continue
            n = cells.n
            shares = {k: v / n for k, v in cells.counts.items()}
            flags = [
                f"cell {k} share {v:.4f} < trim threshold {spec.trim_eps}"
                for k, v in shares.items()
                if v < spec.trim_eps
            ]
            if flags:
                ok = False
            tables[(g, t)] = {"counts": cells.counts, "shares": shares, "flags": flags}
    if not cohorts:
        findings.append("no treated cohorts present")
        ok = False
    irrev = (
        "pass by construction: treatment is derived as W_it = 1[t >= cohort], "
        "so W is non-decreasing in t for every unit"
    )
    return ValidationReport(ok=ok, findings=tuple(findings), tables=tables, irreversibility=irrev)


def bundled_path(name: str) -> Path:
    """Return the path of a data file shipped inside the package.

    Parameters
    ----------
    name : str
        File name, e.g. ``"example_panel.csv"``.

    Raises
    ------
    DataError
        If no bundled file with that name exists.  The message lists the
        available names.
    """
    root = Path(__file__).parent / "data"
    path = root / name
    if not path.is_file():
        have = sorted(p.name for p in root.glob("*")) if root.is_dir() else []
        raise DataError(
            f"no bundled file named {name!r}; available: {', '.join(have) or '(none)'}"
        )
    return path
