"""Command-line front end: estimate, simulate, validate.

Thin wrapper over the library — every CLI result equals the corresponding
library call exactly.  Reports are machine-readable (report.json embeds the
fully resolved configuration and, for simulations, the master seed, so any
report can be reproduced byte-for-byte by re-running from its embedded
config).  Exit codes: 0 ok, 2 usage, 3 data, 4 numerical, 5 degenerate
design.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .cdatt import estimate_cdatt, estimate_cdatt_rc
from .dataset import (
    DesignSpec,
    load_panel,
    load_repeated_cross_section,
    validate_design,
)
from .datt import (
    estimate_datt_3wfe,
    estimate_datt_adjusted,
    estimate_datt_unadjusted,
)
from .errors import TridiffError, UsageError
from .simlab import TABLE_SUITE, default_dgp_spec, dgp_spec_from_json, run_monte_carlo

#: Which estimators identify which estimand.  3WFE and the unadjusted
#: triple difference identify the DATT only.
VALID_MATRIX = {
    "datt": ("unadjusted", "3wfe", "ra", "ipw", "dr"),
    "cdatt": ("ra", "ipw", "dr"),
    "both": ("ra", "ipw", "dr"),
}

_REPORT_COLUMNS = ("estimand", "estimator", "comparison", "g", "t",
                   "estimate", "se", "ci_lo", "ci_hi")


@dataclass
class RunConfig:
    """Fully resolved run description (flags > config file > defaults)."""

    command: str
    data: str | None = None
    rc: bool = False
    estimand: str = "cdatt"
    estimator: str = "dr"
    g: int | None = None
    t: int | None = None
    s: str | None = None
    sprime: str | None = None
    comparison: str = "auto"
    covariates: tuple[str, ...] | None = None
    ps_covariates: tuple[str, ...] | None = None
    or_covariates: tuple[str, ...] | None = None
    trim: bool = False
    trim_eps: float = 0.005
    level: float = 0.95
    scenario: str | None = None
    suite: tuple[str, ...] = TABLE_SUITE
    trials: int = 1000
    seed: int = 20250101
    jobs: int = 1
    out: str | None = None
    formats: tuple[str, ...] = ("json", "csv")
    dump_trials: bool = False

    def out_dir(self) -> Path:
        base = self.out if self.out is not None else os.environ.get("TRIDIFF_OUT", ".")
        return Path(base)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("covariates", "ps_covariates", "or_covariates", "suite", "formats"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tridiff",
        description="Triple-difference estimation (DATT / causal DATT) and a "
                    "seeded simulation laboratory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file; explicit flags override its values")
        p.add_argument("--out", help="output directory (default $TRIDIFF_OUT or '.')")
        p.add_argument("--formats", help="comma list of report formats: json,csv")

    def add_design(p):
        p.add_argument("--data", help="input CSV (panel, or repeated cross-section with --rc)")
        p.add_argument("--rc", action="store_true", default=None,
                       help="input is a repeated cross-section")
        p.add_argument("--s", help="subgroup of interest")
        p.add_argument("--sprime", help="comparison subgroup")
        p.add_argument("--comparison", choices=("auto", "never", "notyet"))
        p.add_argument("--covariates", help="comma list of covariate columns (default: all)")
        p.add_argument("--ps-covariates", dest="ps_covariates",
                       help="comma list for the propensity model only")
        p.add_argument("--or-covariates", dest="or_covariates",
                       help="comma list for the outcome models only")
        p.add_argument("--trim", action="store_true", default=None,
                       help="drop trim violations instead of erroring")
        p.add_argument("--trim-eps", dest="trim_eps", type=float,
                       help="overlap threshold (default 0.005)")
        p.add_argument("--level", type=float, help="confidence level (default 0.95)")

    est = sub.add_parser("estimate", help="estimate effects from a CSV")
    add_common(est)
    add_design(est)
    est.add_argument("--estimand", choices=("datt", "cdatt", "both"))
    est.add_argument("--estimator", choices=("unadjusted", "3wfe", "ra", "ipw", "dr"))
    est.add_argument("--g", type=int, help="treatment cohort (default: every feasible pair)")
    est.add_argument("--t", type=int, help="outcome period (default: every feasible pair)")
    est.add_argument("--jobs", type=int, help="parallel (g,t) estimations")

    sim = sub.add_parser("simulate", help="run a seeded Monte Carlo study")
    add_common(sim)
    sim.add_argument("--scenario", help="DgpSpec JSON file (default: calibrated scenario)")
    sim.add_argument("--suite", help="comma list of estimators "
                                     f"(default: {','.join(TABLE_SUITE)})")
    sim.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    sim.add_argument("--seed", type=int, help="master seed")
    sim.add_argument("--jobs", type=int, help="parallel trial execution")
    sim.add_argument("--rc", action="store_true", default=None,
                     help="simulate repeated cross-sections")
    sim.add_argument("--level", type=float, help="confidence level (default 0.95)")
    sim.add_argument("--dump-trials", dest="dump_trials", action="store_true", default=None,
                     help="also write per-trial estimates (trials.csv)")

    val = sub.add_parser("validate", help="check a design before estimating")
    add_common(val)
    add_design(val)
    return parser


_LIST_KEYS = ("covariates", "ps_covariates", "or_covariates", "suite", "formats")


def _as_tuple(value) -> tuple[str, ...]:
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",")]
        return tuple(p for p in parts if p)
    return tuple(str(v) for v in value)


def parse_config(argv, environ=None) -> RunConfig:
    """Resolve flags, optional JSON config file, and defaults into a RunConfig.

    Precedence: explicit flag > config-file value > built-in default.  The
    config file may carry any RunConfig field (including "command", which
    must then match the subcommand); unknown keys are rejected.  Input paths
    are checked here, and invalid estimand/estimator pairs are refused with
    the valid matrix.
    """
    args = _build_parser().parse_args(argv)
    command = args.command
    flagged = {k: v for k, v in vars(args).items()
               if k not in ("command", "config") and v is not None}

    file_values: dict = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(raw) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "command" in raw and raw["command"] != command:
            raise UsageError(
                f"config file is for command {raw['command']!r}, not {command!r}"
            )
        file_values = {k: v for k, v in raw.items() if k != "command"}

    merged: dict = {"command": command}
    defaults = {f.name: f.default for f in fields(RunConfig) if f.name != "command"}
    for key, default in defaults.items():
        if key in flagged:
            merged[key] = flagged[key]
        elif key in file_values:
            merged[key] = file_values[key]
        else:
            merged[key] = default
    for key in _LIST_KEYS:
        if merged[key] is not None and not isinstance(merged[key], tuple):
            merged[key] = _as_tuple(merged[key])
    config = RunConfig(**merged)
    _check_config(config)
    return config


def _check_config(config: RunConfig) -> None:
    if config.command in ("estimate", "validate"):
        if not config.data:
            raise UsageError(f"{config.command} requires --data")
        if not Path(config.data).exists():
            raise UsageError(f"data file not found: {config.data}")
    if config.command == "estimate":
        if config.estimand not in VALID_MATRIX:
            raise UsageError(f"estimand must be one of {sorted(VALID_MATRIX)}")
        allowed = VALID_MATRIX[config.estimand]
        if config.estimator not in allowed:
            matrix = "; ".join(f"{k}: {', '.join(v)}" for k, v in VALID_MATRIX.items())
            raise UsageError(
                f"estimator {config.estimator!r} cannot target estimand "
                f"{config.estimand!r}. Valid combinations — {matrix}"
            )
        if config.rc and (config.estimand != "cdatt" or config.estimator != "dr"):
            raise UsageError(
                "repeated cross-sections support --estimand cdatt --estimator dr only"
            )
        if (config.g is None) != (config.t is None):
            raise UsageError("supply both --g and --t, or neither (all feasible pairs)")
    if config.command == "simulate":
        if config.scenario is not None and not Path(config.scenario).exists():
            raise UsageError(f"scenario file not found: {config.scenario}")
        if config.trials < 1:
            raise UsageError("trials must be >= 1")
    if config.jobs < 1:
        raise UsageError("jobs must be >= 1")
    bad = [f for f in config.formats if f not in ("json", "csv")]
    if bad:
        raise UsageError(f"unknown report formats: {bad}")
    if not (0.0 < config.level < 1.0):
        raise UsageError(f"confidence level must lie in (0, 1), got {config.level}")


def _design_spec(config: RunConfig, estimand: str) -> DesignSpec:
    return DesignSpec(
        estimand=estimand,
        estimator=config.estimator,
        comparison=config.comparison,
        s=config.s,
        s_prime=config.sprime,
        covariates=config.covariates,
        ps_covariates=config.ps_covariates,
        or_covariates=config.or_covariates,
        trim_eps=config.trim_eps,
        trim=config.trim,
        level=config.level,
    )


def _load(config: RunConfig):
    if config.rc:
        return load_repeated_cross_section(config.data)
    return load_panel(config.data)


def _resolve_subgroups(config: RunConfig, data) -> RunConfig:
    """Fill --s/--sprime from the data when it has exactly two levels."""
    if config.s and config.sprime:
        return config
    levels = tuple(data.subgroup_levels)
    if len(levels) == 2 and not config.s and not config.sprime:
        config.s, config.sprime = sorted(levels)
        return config
    raise UsageError(
        "supply --s and --sprime (data has subgroup levels: "
        + ", ".join(map(str, levels)) + ")"
    )


def _feasible_pairs(data) -> list[tuple[int, int]]:
    cohorts = sorted({int(g) for g, nv in zip(data.cohort, data.never) if not nv})
    times = set(data.times)
    return [(g, t) for g in cohorts for t in sorted(times) if t >= g and (g - 1) in times]


def _estimate_job(args):
    data, g, t, spec, estimand, estimator, rc = args
    if rc:
        return estimate_cdatt_rc(data, g, t, spec)
    if estimand == "datt":
        if estimator == "unadjusted":
            return estimate_datt_unadjusted(data, g, t, spec)
        if estimator == "3wfe":
            return estimate_datt_3wfe(data, g, t, spec)
        return estimate_datt_adjusted(data, g, t, spec, method=estimator)
    return estimate_cdatt(data, g, t, spec, method=estimator)


def _run_estimate(config: RunConfig) -> dict:
    data = _load(config)
    config = _resolve_subgroups(config, data)
    pairs = [(config.g, config.t)] if config.g is not None else _feasible_pairs(data)
    if not pairs:
        raise UsageError("no feasible (g, t) pairs in the data")
    estimands = ("datt", "cdatt") if config.estimand == "both" else (config.estimand,)
    jobs = [
        (data, g, t, _design_spec(config, estimand), estimand, config.estimator, config.rc)
        for estimand in estimands
        for g, t in pairs
    ]
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_estimate_job, jobs))
    else:
        results = [_estimate_job(job) for job in jobs]
    return {"results": [e.to_dict() for e in results]}


def _run_validate(config: RunConfig) -> dict:
    data = _load(config)
    config = _resolve_subgroups(config, data)
    report = validate_design(data, _design_spec(config, "cdatt"))
    return {"validation": json.loads(report.to_json())}


def _run_simulate(config: RunConfig):
    spec = dgp_spec_from_json(config.scenario) if config.scenario else default_dgp_spec()
    return run_monte_carlo(
        spec,
        suite=config.suite,
        trials=config.trials,
        master_seed=config.seed,
        n_jobs=config.jobs,
        level=config.level,
        rc=config.rc,
        keep_per_trial=config.dump_trials,
    )


def _estimate_csv(results: list[dict]) -> str:
    lines = [",".join(_REPORT_COLUMNS)]
    for row in results:
        cells = []
        for key in _REPORT_COLUMNS:
            value = row[key]
            cells.append(repr(value) if isinstance(value, float) else str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _validation_csv(validation: dict) -> str:
    lines = ["g,t,cell,count,share"]
    for key, table in sorted(validation.get("tables", {}).items()):
        g_part, t_part = key.split(",")
        g = g_part.removeprefix("g=")
        t = t_part.removeprefix("t=")
        for cell in sorted(table["counts"]):
            lines.append(
                f"{g},{t},{cell},{table['counts'][cell]},{repr(table['shares'][cell])}"
            )
    return "\n".join(lines) + "\n"


def execute(config: RunConfig, stdout=None) -> int:
    """Run the configured command and write the report artifacts.

    Always echoes the resolved config (provenance) to stdout; writes
    report.json and/or report.csv into the output directory, plus trials.csv
    for a simulation run with --dump-trials.
    """
    stdout = stdout or sys.stdout
    out_dir = config.out_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    print("resolved config: " + json.dumps(config.to_dict(), sort_keys=True), file=stdout)

    if config.command == "simulate":
        mc = _run_simulate(config)
        payload = {"config": config.to_dict(), "master_seed": mc.master_seed,
                   "report": json.loads(mc.to_json())}
        csv_text = mc.to_csv()
        if config.dump_trials:
            (out_dir / "trials.csv").write_text(mc.per_trial_csv())
    elif config.command == "estimate":
        body = _run_estimate(config)
        payload = {"config": config.to_dict(), **body}
        csv_text = _estimate_csv(body["results"])
    else:
        body = _run_validate(config)
        payload = {"config": config.to_dict(), **body}
        csv_text = _validation_csv(body["validation"])

    written = []
    if "json" in config.formats:
        path = out_dir / "report.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        written.append(str(path))
    if "csv" in config.formats:
        path = out_dir / "report.csv"
        path.write_text(csv_text)
        written.append(str(path))
    for path in written:
        print(f"wrote {path}", file=stdout)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse_config(argv)
        return execute(config)
    except TridiffError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
