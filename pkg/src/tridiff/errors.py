"""Exception hierarchy shared by all tridiff modules.

Each branch maps to one CLI exit code so that scripted callers can
dispatch on failure class without parsing messages:

    UsageError      -> 2   bad flags, bad config, invalid estimand/estimator mix
    DataError       -> 3   unreadable/ill-formed input data
    NumericalError  -> 4   model fitting failed (non-convergence, rank loss)
    DesignError     -> 5   degenerate design (empty cells, overlap violations)
"""

from __future__ import annotations


class TridiffError(Exception):
    """Base class for all tridiff errors."""

    exit_code = 1


class UsageError(TridiffError):
    """Invalid configuration or argument combination."""

    exit_code = 2


class DataError(TridiffError):
    """Input data violates the format contract."""

    exit_code = 3


class SchemaError(DataError):
    """Required column missing or mis-typed."""


class BalanceError(DataError):
    """A unit lacks an outcome for some period (unbalanced panel)."""


class ParseError(DataError):
    """A cell could not be parsed as the required type."""


class NumericalError(TridiffError):
    """A numerical routine failed to produce a reliable result."""

    exit_code = 4


class ConvergenceError(NumericalError):
    """Iterative fit did not converge within the iteration budget."""


class RankError(NumericalError):
    """Design matrix is rank deficient beyond ridge rescue."""


class DesignError(TridiffError):
    """The study design is degenerate for the requested contrast."""

    exit_code = 5


class DegenerateDesignError(DesignError):
    """A required treatment/subgroup cell is empty."""


class OverlapError(DesignError):
    """Fitted propensities fall below the trim threshold."""
