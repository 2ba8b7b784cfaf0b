"""Nuisance models: 4-category multinomial logit and per-cell least squares.

The propensity model covers the four treatment x subgroup cells of one
(g, t) problem in the fixed order (g_s, g_sp, c_s, c_sp) with c_sp as the
base category; probabilities come from a softmax with the base linear index
pinned at zero.  Probit is a documented but unimplemented alternative link.

Both fitters standardize non-constant columns internally (mean 0, sd 1) and
map coefficients back, purely for conditioning; predictions are invariant to
the standardization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DataError, RankError

CATEGORY_ORDER = ("g_s", "g_sp", "c_s", "c_sp")
N_CATEGORIES = 4

_PROB_FLOOR = 1e-12  # clamp for log evaluation only, never in returned probabilities


@dataclass(frozen=True)
class PropensityModel:
    """Fitted multinomial logit over the four cells.

    ``theta`` has one row per non-base category (3 x p, original scale).
    """

    theta: np.ndarray
    category_order: tuple[str, ...]
    iterations: int
    grad_norm: float
    converged: bool
    ll_trace: tuple[float, ...]
    warnings: tuple[str, ...]

    @property
    def n_features(self) -> int:
        return self.theta.shape[1]


@dataclass(frozen=True)
class OutcomeModel:
    """Least-squares fit; beta[0] is the intercept."""

    beta: np.ndarray
    cell: str
    target: str  # "delta" (Y_t - Y_{g-1}) or "level" (Y within one period)
    residual_variance: float
    n: int
    rank: int
    ridge_used: bool
    collinear: tuple[str, ...] = ()


def _standardize(X: np.ndarray, center: bool):
    """Scale (and optionally center) non-constant columns; constants pass through."""
    sd = X.std(axis=0)
    const = sd == 0.0
    sd = np.where(const, 1.0, sd)
    mean = X.mean(axis=0) if center else np.zeros(X.shape[1])
    mean = np.where(const, 0.0, mean)
    return (X - mean) / sd, mean, sd


def _find_intercept(X: np.ndarray) -> int | None:
    for j in range(X.shape[1]):
        col = X[:, j]
        if col[0] != 0 and np.all(col == col[0]):
            return j
    return None


def _softmax_with_base(eta: np.ndarray) -> np.ndarray:
    """Stable softmax over [eta, 0]; returns (n, 4) probabilities."""
    full = np.concatenate([eta, np.zeros((eta.shape[0], 1))], axis=1)
    full -= full.max(axis=1, keepdims=True)
    ex = np.exp(full)
    return ex / ex.sum(axis=1, keepdims=True)


def fit_multinomial_logit(
    X: np.ndarray,
    labels: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 100,
    ridge: float = 1e-8,
) -> PropensityModel:
    """Newton-Raphson fit with step-halving on the penalized log-likelihood.

    ``X`` is the full design matrix (n, p), intercept column included by the
    caller; ``labels`` are integers 0..3 in CATEGORY_ORDER with 3 the base.
    The ridge term (lambda/2)||theta||^2 keeps the Hessian invertible; at the
    default 1e-8 it is a pure conditioning device.  Deterministic: zero start,
    no randomness, so refits on identical input reproduce theta bit for bit.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n, p = X.shape
    if n < N_CATEGORIES:
        raise DataError(f"need at least {N_CATEGORIES} rows to fit the propensity model, got {n}")
    if labels.min() < 0 or labels.max() >= N_CATEGORIES:
        raise DataError("labels must be integers in 0..3")
    counts = np.bincount(labels, minlength=N_CATEGORIES)
    if (counts == 0).any():
        missing = [CATEGORY_ORDER[i] for i in np.flatnonzero(counts == 0)]
        raise DataError(f"every category must appear at least once; missing: {missing}")

    icol = _find_intercept(X)
    Z, mean, sd = _standardize(X, center=icol is not None)
    Y = np.zeros((n, N_CATEGORIES - 1))
    for c in range(N_CATEGORIES - 1):
        Y[:, c] = labels == c

    theta = np.zeros((N_CATEGORIES - 1, p))
    trace: list[float] = []

    def penalized_ll(th: np.ndarray) -> float:
        pr = _softmax_with_base(Z @ th.T)
        picked = np.clip(pr[np.arange(n), labels], _PROB_FLOOR, None)
        return float(np.log(picked).sum() - 0.5 * ridge * (th * th).sum())

    ll = penalized_ll(theta)
    trace.append(ll)
    grad_norm = np.inf
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        probs = _softmax_with_base(Z @ theta.T)
        G = Z.T @ (Y - probs[:, : N_CATEGORIES - 1]) - ridge * theta.T  # (p, 3)
        grad_norm = float(np.max(np.abs(G)))
        if grad_norm < tol:
            converged = True
            break
        # Negated Hessian of the penalized log-likelihood, category-major blocks.
        H = np.zeros((3 * p, 3 * p))
        for a in range(3):
            for b in range(3):
                w = probs[:, a] * ((a == b) - probs[:, b])
                H[a * p : (a + 1) * p, b * p : (b + 1) * p] = (Z * w[:, None]).T @ Z
            H[a * p : (a + 1) * p, a * p : (a + 1) * p] += ridge * np.eye(p)
        g_flat = G.T.reshape(-1)
        try:
            step = np.linalg.solve(H, g_flat).reshape(3, p)
        except np.linalg.LinAlgError:
            step = np.linalg.solve(H + 1e-6 * np.eye(3 * p), g_flat).reshape(3, p)
        scale, improved = 1.0, False
        cand, cand_ll = theta, ll
        for _ in range(40):
            cand = theta + scale * step
            cand_ll = penalized_ll(cand)
            if cand_ll >= ll - 1e-12:
                improved = True
                break
            scale *= 0.5
        if not improved:
            break  # stalled: no step improves the objective
        theta, ll = cand, cand_ll
        trace.append(ll)

    if not converged:
        raise ConvergenceError(
            f"multinomial logit did not converge after {it} iterations "
            f"(final gradient max-norm {grad_norm:.3e}, tol {tol:.1e})"
        )

    warnings: list[str] = []
    probs = _softmax_with_base(Z @ theta.T)
    if float(probs.min()) < _PROB_FLOOR:
        warnings.append(
            "quasi-separation: fitted probabilities below 1e-12 at convergence; "
            "estimates may be unstable"
        )

    theta_orig = theta / sd
    if icol is not None:
        shift = theta @ (mean / sd)  # (3,) centering constant folded into the intercept
        theta_orig[:, icol] -= shift / X[0, icol]
    return PropensityModel(
        theta=theta_orig,
        category_order=CATEGORY_ORDER,
        iterations=it,
        grad_norm=grad_norm,
        converged=converged,
        ll_trace=tuple(trace),
        warnings=tuple(warnings),
    )


def predict_cell_probabilities(model: PropensityModel, X: np.ndarray) -> np.ndarray:
    """Cell probabilities (pi_gs, pi_gsp, pi_cs, pi_csp) for one row or many."""
    X = np.asarray(X, dtype=np.float64)
    one = X.ndim == 1
    if one:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise DataError(f"expected {model.n_features} design columns, got {X.shape[1]}")
    probs = _softmax_with_base(X @ model.theta.T)
    return probs[0] if one else probs


def fit_least_squares(
    X: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray | None = None,
    cell: str = "",
    target: str = "delta",
    column_names: tuple[str, ...] | None = None,
) -> OutcomeModel:
    """Weighted least squares via the normal equations (ridge 1e-10 rescue).

    ``X`` holds covariates only; an intercept is prepended, so ``beta`` has
    length k+1.  Residual variance is weighted SSR / (n - rank).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=np.float64)
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise DataError("least-squares inputs must be finite")
    n, k = X.shape
    D = np.column_stack([np.ones(n), X])
    p = k + 1
    if n < p:
        raise DataError(f"need at least {p} rows for {p} coefficients, got {n}")
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if (w < 0).any():
            raise DataError("weights must be nonnegative")

    Z, mean, sd = _standardize(D, center=True)
    Zw = Z * w[:, None]
    gram = Z.T @ Zw
    rhs = Zw.T @ y
    rank = int(np.linalg.matrix_rank(Z * np.sqrt(w)[:, None]))
    collinear: tuple[str, ...] = ()
    ridge_used = False
    if rank < p:
        # deterministic ridge rescue: predictions stay well-defined even
        # though the coefficient split across collinear columns is arbitrary
        ridge_used = True
        collinear = _collinear_columns(D, column_names)
        beta_z = np.linalg.solve(gram + 1e-10 * np.eye(p), rhs)
    else:
        try:
            beta_z = np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError:
            ridge_used = True
            beta_z = np.linalg.solve(gram + 1e-10 * np.eye(p), rhs)
    if not np.isfinite(beta_z).all():
        raise RankError(_collinear_message(D, column_names))
    resid = y - Z @ beta_z
    dof = max(n - rank, 1)
    rv = float((w * resid * resid).sum() / dof)

    beta = beta_z / sd
    beta[0] -= float((beta_z[1:] * (mean[1:] / sd[1:])).sum())
    return OutcomeModel(
        beta=beta,
        cell=cell,
        target=target,
        residual_variance=rv,
        n=n,
        rank=rank,
        ridge_used=ridge_used,
        collinear=collinear,
    )


def _collinear_columns(D: np.ndarray, names: tuple[str, ...] | None) -> tuple[str, ...]:
    """Greedy maximal independent column set; everything else is reported."""
    labels = ["intercept"] + (
        list(names) if names is not None else [f"x{j}" for j in range(1, D.shape[1])]
    )
    kept: list[int] = []
    out: list[str] = []
    for j in range(D.shape[1]):
        if np.linalg.matrix_rank(D[:, kept + [j]]) > len(kept):
            kept.append(j)
        else:
            out.append(labels[j])
    return tuple(out)


def _collinear_message(D: np.ndarray, names) -> str:
    cols = _collinear_columns(D, names)
    return "design matrix rank deficient beyond ridge rescue; collinear column(s): " + ", ".join(cols)


def predict_outcome(model: OutcomeModel, X: np.ndarray) -> np.ndarray | float:
    """Affine prediction intercept + beta . x for one row or many."""
    X = np.asarray(X, dtype=np.float64)
    one = X.ndim <= 1
    X2 = np.atleast_2d(X) if X.ndim else np.array([[float(X)]])
    if X2.shape[1] != len(model.beta) - 1:
        raise DataError(f"expected {len(model.beta) - 1} covariates, got {X2.shape[1]}")
    pred = model.beta[0] + X2 @ model.beta[1:]
    return float(pred[0]) if one else pred
