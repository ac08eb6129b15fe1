"""Monte Carlo estimators for degrees of freedom and related quantities.

Degrees of freedom of a procedure f is the summed covariance between fitted
values and the response, scaled by the noise variance.  The estimators here
draw replicated responses from a SignalSpec, fit all of them through the
batched fitting path, and form the empirical covariance across replications.
Standard errors come from a delete-one jackknife over replications, computed
in closed form from the accumulated sums rather than by refitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .fitters import FitProcedure, fit_path, refit_on_active_sets
from .model import DesignMatrix, RngSpec, SignalSpec

__all__ = [
    "DfEstimate",
    "OptimismEstimate",
    "ExperimentGrid",
    "CurveRow",
    "CurveTable",
    "draw_responses",
    "estimate_df",
    "estimate_sdf",
    "estimate_excess_df",
    "estimate_optimism",
    "run_grid",
]


def draw_responses(signal: SignalSpec, reps: int, seed: int, stream_offset: int = 0) -> np.ndarray:
    """Draw reps independent responses, shape (reps, n).

    Replication r uses the counter-based stream (seed, stream_offset + r),
    so draws are reproducible independently of execution order and disjoint
    stream blocks never collide.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    Y = np.empty((reps, signal.n))
    for r in range(reps):
        g = RngSpec(seed=seed, stream_id=stream_offset + r).generator()
        Y[r] = signal.mu + signal.sigma * g.standard_normal(signal.n)
    return Y


# ---------------------------------------------------------------------------
# covariance accumulation and jackknife
# ---------------------------------------------------------------------------

def _cov_df_terms(Y: np.ndarray, F: np.ndarray, sigma: float, mu=None):
    """The df estimate for fitted values F plus its delete-one values.

    With mu=None the covariance is centered at sample means with 1/(R-1)
    normalization; otherwise it is the known-mean form averaging
    f(y)(y - mu) with 1/R.  Leave-one-out values follow from the sums, so
    the jackknife costs O(Rn) rather than R refits.  With R=2 a deleted
    sample leaves a single point, whose sample covariance is taken as 0.
    """
    R = Y.shape[0]
    s2 = sigma * sigma
    if mu is None:
        Sy = Y.sum(axis=0)
        Sf = F.sum(axis=0)
        S1 = (F * Y).sum(axis=0)
        value = float((S1 - Sf * Sy / R).sum() / ((R - 1) * s2))
        if R == 2:
            loo = np.zeros(2)
        else:
            covs = (S1 - F * Y) - (Sf - F) * (Sy - Y) / (R - 1)
            loo = covs.sum(axis=1) / ((R - 2) * s2)
    else:
        t = (F * (Y - mu)).sum(axis=1)
        value = float(t.sum() / (R * s2))
        loo = (t.sum() - t) / ((R - 1) * s2)
    return value, loo


def _jackknife_se(loo: np.ndarray) -> float:
    R = loo.shape[0]
    dev = loo - loo.mean()
    return float(np.sqrt((R - 1) / R * np.sum(dev * dev)))


def _delete_one_means(v: np.ndarray) -> np.ndarray:
    R = v.shape[0]
    return (v.sum() - v) / (R - 1)


def _ranks_for_masks(X: np.ndarray, masks: np.ndarray, cache: dict | None = None) -> np.ndarray:
    """rank(X restricted to each row's active columns), one value per row."""
    uniq, inv = np.unique(masks, axis=0, return_inverse=True)
    vals = np.empty(uniq.shape[0])
    for g in range(uniq.shape[0]):
        key = uniq[g].tobytes()
        r = None if cache is None else cache.get(key)
        if r is None:
            S = np.flatnonzero(uniq[g])
            r = 0.0 if S.size == 0 else float(np.linalg.matrix_rank(X[:, S]))
            if cache is not None:
                cache[key] = r
        vals[g] = r
    return vals[inv]


def _check_center(center: str):
    if center not in ("sample", "signal"):
        raise ValueError("center must be 'sample' or 'signal'")


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DfEstimate:
    """A Monte Carlo estimate with its jackknife standard error, plus the
    average active-set size and average active-design rank over
    replications."""

    value: float
    std_error: float
    reps: int
    mean_active: float
    mean_rank: float


def _require_reps(reps: int):
    if reps < 2:
        raise ValueError("reps must be at least 2")


def estimate_df(proc: FitProcedure, signal: SignalSpec, reps: int, seed: int,
                *, center: str = "sample") -> DfEstimate:
    """Estimate the degrees of freedom of proc under the given signal.

    Draws reps responses, fits each, and sums the per-coordinate empirical
    covariances between fitted value and response, divided by sigma^2.
    center='sample' centers at sample means (1/(reps-1)); center='signal'
    centers the response at the known mean (1/reps), a lower-variance
    variant.
    """
    _require_reps(reps)
    _check_center(center)
    Y = draw_responses(signal, reps, seed)
    fits = proc.fit_many(Y)
    mu = signal.mu if center == "signal" else None
    value, loo = _cov_df_terms(Y, fits.fitted, signal.sigma, mu)
    active_counts = fits.active.sum(axis=1).astype(float)
    ranks = _ranks_for_masks(proc.design.values, fits.active)
    return DfEstimate(
        value=value,
        std_error=_jackknife_se(loo),
        reps=reps,
        mean_active=float(active_counts.mean()),
        mean_rank=float(ranks.mean()),
    )


def estimate_sdf(proc: FitProcedure, signal: SignalSpec, reps: int, seed: int,
                 *, center: str = "sample") -> DfEstimate:
    """Estimate the search degrees of freedom of proc.

    Each replication's active set is refit by least squares, the df
    estimator runs on the refitted values, and the average rank of the
    active design is subtracted.  Selection and covariance accumulation use
    the same draws; the definition couples them.
    """
    _require_reps(reps)
    _check_center(center)
    Y = draw_responses(signal, reps, seed)
    fits = proc.fit_many(Y)
    X = proc.design.values
    _, refitted = refit_on_active_sets(X, Y, fits.active)
    mu = signal.mu if center == "signal" else None
    value, loo = _cov_df_terms(Y, refitted, signal.sigma, mu)
    ranks = _ranks_for_masks(X, fits.active)
    loo_sdf = loo - _delete_one_means(ranks)
    return DfEstimate(
        value=value - float(ranks.mean()),
        std_error=_jackknife_se(loo_sdf),
        reps=reps,
        mean_active=float(fits.active.sum(axis=1).mean()),
        mean_rank=float(ranks.mean()),
    )


def estimate_excess_df(proc: FitProcedure, signal: SignalSpec, reps: int, seed: int,
                       *, center: str = "sample") -> DfEstimate:
    """Estimate df minus the expected active-set size, with the standard
    error of the paired difference (the two terms share draws, so their
    difference is far less noisy than either term alone)."""
    _require_reps(reps)
    _check_center(center)
    Y = draw_responses(signal, reps, seed)
    fits = proc.fit_many(Y)
    mu = signal.mu if center == "signal" else None
    value, loo = _cov_df_terms(Y, fits.fitted, signal.sigma, mu)
    active_counts = fits.active.sum(axis=1).astype(float)
    ranks = _ranks_for_masks(proc.design.values, fits.active)
    loo_diff = loo - _delete_one_means(active_counts)
    return DfEstimate(
        value=value - float(active_counts.mean()),
        std_error=_jackknife_se(loo_diff),
        reps=reps,
        mean_active=float(active_counts.mean()),
        mean_rank=float(ranks.mean()),
    )


class OptimismEstimate(tuple):
    """The pair (optimism, expected) where optimism is the estimated
    out-of-sample minus in-sample squared error and expected = 2 sigma^2
    times the df estimate from the same draws.  Unpacks as a 2-tuple;
    jackknife standard errors ride along as attributes optimism_se (for the
    first element) and gap_se (for the difference of the two elements).
    """

    optimism_se: float
    gap_se: float
    reps: int

    def __new__(cls, optimism: float, expected: float, optimism_se: float,
                gap_se: float, reps: int):
        self = tuple.__new__(cls, (float(optimism), float(expected)))
        self.optimism_se = float(optimism_se)
        self.gap_se = float(gap_se)
        self.reps = int(reps)
        return self

    @property
    def optimism(self) -> float:
        return self[0]

    @property
    def expected(self) -> float:
        return self[1]

    def __repr__(self):
        return (
            f"OptimismEstimate(optimism={self[0]!r}, expected={self[1]!r}, "
            f"optimism_se={self.optimism_se!r}, gap_se={self.gap_se!r}, "
            f"reps={self.reps!r})"
        )


def estimate_optimism(proc: FitProcedure, signal: SignalSpec, reps: int, seed: int,
                      *, center: str = "sample") -> OptimismEstimate:
    """Estimate optimism directly and via the df route, for comparison.

    Per replication, an independent copy y' of the response is drawn
    (streams reps..2*reps-1) and the gap ||y' - f(y)||^2 - ||y - f(y)||^2
    is averaged.  The second element of the returned pair is 2 sigma^2
    times the df estimate computed from the same y draws.
    """
    _require_reps(reps)
    _check_center(center)
    Y = draw_responses(signal, reps, seed)
    Yp = draw_responses(signal, reps, seed, stream_offset=reps)
    fits = proc.fit_many(Y)
    gap = ((Yp - fits.fitted) ** 2).sum(axis=1) - ((Y - fits.fitted) ** 2).sum(axis=1)
    optimism = float(gap.mean())
    mu = signal.mu if center == "signal" else None
    df_value, df_loo = _cov_df_terms(Y, fits.fitted, signal.sigma, mu)
    scale = 2.0 * signal.sigma ** 2
    gap_loo = _delete_one_means(gap)
    return OptimismEstimate(
        optimism=optimism,
        expected=scale * df_value,
        optimism_se=_jackknife_se(gap_loo),
        gap_se=_jackknife_se(gap_loo - scale * df_loo),
        reps=reps,
    )


# ---------------------------------------------------------------------------
# grids of tuning values
# ---------------------------------------------------------------------------

_GRID_KINDS = (
    "lasso",
    "best-subset",
    "relaxed-lasso",
    "ridge",
    "hard-threshold",
    "soft-threshold",
)


@dataclass(frozen=True)
class ExperimentGrid:
    """One procedure swept over a grid of tuning values with shared draws."""

    kind: str
    lambda_grid: tuple
    design: DesignMatrix
    signal: SignalSpec
    reps: int
    seed: int
    include_sdf: bool = True
    center: str = "sample"

    def __post_init__(self):
        if self.kind not in _GRID_KINDS:
            raise ValueError(f"unsupported grid procedure kind {self.kind!r}")
        grid = tuple(float(l) for l in self.lambda_grid)
        if len(grid) == 0:
            raise ValueError("lambda_grid must be nonempty")
        if any(l < 0 or not np.isfinite(l) for l in grid):
            raise ValueError("lambda_grid values must be finite and nonnegative")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("lambda_grid must be strictly increasing")
        object.__setattr__(self, "lambda_grid", grid)
        _require_reps(self.reps)
        _check_center(self.center)
        if self.signal.n != self.design.n:
            raise ValueError("signal length must match design rows")


@dataclass(frozen=True)
class CurveRow:
    """Estimates at one grid value."""

    lam: float
    mean_active: float
    mean_rank: float
    df: float
    df_se: float
    sdf: float
    sdf_se: float
    excess_se: float


@dataclass(frozen=True)
class CurveTable:
    """Rows of run_grid output, one per tuning value, in grid order."""

    kind: str
    reps: int
    seed: int
    rows: tuple

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def run_grid(grid: ExperimentGrid) -> CurveTable:
    """Estimate df (and sdf unless disabled) at every grid value.

    All grid values share the same response draws (common random numbers),
    so curves are smooth in lambda and differences across lambda are paired.
    Everything downstream of the draws is deterministic, so identical grids
    give bit-identical tables.
    """
    Y = draw_responses(grid.signal, grid.reps, grid.seed)
    X = grid.design.values
    sigma = grid.signal.sigma
    mu = grid.signal.mu if grid.center == "signal" else None
    R = grid.reps

    if grid.kind == "best-subset":
        fits_per_lam = fit_path(grid.kind, grid.design, Y, grid.lambda_grid)
    else:
        fits_per_lam = []
        for li, lam in enumerate(grid.lambda_grid):
            proc = FitProcedure(kind=grid.kind, lam=lam, design=grid.design)
            try:
                fits_per_lam.append(proc.fit_many(Y))
            except NumericalError as err:
                raise NumericalError(
                    f"grid index {li} (lambda={lam:g}): {err}",
                    diagnostic={"grid_index": li, "lam": lam},
                ) from err

    rank_cache: dict = {}
    rows = []
    for lam, fits in zip(grid.lambda_grid, fits_per_lam):
        df_value, df_loo = _cov_df_terms(Y, fits.fitted, sigma, mu)
        active_counts = fits.active.sum(axis=1).astype(float)
        ranks = _ranks_for_masks(X, fits.active, rank_cache)
        excess_se = _jackknife_se(df_loo - _delete_one_means(active_counts))
        if grid.include_sdf:
            _, refitted = refit_on_active_sets(X, Y, fits.active)
            refit_value, refit_loo = _cov_df_terms(Y, refitted, sigma, mu)
            sdf = refit_value - float(ranks.mean())
            sdf_se = _jackknife_se(refit_loo - _delete_one_means(ranks))
        else:
            sdf = float("nan")
            sdf_se = float("nan")
        rows.append(CurveRow(
            lam=float(lam),
            mean_active=float(active_counts.mean()),
            mean_rank=float(ranks.mean()),
            df=df_value,
            df_se=_jackknife_se(df_loo),
            sdf=sdf,
            sdf_se=sdf_se,
            excess_se=excess_se,
        ))
    return CurveTable(kind=grid.kind, reps=grid.reps, seed=grid.seed, rows=tuple(rows))
