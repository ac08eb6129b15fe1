"""Fitting procedures: thresholding, lasso, best subset, relaxed lasso, ridge.

Each procedure is a deterministic map y -> (coefficients, active set, fitted
values).  Two call surfaces are provided: single-response functions matching
the mathematical definitions (`lasso_solve`, `best_subset_solve`, ...), and a
batched path (`FitProcedure.fit_many`, `fit_path`) that fits many responses
against the same design at once.  The Monte Carlo estimators lean on the
batched path; a plain Python loop over 10^4 replications would dominate the
runtime budget otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, NumericalError
from .model import DesignMatrix

__all__ = [
    "FitProcedure",
    "FitOutput",
    "BatchFit",
    "soft_threshold",
    "hard_threshold",
    "least_squares_on_support",
    "lasso_solve",
    "lasso_kkt_residual",
    "best_subset_solve",
    "relaxed_lasso_fit",
    "ridge_fit",
    "refit_on_active_sets",
    "fit_path",
]

KINDS = (
    "least-squares-on-support",
    "lasso",
    "best-subset",
    "relaxed-lasso",
    "ridge",
    "hard-threshold",
    "soft-threshold",
)

# Exhaustive enumeration guard: 2^p supports are visited explicitly.
SUBSET_P_MAX = 25

# Largest number of floats held in one enumeration table (supports x
# replications); larger batches are processed in chunks.
_MAX_TABLE = 1 << 24


@dataclass(frozen=True)
class FitOutput:
    """Result of fitting one response: coefficients, their support, fitted
    values X beta, and the attained objective value (loss plus penalty where
    the procedure has one, otherwise half the residual sum of squares)."""

    beta: np.ndarray
    active_set: np.ndarray
    fitted: np.ndarray
    objective: float


@dataclass(frozen=True)
class BatchFit:
    """Row-per-replication fits: beta (R, p), fitted (R, n), boolean active
    mask (R, p), objective (R,)."""

    beta: np.ndarray
    fitted: np.ndarray
    active: np.ndarray
    objective: np.ndarray

    def row(self, r: int) -> FitOutput:
        return FitOutput(
            beta=self.beta[r],
            active_set=np.flatnonzero(self.active[r]),
            fitted=self.fitted[r],
            objective=float(self.objective[r]),
        )


# ---------------------------------------------------------------------------
# scalar/vector threshold operators
# ---------------------------------------------------------------------------

def soft_threshold(v, t: float):
    """Componentwise sign(v) * max(|v| - t, 0); exact zeros at |v| <= t."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def hard_threshold(v, t: float):
    """Componentwise v * 1{|v| >= t}.  The boundary |v| = t is kept."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    v = np.asarray(v, dtype=float)
    return np.where(np.abs(v) >= t, v, 0.0)


# ---------------------------------------------------------------------------
# least squares on a fixed support
# ---------------------------------------------------------------------------

def _support_indices(S, p: int) -> np.ndarray:
    items = list(S)
    S = np.unique(np.asarray(items, dtype=int)) if items else np.array([], dtype=int)
    if S.size and (S.min() < 0 or S.max() >= p):
        raise ValueError(f"support indices out of range for p={p}")
    return S


def _ls_fit_groups(X: np.ndarray, Y: np.ndarray, S: np.ndarray, pinv_cache: dict):
    """Exact least squares of each row of Y on X[:, S] via the pseudoinverse.
    Returns (coef (R,|S|), fitted (R,n))."""
    key = tuple(S.tolist())
    P = pinv_cache.get(key)
    if P is None:
        P = np.linalg.pinv(X[:, S]) if S.size else np.zeros((0, X.shape[0]))
        pinv_cache[key] = P
    coef = Y @ P.T
    fitted = coef @ X[:, S].T if S.size else np.zeros_like(Y)
    return coef, fitted


def refit_on_active_sets(X: np.ndarray, Y: np.ndarray, masks: np.ndarray):
    """Least-squares refit of every response row on its own active set.

    Rows sharing a support are solved together through one cached
    pseudoinverse.  Returns (beta (R, p), fitted (R, n)).
    """
    R, p = Y.shape[0], X.shape[1]
    beta = np.zeros((R, p))
    fitted = np.zeros_like(Y)
    uniq, inv = np.unique(masks, axis=0, return_inverse=True)
    cache: dict = {}
    for g in range(uniq.shape[0]):
        S = np.flatnonzero(uniq[g])
        if S.size == 0:
            continue
        rows = np.flatnonzero(inv == g)
        coef, fit_g = _ls_fit_groups(X, Y[rows], S, cache)
        beta[np.ix_(rows, S)] = coef
        fitted[rows] = fit_g
    return beta, fitted


def _batch_ls_support(X: np.ndarray, Y: np.ndarray, S: np.ndarray) -> BatchFit:
    coef, fitted = _ls_fit_groups(X, Y, S, {})
    beta = np.zeros((Y.shape[0], X.shape[1]))
    if S.size:
        beta[:, S] = coef
    objective = 0.5 * np.sum((Y - fitted) ** 2, axis=1)
    return BatchFit(beta=beta, fitted=fitted, active=beta != 0, objective=objective)


def least_squares_on_support(X: DesignMatrix, y: np.ndarray, S) -> FitOutput:
    """Project y onto the span of the columns indexed by S.

    The coefficient vector restricted to S is the minimum-norm least squares
    solution, so rank-deficient (even duplicated) columns are handled.
    """
    S = _support_indices(S, X.p)
    return _batch_ls_support(X.values, np.asarray(y, dtype=float)[None, :], S).row(0)


# ---------------------------------------------------------------------------
# lasso via cyclic coordinate descent
# ---------------------------------------------------------------------------

_CD_TOL = 1e-10
_CD_MAX_SWEEPS = 100_000


def lasso_kkt_residual(X: DesignMatrix, y: np.ndarray, lam: float, beta: np.ndarray) -> float:
    """Worst violation of the lasso stationarity conditions at beta.

    Zero at the exact minimizer: |X_j'(y - X beta)| <= lam off the support
    and = lam with matching sign on it.
    """
    Xv = X.values
    g = Xv.T @ (np.asarray(y, dtype=float) - Xv @ beta)
    active = beta != 0
    worst = 0.0
    if np.any(~active):
        worst = max(worst, float(np.max(np.abs(g[~active])) - lam))
    if np.any(active):
        worst = max(
            worst, float(np.max(np.abs(g[active] - lam * np.sign(beta[active]))))
        )
    return max(worst, 0.0)


def _kkt_row_residuals(X: np.ndarray, Y: np.ndarray, lam: float, B: np.ndarray) -> np.ndarray:
    C = (Y - B @ X.T) @ X
    active = B != 0
    viol = np.where(active, np.abs(C - lam * np.sign(B)), np.maximum(np.abs(C) - lam, 0.0))
    return viol.max(axis=1)


def _cd_sweeps(X, Y, lam, B, rows, G, XtY, diag, tol, max_sweeps):
    """Run cyclic coordinate descent on the given rows until each row's max
    coefficient change in a sweep drops below tol.  Rows converge and freeze
    independently, so a row's trajectory does not depend on the batch."""
    upd = np.flatnonzero(diag > 0)
    for _ in range(max_sweeps):
        Bact = B[rows]
        delta = np.zeros(rows.shape[0])
        for j in upd:
            rho = XtY[rows, j] - Bact @ G[:, j] + diag[j] * Bact[:, j]
            bj = np.sign(rho) * np.maximum(np.abs(rho) - lam, 0.0) / diag[j]
            delta = np.maximum(delta, np.abs(bj - Bact[:, j]))
            Bact[:, j] = bj
        B[rows] = Bact
        rows = rows[delta >= tol]
        if rows.size == 0:
            return None
    return rows


def _batch_lasso(X: np.ndarray, Y: np.ndarray, lam: float) -> BatchFit:
    R, p = Y.shape[0], X.shape[1]
    if lam == 0.0:
        # exact unpenalized limit: minimum-norm least squares
        B = Y @ np.linalg.pinv(X).T
    else:
        G = X.T @ X
        XtY = Y @ X
        diag = np.diag(G).copy()
        B = np.zeros((R, p))
        rows = np.arange(R)
        rows = _cd_sweeps(X, Y, lam, B, rows, G, XtY, diag, _CD_TOL, _CD_MAX_SWEEPS)
        if rows is not None:
            res = _kkt_row_residuals(X, Y[rows], lam, B[rows])
            raise NumericalError(
                f"lasso coordinate descent did not converge for replication "
                f"{int(rows[0])}; final KKT residual {res.max():.3e}",
                diagnostic={"replication": int(rows[0]), "kkt_residual": float(res.max())},
            )
        # verify stationarity; polish stragglers before giving up
        scale = max(1.0, float(np.abs(XtY).max()), lam)
        gate = 1e-8 * scale
        bad = np.flatnonzero(_kkt_row_residuals(X, Y, lam, B) > gate)
        for extra_tol in (_CD_TOL / 100, _CD_TOL / 1000):
            if bad.size == 0:
                break
            Bb = B[bad].copy()
            _cd_sweeps(
                X, Y[bad], lam, Bb, np.arange(bad.size), G, XtY[bad], diag,
                extra_tol, _CD_MAX_SWEEPS,
            )
            B[bad] = Bb
            bad = bad[_kkt_row_residuals(X, Y[bad], lam, B[bad]) > gate]
        if bad.size:
            res = _kkt_row_residuals(X, Y[bad], lam, B[bad])
            raise NumericalError(
                f"lasso stationarity check failed for replication {int(bad[0])}: "
                f"KKT residual {res.max():.3e} > {gate:.3e}",
                diagnostic={"replication": int(bad[0]), "kkt_residual": float(res.max())},
            )
    fitted = B @ X.T
    objective = 0.5 * np.sum((Y - fitted) ** 2, axis=1) + lam * np.sum(np.abs(B), axis=1)
    return BatchFit(beta=B, fitted=fitted, active=B != 0, objective=objective)


def lasso_solve(X: DesignMatrix, y: np.ndarray, lam: float) -> FitOutput:
    """Minimize (1/2)||y - X beta||^2 + lam * ||beta||_1.

    Cyclic coordinate descent, converged when no coefficient moves by more
    than 1e-10 in a sweep, then verified against the stationarity conditions.
    Raises NumericalError (with the final KKT residual) if either fails.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return _batch_lasso(X.values, np.asarray(y, dtype=float)[None, :], lam).row(0)


# ---------------------------------------------------------------------------
# best subset selection by exhaustive enumeration
# ---------------------------------------------------------------------------

_TIE_TOL = 1e-12
_DEP_TOL = 1e-10


def _enumerate_supports(X: np.ndarray, Yt: np.ndarray):
    """Score every support against every response column in one pass.

    Depth-first over the prefix tree of index sets: each downward edge adds
    one column, extending an orthonormal basis by Gram-Schmidt (two passes),
    so no projector ever needs downdating and the per-node cost is one basis
    extension plus one (R,)-sized update of the running residual table.
    Supports are recorded in preorder, which is exactly lexicographic order
    on the index tuples, which is the tie-break order.

    Returns (supports: list of tuples, cards: (m,), half_rss: (m, R)).
    """
    n, p = X.shape
    R = Yt.shape[1]
    m = 1 << p
    half_rss = np.empty((m, R))
    cards = np.empty(m, dtype=np.int64)
    supports: list[tuple[int, ...]] = [()] * m
    col_norms = np.sqrt(np.sum(X * X, axis=0))
    Q = np.empty((n, min(n, p)))

    half_rss[0] = 0.5 * np.sum(Yt * Yt, axis=0)
    cards[0] = 0
    counter = 1

    def extend(prefix: tuple[int, ...], start: int, row: int, k: int):
        nonlocal counter
        for j in range(start, p):
            cid = counter
            counter += 1
            child = prefix + (j,)
            supports[cid] = child
            cards[cid] = len(child)
            w = X[:, j].copy()
            if k:
                Qk = Q[:, :k]
                w -= Qk @ (Qk.T @ w)
                w -= Qk @ (Qk.T @ w)
            nrm = np.linalg.norm(w)
            if nrm > _DEP_TOL * col_norms[j] and k < Q.shape[1]:
                q = w / nrm
                c = q @ Yt
                half_rss[cid] = half_rss[row] - 0.5 * (c * c)
                Q[:, k] = q
                extend(child, j + 1, cid, k + 1)
            else:
                # column in the span of the current basis: no loss change
                half_rss[cid] = half_rss[row]
                extend(child, j + 1, cid, k)

    extend((), 0, 0, 0)
    return supports, cards, half_rss


def _subset_winners(cards: np.ndarray, half_rss: np.ndarray, lam: float) -> np.ndarray:
    """Index of the winning support per response column: minimal objective,
    ties within 1e-12 broken by cardinality then lexicographic order."""
    V = half_rss + lam * cards[:, None]
    vmin = V.min(axis=0)
    m = cards.shape[0]
    rank = cards * m + np.arange(m, dtype=np.int64)
    K = np.where(V <= vmin[None, :] + _TIE_TOL, rank[:, None], np.iinfo(np.int64).max)
    return K.argmin(axis=0)


def _batch_best_subset_grid(X: np.ndarray, Y: np.ndarray, lams) -> list[BatchFit]:
    """Fit best subset selection for every lambda in lams, sharing one
    support enumeration across the whole grid (the scores depend on lambda
    only through the cardinality penalty)."""
    n, p = X.shape
    if p > SUBSET_P_MAX:
        raise CapacityError(
            f"best subset enumeration supports p <= {SUBSET_P_MAX}, got p={p}"
        )
    for lam in lams:
        if lam < 0:
            raise ValueError("lam must be nonnegative")
    R = Y.shape[0]
    m = 1 << p
    beta = [np.zeros((R, p)) for _ in lams]
    fitted = [np.zeros((R, n)) for _ in lams]
    cache: dict = {}
    chunk = max(1, _MAX_TABLE // m)
    for start in range(0, R, chunk):
        rows = slice(start, min(start + chunk, R))
        Yc = Y[rows]
        supports, cards, half_rss = _enumerate_supports(X, Yc.T)
        for li, lam in enumerate(lams):
            win = _subset_winners(cards, half_rss, lam)
            for uid in np.unique(win):
                S = np.asarray(supports[uid], dtype=int)
                grp = np.flatnonzero(win == uid)
                if S.size == 0:
                    continue
                coef, fit_g = _ls_fit_groups(X, Yc[grp], S, cache)
                beta[li][start + grp[:, None], S[None, :]] = coef
                fitted[li][start + grp] = fit_g
    out = []
    for li, lam in enumerate(lams):
        active = beta[li] != 0
        objective = 0.5 * np.sum((Y - fitted[li]) ** 2, axis=1) + lam * active.sum(axis=1)
        out.append(BatchFit(beta=beta[li], fitted=fitted[li], active=active, objective=objective))
    return out


def best_subset_solve(X: DesignMatrix, y: np.ndarray, lam: float) -> FitOutput:
    """Minimize (1/2)||y - X beta||^2 + lam * ||beta||_0 exactly.

    All 2^p supports are enumerated (guarded at p <= 25); the winning
    support's coefficients are exact least squares on those columns.  Among
    supports whose objectives agree to 1e-12, the smallest cardinality wins,
    then the lexicographically smallest index set.
    """
    return _batch_best_subset_grid(X.values, np.asarray(y, dtype=float)[None, :], [lam])[0].row(0)


# ---------------------------------------------------------------------------
# relaxed lasso and ridge
# ---------------------------------------------------------------------------

def _batch_relaxed(X: np.ndarray, Y: np.ndarray, lam: float) -> BatchFit:
    base = _batch_lasso(X, Y, lam)
    beta, fitted = refit_on_active_sets(X, Y, base.active)
    objective = 0.5 * np.sum((Y - fitted) ** 2, axis=1)
    return BatchFit(beta=beta, fitted=fitted, active=beta != 0, objective=objective)


def relaxed_lasso_fit(X: DesignMatrix, y: np.ndarray, lam: float) -> FitOutput:
    """Least squares refit on the lasso active set at the same lambda."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return _batch_relaxed(X.values, np.asarray(y, dtype=float)[None, :], lam).row(0)


def _batch_ridge(X: np.ndarray, Y: np.ndarray, lam: float) -> BatchFit:
    p = X.shape[1]
    M = np.linalg.solve(X.T @ X + lam * np.eye(p), X.T)
    B = Y @ M.T
    fitted = B @ X.T
    objective = 0.5 * np.sum((Y - fitted) ** 2, axis=1) + 0.5 * lam * np.sum(B * B, axis=1)
    active = np.ones_like(B, dtype=bool)
    return BatchFit(beta=B, fitted=fitted, active=active, objective=objective)


def ridge_fit(X: DesignMatrix, y: np.ndarray, lam: float) -> FitOutput:
    """beta = (X'X + lam I)^{-1} X'y.  The active set is all p indices by
    convention: ridge never excludes a variable, and exact zeros occur with
    probability zero."""
    if not lam > 0:
        raise ValueError("ridge requires lam > 0")
    out = _batch_ridge(X.values, np.asarray(y, dtype=float)[None, :], lam)
    return FitOutput(
        beta=out.beta[0],
        active_set=np.arange(X.p),
        fitted=out.fitted[0],
        objective=float(out.objective[0]),
    )


def _batch_threshold(X: np.ndarray, Y: np.ndarray, t: float, hard: bool) -> BatchFit:
    V = Y @ X
    B = hard_threshold(V, t) if hard else soft_threshold(V, t)
    fitted = B @ X.T
    objective = 0.5 * np.sum((Y - fitted) ** 2, axis=1)
    return BatchFit(beta=B, fitted=fitted, active=B != 0, objective=objective)


# ---------------------------------------------------------------------------
# the procedure abstraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitProcedure:
    """A fitting procedure as a deterministic function of the response.

    ``kind`` selects the algorithm; ``lam`` is the penalty level, or the
    threshold level for the two thresholding kinds.  Thresholding kinds
    require a design with exactly orthonormal columns (they threshold X'y),
    and ``support`` applies only to least-squares-on-support.
    """

    kind: str
    lam: float
    design: DesignMatrix
    support: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown procedure kind {self.kind!r}")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError("lam must be finite and nonnegative")
        if self.kind == "ridge" and not self.lam > 0:
            raise ValueError("ridge requires lam > 0")
        if self.kind in ("hard-threshold", "soft-threshold") and not self.design.orthogonal:
            raise ValueError("thresholding procedures require an orthogonal design")
        if self.kind == "least-squares-on-support":
            if self.support is None:
                raise ValueError("least-squares-on-support requires a support")
            S = _support_indices(self.support, self.design.p)
            object.__setattr__(self, "support", tuple(int(i) for i in S))
        elif self.support is not None:
            raise ValueError(f"support is not a parameter of kind {self.kind!r}")
        if self.kind == "best-subset" and self.design.p > SUBSET_P_MAX:
            raise CapacityError(
                f"best subset enumeration supports p <= {SUBSET_P_MAX}, "
                f"got p={self.design.p}"
            )

    def fit_many(self, Y: np.ndarray) -> BatchFit:
        """Fit every row of Y (shape (R, n)) against the shared design."""
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2 or Y.shape[1] != self.design.n:
            raise ValueError(f"Y must have shape (R, {self.design.n})")
        X = self.design.values
        if self.kind == "least-squares-on-support":
            return _batch_ls_support(X, Y, np.asarray(self.support, dtype=int))
        if self.kind == "lasso":
            return _batch_lasso(X, Y, self.lam)
        if self.kind == "best-subset":
            return _batch_best_subset_grid(X, Y, [self.lam])[0]
        if self.kind == "relaxed-lasso":
            return _batch_relaxed(X, Y, self.lam)
        if self.kind == "ridge":
            return _batch_ridge(X, Y, self.lam)
        return _batch_threshold(X, Y, self.lam, hard=self.kind == "hard-threshold")

    def fit(self, y: np.ndarray) -> FitOutput:
        out = self.fit_many(np.asarray(y, dtype=float)[None, :])
        if self.kind == "ridge":
            return FitOutput(
                beta=out.beta[0],
                active_set=np.arange(self.design.p),
                fitted=out.fitted[0],
                objective=float(out.objective[0]),
            )
        return out.row(0)


def fit_path(kind: str, design: DesignMatrix, Y: np.ndarray, lam_grid, support=None) -> list[BatchFit]:
    """Fit one procedure across a whole lambda grid with shared work.

    Best subset reuses a single support enumeration for every lambda; other
    kinds simply loop.  Returns one BatchFit per grid value, in order.
    """
    Y = np.asarray(Y, dtype=float)
    if kind == "best-subset":
        FitProcedure(kind=kind, lam=float(lam_grid[0]), design=design)  # validate guard
        return _batch_best_subset_grid(design.values, Y, [float(l) for l in lam_grid])
    return [
        FitProcedure(kind=kind, lam=float(l), design=design, support=support).fit_many(Y)
        for l in lam_grid
    ]
