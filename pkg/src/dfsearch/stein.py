"""Stein-type identities for fits with jumps, and their numerical checks.

For a univariate function that is absolutely continuous between finitely
many breakpoints, the normal integration-by-parts identity picks up one
extra term per breakpoint: the density there times the jump height.  This
module verifies that identity by quadrature, locates the discontinuities of
black-box fitting procedures along single response coordinates, and splits
a procedure's degrees of freedom into a derivative (divergence) part and a
jump (boundary) part estimated by Monte Carlo.

Fits produced by the procedures in this package are piecewise linear in the
response, which the scanner exploits: away from active-set changes the
coordinate maps have locally constant slope, so a cell whose increment
deviates from its neighbors marks a kink or a jump, and one-sided limits
distinguish the two.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .closedform import normal_pdf
from .errors import NumericalError
from .fitters import FitProcedure
from .model import SignalSpec
from .montecarlo import draw_responses

__all__ = [
    "PiecewiseScalarFunction",
    "JumpRecord",
    "JumpViolation",
    "SteinDecomposition",
    "identity_function",
    "constant_function",
    "hard_threshold_function",
    "soft_threshold_function",
    "sign_function",
    "step_function",
    "clipped_linear_function",
    "polynomial_jump_function",
    "negative_jump_function",
    "removable_break_function",
    "function_library",
    "stein_lhs_univariate",
    "stein_rhs_univariate",
    "verify_stein_univariate",
    "scan_discontinuities",
    "stein_decompose_df",
    "check_jump_positivity",
]

_QUAD_SPAN = 12.0
_QUAD_ERR_BUDGET = 1e-9
_LIMIT_OFFSET = 1e-7
_BISECT_WIDTH = 1e-9
_SUBCELLS = 8


# ---------------------------------------------------------------------------
# univariate piecewise functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseScalarFunction:
    """A scalar function that is absolutely continuous between breakpoints.

    ``fn`` evaluates the function, ``dfn`` its derivative (anything may be
    returned exactly at a breakpoint; that set has measure zero).  One-sided
    limits at breakpoints are stored exactly when known; otherwise they are
    approximated by evaluation a hair to the side.
    """

    breakpoints: tuple
    fn: object
    dfn: object
    left_values: tuple | None = None
    right_values: tuple | None = None
    label: str = ""

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        if any(not np.isfinite(b) for b in bps):
            raise ValueError("breakpoints must be finite")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bps)
        for vals in (self.left_values, self.right_values):
            if vals is not None and len(vals) != len(bps):
                raise ValueError("one-sided value tuples must match breakpoints")

    def evaluate(self, x: float) -> float:
        return float(self.fn(x))

    def derivative(self, x: float) -> float:
        return float(self.dfn(x))

    def _bp_index(self, d: float) -> int:
        for k, b in enumerate(self.breakpoints):
            if b == d:
                return k
        raise ValueError(f"{d!r} is not a breakpoint")

    def left_limit(self, d: float) -> float:
        k = self._bp_index(d)
        if self.left_values is not None:
            return float(self.left_values[k])
        return self.evaluate(d - 1e-9)

    def right_limit(self, d: float) -> float:
        k = self._bp_index(d)
        if self.right_values is not None:
            return float(self.right_values[k])
        return self.evaluate(d + 1e-9)

    def jumps(self) -> list:
        out = []
        for b in self.breakpoints:
            left = self.left_limit(b)
            right = self.right_limit(b)
            out.append(JumpRecord(location=b, left=left, right=right, jump=right - left))
        return out


@dataclass(frozen=True)
class JumpRecord:
    """One discontinuity: location, one-sided values, and their difference."""

    location: float
    left: float
    right: float
    jump: float


# ---------------------------------------------------------------------------
# built-in function library
# ---------------------------------------------------------------------------

def identity_function() -> PiecewiseScalarFunction:
    return PiecewiseScalarFunction((), lambda x: x, lambda x: 1.0, label="identity")


def constant_function(c: float = 1.5) -> PiecewiseScalarFunction:
    return PiecewiseScalarFunction((), lambda x: c, lambda x: 0.0, label="constant")


def hard_threshold_function(t: float) -> PiecewiseScalarFunction:
    """x kept when |x| >= t, zeroed otherwise; jumps of +t at -t and +t."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return identity_function()

    def fn(x):
        return x if abs(x) >= t else 0.0

    def dfn(x):
        return 1.0 if abs(x) > t else 0.0

    return PiecewiseScalarFunction(
        (-t, t), fn, dfn,
        left_values=(-t, 0.0), right_values=(0.0, t),
        label=f"hard-threshold t={t:g}",
    )


def soft_threshold_function(t: float) -> PiecewiseScalarFunction:
    """Shrink toward zero by t; continuous, with kinks at -t and t."""
    if t < 0:
        raise ValueError("t must be nonnegative")

    def fn(x):
        return np.sign(x) * max(abs(x) - t, 0.0)

    def dfn(x):
        return 1.0 if abs(x) > t else 0.0

    bps = (-t, t) if t > 0 else ()
    left = (0.0, 0.0) if t > 0 else None
    return PiecewiseScalarFunction(
        bps, fn, dfn, left_values=left, right_values=left,
        label=f"soft-threshold t={t:g}",
    )


def sign_function() -> PiecewiseScalarFunction:
    return PiecewiseScalarFunction(
        (0.0,), lambda x: float(np.sign(x)), lambda x: 0.0,
        left_values=(-1.0,), right_values=(1.0,), label="sign",
    )


def step_function(at: float = 0.0) -> PiecewiseScalarFunction:
    return PiecewiseScalarFunction(
        (at,), lambda x: 1.0 if x >= at else 0.0, lambda x: 0.0,
        left_values=(0.0,), right_values=(1.0,), label=f"step at {at:g}",
    )


def clipped_linear_function(lo: float, hi: float) -> PiecewiseScalarFunction:
    """x clipped to [lo, hi]; continuous with kinks at the clip points."""
    if not lo < hi:
        raise ValueError("need lo < hi")

    def dfn(x):
        return 1.0 if lo < x < hi else 0.0

    return PiecewiseScalarFunction(
        (lo, hi), lambda x: min(max(x, lo), hi), dfn,
        left_values=(lo, hi), right_values=(lo, hi),
        label=f"clip [{lo:g}, {hi:g}]",
    )


def polynomial_jump_function() -> PiecewiseScalarFunction:
    """x^2 below 1, x^3 + 1 at and above 1: a unit jump between polynomial
    pieces."""

    def fn(x):
        return x * x if x < 1.0 else x ** 3 + 1.0

    def dfn(x):
        return 2.0 * x if x < 1.0 else 3.0 * x * x

    return PiecewiseScalarFunction(
        (1.0,), fn, dfn, left_values=(1.0,), right_values=(2.0,),
        label="polynomial pieces with unit jump",
    )


def negative_jump_function() -> PiecewiseScalarFunction:
    """x below 0, x - 2 at and above 0: a downward jump of -2."""

    def fn(x):
        return x if x < 0.0 else x - 2.0

    return PiecewiseScalarFunction(
        (0.0,), fn, lambda x: 1.0,
        left_values=(0.0,), right_values=(-2.0,), label="negative jump",
    )


def removable_break_function() -> PiecewiseScalarFunction:
    """The identity with a declared breakpoint whose jump is zero."""
    return PiecewiseScalarFunction(
        (0.3,), lambda x: x, lambda x: 1.0,
        left_values=(0.3,), right_values=(0.3,), label="removable break",
    )


def function_library() -> list:
    """Named test functions covering the classes the identity must handle:
    smooth, kinked, and genuinely discontinuous with either jump sign."""
    return [
        ("identity", identity_function()),
        ("constant", constant_function()),
        ("hard-threshold", hard_threshold_function(1.0)),
        ("soft-threshold", soft_threshold_function(1.0)),
        ("sign", sign_function()),
        ("unit-step", step_function(0.0)),
        ("clipped-linear", clipped_linear_function(-1.0, 2.0)),
        ("polynomial-jump", polynomial_jump_function()),
        ("negative-jump", negative_jump_function()),
        ("removable-break", removable_break_function()),
    ]


# ---------------------------------------------------------------------------
# univariate identity by quadrature
# ---------------------------------------------------------------------------

def _panels(f: PiecewiseScalarFunction, lo: float, hi: float):
    cuts = [lo] + [b for b in f.breakpoints if lo < b < hi] + [hi]
    return list(zip(cuts[:-1], cuts[1:]))


def _integrate(f_of_x, f: PiecewiseScalarFunction, mu: float, sigma: float) -> float:
    lo, hi = mu - _QUAD_SPAN * sigma, mu + _QUAD_SPAN * sigma
    total, err = 0.0, 0.0
    for a, b in _panels(f, lo, hi):
        val, e = quad(f_of_x, a, b, epsabs=1e-12, epsrel=1e-11, limit=200)
        total += val
        err += e
    if err > _QUAD_ERR_BUDGET:
        raise NumericalError(
            f"quadrature error estimate {err:.3e} exceeds {_QUAD_ERR_BUDGET:.1e}",
            diagnostic={"error_estimate": err},
        )
    return total


def stein_lhs_univariate(f: PiecewiseScalarFunction, mu: float, sigma: float) -> float:
    """The covariance side: E[(X - mu) f(X)] / sigma^2 for X ~ N(mu, sigma^2),
    by adaptive quadrature with panels split at the breakpoints."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")

    def integrand(x):
        z = (x - mu) / sigma
        return (x - mu) * f.evaluate(x) * normal_pdf(z) / sigma

    return _integrate(integrand, f, mu, sigma) / sigma ** 2


def stein_rhs_univariate(f: PiecewiseScalarFunction, mu: float, sigma: float) -> float:
    """The derivative-plus-jumps side: E[f'(X)] plus the normal density at
    each breakpoint times its jump."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")

    def integrand(x):
        return f.derivative(x) * normal_pdf((x - mu) / sigma) / sigma

    total = _integrate(integrand, f, mu, sigma)
    for rec in f.jumps():
        total += normal_pdf((rec.location - mu) / sigma) / sigma * rec.jump
    return total


def verify_stein_univariate(f: PiecewiseScalarFunction, mu: float, sigma: float) -> float:
    """Absolute difference of the two sides; small for any function that is
    absolutely continuous between its breakpoints and normal-integrable."""
    return abs(stein_lhs_univariate(f, mu, sigma) - stein_rhs_univariate(f, mu, sigma))


# ---------------------------------------------------------------------------
# discontinuity scanning for fitted coordinate maps
# ---------------------------------------------------------------------------

class _Bracket:
    """A grid cell suspected to hold a jump of the coordinate map, plus the
    local slope reference used to steer the subdivision search."""

    __slots__ = ("coord", "a", "b", "va", "vb", "s_ref", "d_cell", "h_cell", "slack")

    def __init__(self, coord, a, b, va, vb, s_ref, d_cell, h_cell, slack):
        self.coord = coord
        self.a = a
        self.b = b
        self.va = va
        self.vb = vb
        self.s_ref = s_ref
        self.d_cell = d_cell
        self.h_cell = h_cell
        self.slack = slack


def _flag_cells(coord: int, svals: np.ndarray, vals: np.ndarray, jump_threshold: float):
    """Cells whose increment exceeds the smaller neighboring increment by a
    margin are candidate jumps.  Within one linear piece increments agree
    exactly, so the margin only has to beat the kink scale, not the slope
    scale; a plain slope cutoff would have to sit above the largest jump
    divided by the step and would go blind exactly where it matters."""
    d = np.diff(vals)
    absd = np.abs(d)
    G1 = absd.shape[0]
    if G1 == 1:
        ref = np.zeros(1)
    else:
        shifted_left = np.concatenate(([np.inf], absd[:-1]))
        shifted_right = np.concatenate((absd[1:], [np.inf]))
        ref = np.minimum(shifted_left, shifted_right)
    h = float(svals[1] - svals[0])
    flagged = np.flatnonzero(absd - ref > 0.5 * jump_threshold)
    out = []
    for g in flagged:
        # signed slope of the calmer neighbor cell steers the subdivision
        if g > 0 and (g + 1 >= G1 or absd[g - 1] <= absd[g + 1]):
            s_ref = d[g - 1] / h
            slack = absd[g + 1] if g + 1 < G1 else absd[g - 1]
        elif g + 1 < G1:
            s_ref = d[g + 1] / h
            slack = absd[g - 1] if g > 0 else absd[g + 1]
        else:
            s_ref = 0.0
            slack = 0.0
        out.append(_Bracket(
            coord=coord, a=float(svals[g]), b=float(svals[g + 1]),
            va=float(vals[g]), vb=float(vals[g + 1]),
            s_ref=float(s_ref), d_cell=float(d[g]), h_cell=h,
            slack=float(slack),
        ))
    return out


def _coord_rows(y: np.ndarray, coords, svals) -> np.ndarray:
    rows = np.repeat(y[None, :], len(svals), axis=0)
    rows[np.arange(len(svals)), np.asarray(coords, dtype=int)] = svals
    return rows


def _resolve_brackets(proc: FitProcedure, y: np.ndarray, brackets: list,
                      jump_threshold: float, grid_points: int):
    """Narrow each bracket to the jump location and measure one-sided limits.

    Each round subdivides every open bracket into equal subcells, evaluates
    all interior points in one batched fit, and keeps the subcell whose
    increment deviates most from the slope-reference prediction.  For
    piecewise-linear coordinate maps that deviation is zero off the jump,
    so the walk homes in on the discontinuity.
    """
    records_per_coord: dict = {}
    active = list(brackets)
    fracs = np.arange(1, _SUBCELLS) / _SUBCELLS
    for _ in range(80):
        open_brs = [b for b in active if b.b - b.a > _BISECT_WIDTH]
        if not open_brs:
            break
        svals = np.concatenate([b.a + (b.b - b.a) * fracs for b in open_brs])
        coords = np.concatenate([[b.coord] * (_SUBCELLS - 1) for b in open_brs])
        fitted = proc.fit_many(_coord_rows(y, coords, svals)).fitted
        mids = fitted[np.arange(svals.size), coords]
        for k, b in enumerate(open_brs):
            inner = mids[k * (_SUBCELLS - 1):(k + 1) * (_SUBCELLS - 1)]
            pts = np.concatenate(([b.a], b.a + (b.b - b.a) * fracs, [b.b]))
            vv = np.concatenate(([b.va], inner, [b.vb]))
            dv = np.diff(vv)
            w = (b.b - b.a) / _SUBCELLS
            dev = np.abs(dv - b.s_ref * w)
            g = int(np.argmax(dev))
            b.a, b.b = float(pts[g]), float(pts[g + 1])
            b.va, b.vb = float(vv[g]), float(vv[g + 1])
    if not active:
        return records_per_coord
    # one-sided limits just outside the final bracket
    locs = np.array([(b.a + b.b) / 2 for b in active])
    coords = np.array([b.coord for b in active])
    side_s = np.concatenate([locs - _LIMIT_OFFSET, locs + _LIMIT_OFFSET])
    side_c = np.concatenate([coords, coords])
    fitted = proc.fit_many(_coord_rows(y, side_c, side_s)).fitted
    side_v = fitted[np.arange(side_s.size), side_c]
    lefts, rights = side_v[:len(active)], side_v[len(active):]
    for k, b in enumerate(active):
        jump = float(rights[k] - lefts[k])
        if abs(jump) <= jump_threshold:
            continue  # a kink, not a discontinuity
        implied = b.d_cell - b.s_ref * b.h_cell
        slack = max(10 * jump_threshold, 0.3 * abs(jump), 5 * b.slack)
        if abs(implied - jump) > slack:
            raise NumericalError(
                f"scan cell near s={locs[k]:.6g} (coordinate {b.coord}) appears "
                f"to hold more than one discontinuity; rerun with more than "
                f"{grid_points} grid points",
                diagnostic={"coord": int(b.coord), "location": float(locs[k])},
            )
        rec = JumpRecord(location=float(locs[k]), left=float(lefts[k]),
                         right=float(rights[k]), jump=jump)
        records_per_coord.setdefault(b.coord, []).append(rec)
    for recs in records_per_coord.values():
        recs.sort(key=lambda r: r.location)
    return records_per_coord


def scan_discontinuities(proc: FitProcedure, coord: int, y_fixed: np.ndarray,
                         lo: float, hi: float, *, grid_points: int = 4096,
                         jump_threshold: float = 1e-4) -> list:
    """Locate the jumps of s -> fitted[coord] at response (s, y_fixed[-coord]).

    The coordinate map is sampled on a uniform grid, cells flagged by the
    neighbor-increment rule are narrowed by guided subdivision, and each
    located point is measured by one-sided evaluation.  Only genuine jumps
    (|jump| > jump_threshold) are returned, sorted by location.  A cell that
    turns out to hold two discontinuities raises NumericalError and asks
    for a finer grid.
    """
    y = np.asarray(y_fixed, dtype=float).copy()
    if y.ndim != 1 or y.size != proc.design.n:
        raise ValueError(f"y_fixed must be a vector of length {proc.design.n}")
    if not coord in range(proc.design.n):
        raise ValueError("coord out of range")
    if not lo < hi:
        raise ValueError("need lo < hi")
    if grid_points < 16:
        raise ValueError("grid_points must be at least 16")
    svals = np.linspace(lo, hi, grid_points)
    fitted = proc.fit_many(_coord_rows(y, np.full(grid_points, coord), svals)).fitted
    vals = fitted[:, coord]
    brackets = _flag_cells(coord, svals, vals, jump_threshold)
    per_coord = _resolve_brackets(proc, y, brackets, jump_threshold, grid_points)
    return per_coord.get(coord, [])


# ---------------------------------------------------------------------------
# Monte Carlo decomposition of df into divergence + boundary terms
# ---------------------------------------------------------------------------

class SteinDecomposition(tuple):
    """The pair (divergence, boundary).  Their sum estimates df.  Jackknife
    standard errors ride along: divergence_se, boundary_se, and total_se
    (for the sum, accounting for the within-replication correlation)."""

    divergence_se: float
    boundary_se: float
    total_se: float
    reps: int

    def __new__(cls, divergence, boundary, divergence_se, boundary_se, total_se, reps):
        self = tuple.__new__(cls, (float(divergence), float(boundary)))
        self.divergence_se = float(divergence_se)
        self.boundary_se = float(boundary_se)
        self.total_se = float(total_se)
        self.reps = int(reps)
        return self

    @property
    def divergence(self) -> float:
        return self[0]

    @property
    def boundary(self) -> float:
        return self[1]

    def __repr__(self):
        return (
            f"SteinDecomposition(divergence={self[0]!r}, boundary={self[1]!r}, "
            f"divergence_se={self.divergence_se!r}, boundary_se={self.boundary_se!r}, "
            f"total_se={self.total_se!r}, reps={self.reps!r})"
        )


_STRADDLE_TOL = 1e-3
_FD_SHRINKS = 4


def _divergence_terms(proc: FitProcedure, Y0: np.ndarray, F0: np.ndarray,
                      h0: float) -> np.ndarray:
    """Central-difference divergence per replication, shape (R,).

    All (replication, coordinate) probes go through one batched fit.  A
    probe whose forward and backward slopes disagree is straddling a kink
    or jump; its step shrinks tenfold until the two sides agree.  The fits
    are piecewise linear, so any clean step gives the exact local slope.
    """
    R, n = Y0.shape
    rows = np.repeat(Y0, 2 * n, axis=0)
    ridx = np.arange(R)[:, None]
    cidx = np.arange(n)[None, :]
    rows[(ridx * 2 * n + 2 * cidx).ravel(), np.tile(np.arange(n), R)] += h0
    rows[(ridx * 2 * n + 2 * cidx + 1).ravel(), np.tile(np.arange(n), R)] -= h0
    fitted = proc.fit_many(rows).fitted
    vp = fitted[ridx * 2 * n + 2 * cidx, cidx]
    vm = fitted[ridx * 2 * n + 2 * cidx + 1, cidx]

    central = (vp - vm) / (2 * h0)
    dplus = (vp - F0) / h0
    dminus = (F0 - vm) / h0
    bad_r, bad_i = np.nonzero(np.abs(dplus - dminus) > _STRADDLE_TOL)
    h = h0
    for _ in range(_FD_SHRINKS):
        if bad_r.size == 0:
            break
        h /= 10.0
        m = bad_r.size
        probe = np.repeat(Y0[bad_r], 2, axis=0)
        probe[np.arange(m) * 2, bad_i] += h
        probe[np.arange(m) * 2 + 1, bad_i] -= h
        pf = proc.fit_many(probe).fitted
        pvp = pf[np.arange(m) * 2, bad_i]
        pvm = pf[np.arange(m) * 2 + 1, bad_i]
        central[bad_r, bad_i] = (pvp - pvm) / (2 * h)
        dp = (pvp - F0[bad_r, bad_i]) / h
        dm = (F0[bad_r, bad_i] - pvm) / h
        keep = np.abs(dp - dm) > _STRADDLE_TOL
        bad_r, bad_i = bad_r[keep], bad_i[keep]
    if bad_r.size:
        raise NumericalError(
            f"finite-difference probe keeps straddling a discontinuity at "
            f"replication {int(bad_r[0])}, coordinate {int(bad_i[0])}",
            diagnostic={"replication": int(bad_r[0]), "coordinate": int(bad_i[0])},
        )
    return central.sum(axis=1)


def _boundary_term_one(proc: FitProcedure, y: np.ndarray, signal: SignalSpec,
                       grids: list, grid_points: int, jump_threshold: float) -> float:
    """phi-weighted jump sum over all coordinates for one response draw."""
    n = y.size
    G = grid_points
    coords = np.repeat(np.arange(n), G)
    svals = np.concatenate(grids)
    fitted = proc.fit_many(_coord_rows(y, coords, svals)).fitted
    brackets = []
    for i in range(n):
        vals = fitted[i * G:(i + 1) * G, i]
        brackets.extend(_flag_cells(i, grids[i], vals, jump_threshold))
    per_coord = _resolve_brackets(proc, y, brackets, jump_threshold, grid_points)
    total = 0.0
    sigma = signal.sigma
    for i, recs in sorted(per_coord.items()):
        for rec in recs:
            w = normal_pdf((rec.location - signal.mu[i]) / sigma) / sigma
            total += w * rec.jump
    return total


def stein_decompose_df(proc: FitProcedure, signal: SignalSpec, reps: int, seed: int,
                       *, fd_step: float = 1e-5, grid_points: int = 4096,
                       jump_threshold: float = 1e-4, span: float = 8.0) -> SteinDecomposition:
    """Split df into expected divergence plus expected boundary jump sum.

    Per replication, the divergence is the sum of the coordinate partial
    derivatives by central differences (step fd_step * sigma), and the
    boundary term scans every coordinate map over mu_i +/- span * sigma for
    jumps, weighting each by the normal density at its location.  Returns
    the two Monte Carlo means; their sum estimates df.  The environment
    variable DFSEARCH_THREADS (default 1) parallelizes the per-replication
    scans; the reduction order is fixed, so results do not depend on it.
    """
    if reps < 2:
        raise ValueError("reps must be at least 2")
    Y0 = draw_responses(signal, reps, seed)
    F0 = proc.fit_many(Y0).fitted
    h0 = fd_step * signal.sigma
    div = _divergence_terms(proc, Y0, F0, h0)

    grids = [
        np.linspace(signal.mu[i] - span * signal.sigma,
                    signal.mu[i] + span * signal.sigma, grid_points)
        for i in range(signal.n)
    ]
    bnd = np.empty(reps)
    workers = int(os.environ.get("DFSEARCH_THREADS", "1") or "1")
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        def task(r):
            return _boundary_term_one(proc, Y0[r], signal, grids, grid_points, jump_threshold)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for r, val in enumerate(pool.map(task, range(reps))):
                bnd[r] = val
    else:
        for r in range(reps):
            bnd[r] = _boundary_term_one(proc, Y0[r], signal, grids, grid_points,
                                        jump_threshold)

    if reps >= 8:
        centered = bnd - bnd.mean()
        sd = centered.std(ddof=1)
        if sd > 0 and np.abs(centered).max() > 10 * sd:
            warnings.warn(
                "boundary jump sums are heavy-tailed across replications; "
                "the boundary standard error may be unreliable",
                stacklevel=2,
            )

    root_r = np.sqrt(reps)
    return SteinDecomposition(
        divergence=float(div.mean()),
        boundary=float(bnd.mean()),
        divergence_se=float(div.std(ddof=1) / root_r),
        boundary_se=float(bnd.std(ddof=1) / root_r),
        total_se=float((div + bnd).std(ddof=1) / root_r),
        reps=reps,
    )


@dataclass(frozen=True)
class JumpViolation:
    """A negative jump found while probing the positivity condition."""

    trial: int
    coord: int
    record: JumpRecord


def check_jump_positivity(proc: FitProcedure, signal: SignalSpec, trials: int,
                          seed: int, *, grid_points: int = 4096,
                          jump_threshold: float = 1e-4, span: float = 8.0) -> list:
    """Probe random response configurations for negative jumps.

    Each trial draws a response, scans one coordinate map (cycling through
    coordinates), and records any jump with negative sign.  An empty list
    is evidence (not proof) that the procedure's jumps are all upward,
    which would make the boundary term, and hence the search cost,
    nonnegative.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    Y = draw_responses(signal, trials, seed)
    violations = []
    for k in range(trials):
        i = k % signal.n
        lo = float(signal.mu[i] - span * signal.sigma)
        hi = float(signal.mu[i] + span * signal.sigma)
        records = scan_discontinuities(
            proc, i, Y[k], lo, hi,
            grid_points=grid_points, jump_threshold=jump_threshold,
        )
        for rec in records:
            if rec.jump < 0:
                violations.append(JumpViolation(trial=k, coord=i, record=rec))
    return violations
