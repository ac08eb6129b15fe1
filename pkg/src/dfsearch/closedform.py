"""Exact degrees-of-freedom formulas for the orthogonal-design case.

For orthonormal designs, best subset selection reduces to hard thresholding
of X'y at t = sqrt(2*lambda) and the lasso reduces to soft thresholding at
t = lambda, so degrees of freedom (df), search degrees of freedom (sdf), and
the expected active-set size all have closed forms built from the standard
normal density and CDF.  Everything here is quadrature-free; the Monte Carlo
module provides the independent check.

Scalar ``lam``/``t`` arguments may also be passed as arrays, in which case
the result has the same shape (used for curve sweeps and grid searches).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

__all__ = [
    "CurvePoint",
    "normal_pdf",
    "normal_cdf",
    "truncated_moments",
    "expected_active_hard",
    "df_hard_threshold",
    "df_subset_orthogonal",
    "df_relaxed_lasso_orthogonal",
    "sdf_null",
    "sdf_sparse",
    "sdf_dense",
    "threshold_for_expected_active",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)


def normal_pdf(x):
    """Standard normal density exp(-x^2/2)/sqrt(2*pi), vectorized."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / _SQRT_2PI
    return out if out.ndim else float(out)


def normal_cdf(x):
    """Standard normal CDF via the complementary error function.

    erfc is accurate to a few ulps over the whole line, far inside the
    1e-12 absolute-error budget the tail-difference formulas need.
    """
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc(-x / np.sqrt(2.0))
    return out if out.ndim else float(out)


def truncated_moments(a: float, b: float, sigma: float):
    """First and second moments of z ~ N(0, sigma^2) on one-sided tails.

    Returns
    -------
    tuple of four floats
        ``E[z 1{z<=a}] = -sigma*phi(a/sigma)``,
        ``E[z 1{z>=b}] =  sigma*phi(b/sigma)``,
        ``E[z^2 1{z<=a}] = -sigma*a*phi(a/sigma) + sigma^2*Phi(a/sigma)``,
        ``E[z^2 1{z>=b}] =  sigma*b*phi(b/sigma) + sigma^2*(1-Phi(b/sigma))``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    pa, pb = normal_pdf(a / sigma), normal_pdf(b / sigma)
    ca, cb = normal_cdf(a / sigma), normal_cdf(b / sigma)
    return (
        -sigma * pa,
        sigma * pb,
        -sigma * a * pa + sigma**2 * ca,
        sigma * b * pb + sigma**2 * (1.0 - cb),
    )


def _as_grid(t):
    """Shape a scalar-or-array threshold for broadcasting against mu."""
    t = np.asarray(t, dtype=float)
    return t, t.ndim == 0


def expected_active_hard(mu, sigma: float, t):
    """E|A_t| for hard thresholding at t of y ~ N(mu, sigma^2 I).

    Each component survives with probability
    ``1 - Phi((t - mu_i)/sigma) + Phi((-t - mu_i)/sigma)``.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    t, scalar = _as_grid(t)
    tt = t[..., None]
    val = np.sum(
        1.0 - normal_cdf((tt - mu) / sigma) + normal_cdf((-tt - mu) / sigma), axis=-1
    )
    return float(val) if scalar else val


def _sdf_hard(mu, sigma: float, t):
    """(t/sigma) * sum_i [phi((t-mu_i)/sigma) + phi((t+mu_i)/sigma)]."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    t, scalar = _as_grid(t)
    tt = t[..., None]
    val = (t / sigma) * np.sum(
        normal_pdf((tt - mu) / sigma) + normal_pdf((tt + mu) / sigma), axis=-1
    )
    return float(val) if scalar else val


def df_hard_threshold(mu, sigma: float, t):
    """Degrees of freedom of hard thresholding at level t.

    Equals the expected active-set size plus the threshold-boundary term
    ``(t/sigma) sum_i [phi((t-mu_i)/sigma) + phi((t+mu_i)/sigma)]``; the
    second term is the price of the selection events at |y_i| = t.
    """
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be nonnegative")
    return expected_active_hard(mu, sigma, t) + _sdf_hard(mu, sigma, t)


@dataclass(frozen=True)
class CurvePoint:
    """One point of a df/sdf curve: tuning value, equivalent threshold,
    expected active-set size, df, and sdf, with df = expected_active + sdf."""

    lam: float
    t: float
    expected_active: float
    df: float
    sdf: float


def _threshold_curve_point(xtmu, sigma: float, lam: float, t: float) -> CurvePoint:
    ea = expected_active_hard(xtmu, sigma, t)
    sdf = _sdf_hard(xtmu, sigma, t)
    return CurvePoint(lam=float(lam), t=float(t), expected_active=ea, df=ea + sdf, sdf=sdf)


def df_subset_orthogonal(xtmu, sigma: float, lam: float) -> CurvePoint:
    """Exact df/sdf of best subset selection on an orthonormal design.

    Parameters
    ----------
    xtmu : array
        X'mu, length p (for X = I this is just the mean vector).
    sigma : float
        Noise standard deviation.
    lam : float
        Penalty level; the equivalent hard threshold is t = sqrt(2*lam).

    Returns
    -------
    CurvePoint
        ``df = expected_active + sdf`` holds exactly: both terms are built
        from the same floating-point subexpressions.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return _threshold_curve_point(xtmu, sigma, lam, t=np.sqrt(2.0 * lam))


def df_relaxed_lasso_orthogonal(xtmu, sigma: float, lam: float) -> CurvePoint:
    """Exact df/sdf of the relaxed lasso on an orthonormal design.

    Identical structure to :func:`df_subset_orthogonal` with the threshold
    identification t = lam: on orthonormal designs the lasso active set is a
    soft thresholding support, and refitting on it is hard thresholding at
    the same level.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return _threshold_curve_point(xtmu, sigma, lam, t=float(lam))


def sdf_null(p: int, sigma: float, lam):
    """Search degrees of freedom of best subset selection under mu = 0:
    ``2 p sqrt(2 lam)/sigma * phi(sqrt(2 lam)/sigma)``.

    As a function of lam this is maximized at lam = sigma^2/2, where it
    equals 2 p phi(1) and the expected active-set size is 2 Phi(-1) p.
    """
    lam_arr, scalar = _as_grid(lam)
    t = np.sqrt(2.0 * lam_arr)
    val = 2.0 * p * (t / sigma) * normal_pdf(t / sigma)
    return float(val) if scalar else val


def sdf_sparse(beta_star, sigma: float, lam):
    """Search degrees of freedom of best subset selection for a sparse
    coefficient vector, split over the true support and its complement.

    The support contributes ``(t/sigma) sum_{i in A*} [phi((t-b_i)/sigma) +
    phi((t+b_i)/sigma)]`` and each null coordinate contributes
    ``2 (t/sigma) phi(t/sigma)``, with t = sqrt(2*lam).
    """
    b = np.atleast_1d(np.asarray(beta_star, dtype=float))
    p = b.shape[0]
    active = b[b != 0]
    k_star = active.shape[0]
    lam_arr, scalar = _as_grid(lam)
    t = np.sqrt(2.0 * lam_arr)
    tt = t[..., None]
    support_term = (t / sigma) * np.sum(
        normal_pdf((tt - active) / sigma) + normal_pdf((tt + active) / sigma), axis=-1
    )
    null_term = 2.0 * (p - k_star) * (t / sigma) * normal_pdf(t / sigma)
    val = support_term + null_term
    return float(val) if scalar else val


def sdf_dense(beta_star, sigma: float, lam):
    """Search degrees of freedom of best subset selection with every
    coordinate treated through its own amplitude:
    ``(t/sigma) sum_i [phi((t-b_i)/sigma) + phi((t+b_i)/sigma)]``, t = sqrt(2*lam).
    """
    b = np.atleast_1d(np.asarray(beta_star, dtype=float))
    lam_arr, scalar = _as_grid(lam)
    t = np.sqrt(2.0 * lam_arr)
    tt = t[..., None]
    val = (t / sigma) * np.sum(
        normal_pdf((tt - b) / sigma) + normal_pdf((tt + b) / sigma), axis=-1
    )
    return float(val) if scalar else val


def threshold_for_expected_active(xtmu, sigma: float, target: float) -> float:
    """Invert E|A_t| for the threshold t by monotone bisection.

    E|A_t| decreases strictly from p at t=0 toward 0, so for any target in
    (0, p] there is a unique threshold; the returned t satisfies
    |E|A_t| - target| <= 1e-10.  Used to reparametrize curves by expected
    active-set size instead of lam.
    """
    xtmu = np.atleast_1d(np.asarray(xtmu, dtype=float))
    p = xtmu.shape[0]
    if not 0.0 < target <= p:
        raise ValueError(f"target expected active size must lie in (0, {p}]")
    if target == p:
        return 0.0
    lo, hi = 0.0, float(sigma)
    while expected_active_hard(xtmu, sigma, hi) > target:
        hi *= 2.0
        if hi > 1e12 * sigma:
            raise ValueError("target too small to invert at this scale")
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        val = expected_active_hard(xtmu, sigma, mid)
        if abs(val - target) <= 1e-10:
            return mid
        if val > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)
