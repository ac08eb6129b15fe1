"""Univariate identity suite, discontinuity scanning, df decomposition."""

from types import SimpleNamespace

import numpy as np
import numpy.testing as npt
import pytest

from dfsearch.closedform import df_hard_threshold
from dfsearch.errors import NumericalError
from dfsearch.fitters import FitProcedure
from dfsearch.model import RngSpec, SignalSpec, gen_block_design, gen_orthogonal_design
from dfsearch.stein import (
    PiecewiseScalarFunction,
    check_jump_positivity,
    function_library,
    hard_threshold_function,
    scan_discontinuities,
    soft_threshold_function,
    stein_decompose_df,
    stein_lhs_univariate,
    stein_rhs_univariate,
    verify_stein_univariate,
)

_LIBRARY = function_library()


class TestPiecewiseScalarFunction:
    def test_breakpoints_must_increase(self):
        with pytest.raises(ValueError):
            PiecewiseScalarFunction(
                breakpoints=(1.0, 0.0), fn=lambda x: x, dfn=lambda x: 1.0
            )

    def test_stored_limits_must_match_breakpoints(self):
        with pytest.raises(ValueError):
            PiecewiseScalarFunction(
                breakpoints=(0.0,),
                fn=lambda x: x,
                dfn=lambda x: 1.0,
                left_values=(0.0, 1.0),
            )

    def test_hard_threshold_limits_and_jumps(self):
        f = hard_threshold_function(1.5)
        assert f.left_limit(-1.5) == -1.5
        assert f.right_limit(-1.5) == 0.0
        assert f.left_limit(1.5) == 0.0
        assert f.right_limit(1.5) == 1.5
        jumps = f.jumps()
        npt.assert_allclose([j.location for j in jumps], [-1.5, 1.5])
        npt.assert_allclose([j.jump for j in jumps], [1.5, 1.5])

    def test_soft_threshold_is_continuous(self):
        f = soft_threshold_function(1.0)
        assert all(j.jump == 0.0 for j in f.jumps())

    def test_zero_threshold_collapses_to_identity(self):
        f = hard_threshold_function(0.0)
        assert f.breakpoints == ()
        assert f.evaluate(0.7) == 0.7


class TestUnivariateIdentity:
    @pytest.mark.parametrize("name,f", _LIBRARY, ids=[n for n, _ in _LIBRARY])
    def test_residual_small_at_reference_point(self, name, f):
        assert verify_stein_univariate(f, 0.5, 1.0) < 1e-8

    @pytest.mark.parametrize("mu", [-2.0, 0.0, 3.0])
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_hard_threshold_reproduces_closed_form(self, mu, sigma):
        for t in (0.0, 0.5, 1.0, 2.5, 4.0):
            f = hard_threshold_function(t)
            rhs = stein_rhs_univariate(f, mu, sigma)
            lhs = stein_lhs_univariate(f, mu, sigma)
            exact = df_hard_threshold(np.array([mu]), sigma, t)
            assert abs(lhs - rhs) < 1e-8
            assert abs(rhs - exact) < 1e-8

    def test_covariance_side_of_step_function_matches_density(self):
        # E[(x - mu) step(x)] / sigma^2 = phi(mu/sigma)/sigma for a unit step at 0
        from dfsearch.closedform import normal_pdf

        f = [fn for name, fn in _LIBRARY if name == "unit-step"][0]
        mu, sigma = 0.3, 1.2
        lhs = stein_lhs_univariate(f, mu, sigma)
        assert abs(lhs - normal_pdf(mu / sigma) / sigma) < 1e-9


def _stub_proc(fn, n=4):
    """A fake procedure whose first coordinate map is fn, others identity."""

    def fit_many(Y):
        F = np.array(Y, dtype=float, copy=True)
        F[:, 0] = fn(F[:, 0])
        return SimpleNamespace(fitted=F)

    return SimpleNamespace(design=SimpleNamespace(n=n), fit_many=fit_many)


class TestScanDiscontinuities:
    def test_hard_threshold_finds_both_jumps(self):
        d = gen_orthogonal_design(4, 4)
        proc = FitProcedure(kind="hard-threshold", lam=1.0, design=d)
        y = np.array([0.3, -0.2, 0.8, 1.4])
        records = scan_discontinuities(proc, 0, y, -8.0, 8.0)
        assert len(records) == 2
        npt.assert_allclose([r.location for r in records], [-1.0, 1.0], atol=1e-6)
        npt.assert_allclose([r.jump for r in records], [1.0, 1.0], atol=1e-6)
        assert records[0].left == pytest.approx(-1.0, abs=1e-6)
        assert records[0].right == pytest.approx(0.0, abs=1e-6)

    def test_soft_threshold_has_no_jumps(self):
        d = gen_orthogonal_design(4, 4)
        proc = FitProcedure(kind="soft-threshold", lam=1.0, design=d)
        records = scan_discontinuities(proc, 1, np.zeros(4), -8.0, 8.0)
        assert records == []

    def test_lasso_coordinate_maps_are_continuous(self):
        d = gen_block_design(8, 4, [2, 2], 0.4, 0.8, RngSpec(seed=1, stream_id=0))
        proc = FitProcedure(kind="lasso", lam=0.6, design=d)
        y = np.random.default_rng(2).standard_normal(8)
        assert scan_discontinuities(proc, 3, y, -6.0, 6.0) == []

    def test_ridge_coordinate_maps_are_continuous(self):
        d = gen_block_design(8, 4, [2, 2], 0.4, 0.8, RngSpec(seed=1, stream_id=0))
        proc = FitProcedure(kind="ridge", lam=1.0, design=d)
        y = np.random.default_rng(3).standard_normal(8)
        assert scan_discontinuities(proc, 0, y, -6.0, 6.0) == []

    @pytest.mark.parametrize("seed", range(4))
    def test_best_subset_agrees_with_dense_reference(self, seed):
        rng = np.random.default_rng(seed)
        d = gen_block_design(2, 2, [2], 0.3, 0.7, RngSpec(seed=seed, stream_id=0))
        proc = FitProcedure(kind="best-subset", lam=0.4, design=d)
        y = rng.standard_normal(2)
        lo, hi = -6.0, 6.0
        records = scan_discontinuities(proc, 0, y, lo, hi)

        # dense evaluation as an independent witness
        G = 200_001
        svals = np.linspace(lo, hi, G)
        rows = np.repeat(y[None, :], G, axis=0)
        rows[:, 0] = svals
        vals = proc.fit_many(rows).fitted[:, 0]
        dv = np.abs(np.diff(vals))
        spacing = (hi - lo) / (G - 1)
        ref_hits = np.flatnonzero(dv > 0.02)
        ref_locs = 0.5 * (svals[ref_hits] + svals[ref_hits + 1])

        assert len(records) == len(ref_locs)
        for rec, loc in zip(records, ref_locs):
            assert abs(rec.location - loc) <= spacing
            assert abs(rec.jump) > 1e-4

    def test_two_jumps_in_one_cell_raises(self):
        def fn(v):
            return np.where(v < 5e-4, 0.0, np.where(v < 1.5e-3, 1.0, 3.0))

        proc = _stub_proc(fn)
        with pytest.raises(NumericalError, match="grid points"):
            scan_discontinuities(proc, 0, np.zeros(4), -8.0, 8.0)

    def test_finer_grid_resolves_close_jumps(self):
        def fn(v):
            return np.where(v < 5e-4, 0.0, np.where(v < 1.5e-3, 1.0, 3.0))

        proc = _stub_proc(fn)
        records = scan_discontinuities(
            proc, 0, np.zeros(4), -8.0, 8.0, grid_points=65536
        )
        assert len(records) == 2
        npt.assert_allclose([r.location for r in records], [5e-4, 1.5e-3], atol=1e-6)
        npt.assert_allclose([r.jump for r in records], [1.0, 2.0], atol=1e-6)

    def test_jump_below_threshold_discarded(self):
        def fn(v):
            return np.where(v < 0.25, 0.0, 5e-5)

        proc = _stub_proc(fn)
        assert scan_discontinuities(proc, 0, np.zeros(4), -8.0, 8.0) == []

    def test_jump_above_threshold_kept(self):
        def fn(v):
            return np.where(v < 0.25, 0.0, 3e-4)

        proc = _stub_proc(fn)
        records = scan_discontinuities(proc, 0, np.zeros(4), -8.0, 8.0)
        assert len(records) == 1
        assert records[0].location == pytest.approx(0.25, abs=1e-6)
        assert records[0].jump == pytest.approx(3e-4, abs=1e-7)

    def test_kink_without_jump_ignored(self):
        def fn(v):
            return np.maximum(v, 0.0)

        proc = _stub_proc(fn)
        assert scan_discontinuities(proc, 0, np.zeros(4), -8.0, 8.0) == []

    def test_argument_validation(self):
        d = gen_orthogonal_design(4, 4)
        proc = FitProcedure(kind="hard-threshold", lam=1.0, design=d)
        with pytest.raises(ValueError):
            scan_discontinuities(proc, 9, np.zeros(4), -1.0, 1.0)
        with pytest.raises(ValueError):
            scan_discontinuities(proc, 0, np.zeros(3), -1.0, 1.0)
        with pytest.raises(ValueError):
            scan_discontinuities(proc, 0, np.zeros(4), 1.0, -1.0)


class TestSteinDecomposition:
    def test_hard_threshold_matches_closed_form(self):
        n = 6
        d = gen_orthogonal_design(n, n)
        signal = SignalSpec(np.zeros(n), 1.0)
        proc = FitProcedure(kind="hard-threshold", lam=1.0, design=d)
        dec = stein_decompose_df(proc, signal, reps=600, seed=21)
        exact = df_hard_threshold(np.zeros(n), 1.0, 1.0)
        total = dec.divergence + dec.boundary
        assert abs(total - exact) <= 3.5 * dec.total_se
        assert dec.boundary > 0
        assert dec.divergence_se > 0 and dec.boundary_se > 0

    def test_pair_interface(self):
        d = gen_orthogonal_design(3, 3)
        signal = SignalSpec(np.zeros(3), 1.0)
        proc = FitProcedure(kind="hard-threshold", lam=1.0, design=d)
        dec = stein_decompose_df(proc, signal, reps=40, seed=2)
        a, b = dec
        assert a == dec.divergence and b == dec.boundary
        assert dec.reps == 40
        assert "divergence" in repr(dec)

    def test_subset_divergence_is_mean_active(self):
        d = gen_orthogonal_design(4, 4)
        signal = SignalSpec(np.zeros(4), 1.0)
        proc = FitProcedure(kind="best-subset", lam=0.5, design=d)
        dec = stein_decompose_df(proc, signal, reps=300, seed=5)
        from dfsearch.montecarlo import estimate_df

        est = estimate_df(proc, signal, reps=300, seed=5)
        assert abs(dec.divergence - est.mean_active) <= 3 * max(dec.divergence_se, 1e-3)

    def test_ridge_has_no_boundary_term(self):
        d = gen_block_design(8, 4, [2, 2], 0.3, 0.7, RngSpec(seed=6, stream_id=0))
        beta = np.array([1.0, 0.0, -1.0, 0.0])
        signal = SignalSpec.from_coefficients(d, beta, 1.0)
        lam = 1.5
        proc = FitProcedure(kind="ridge", lam=lam, design=d)
        dec = stein_decompose_df(proc, signal, reps=30, seed=7)
        X = d.values
        trace = float(np.trace(X @ np.linalg.solve(X.T @ X + lam * np.eye(4), X.T)))
        assert dec.boundary == pytest.approx(0.0, abs=1e-12)
        assert dec.divergence == pytest.approx(trace, abs=1e-6)

    def test_threaded_run_matches_serial(self, monkeypatch):
        d = gen_orthogonal_design(4, 4)
        signal = SignalSpec(np.zeros(4), 1.0)
        proc = FitProcedure(kind="hard-threshold", lam=1.0, design=d)
        serial = stein_decompose_df(proc, signal, reps=24, seed=9)
        monkeypatch.setenv("DFSEARCH_THREADS", "4")
        threaded = stein_decompose_df(proc, signal, reps=24, seed=9)
        assert serial == threaded

    def test_reps_validated(self):
        d = gen_orthogonal_design(3, 3)
        proc = FitProcedure(kind="hard-threshold", lam=1.0, design=d)
        with pytest.raises(ValueError):
            stein_decompose_df(proc, SignalSpec(np.zeros(3), 1.0), reps=1, seed=0)


class TestJumpPositivity:
    def test_hard_threshold_jumps_all_upward(self):
        d = gen_orthogonal_design(5, 5)
        signal = SignalSpec(np.zeros(5), 1.0)
        proc = FitProcedure(kind="hard-threshold", lam=1.0, design=d)
        assert check_jump_positivity(proc, signal, trials=6, seed=3) == []

    def test_best_subset_jumps_all_upward_small_case(self):
        d = gen_block_design(2, 2, [2], 0.3, 0.7, RngSpec(seed=8, stream_id=0))
        signal = SignalSpec(np.zeros(2), 1.0)
        proc = FitProcedure(kind="best-subset", lam=0.4, design=d)
        assert check_jump_positivity(proc, signal, trials=6, seed=4) == []

    def test_stub_with_downward_jump_is_flagged(self):
        def fn(v):
            return np.where(v < 0.5, 1.0, 0.5)

        proc = _stub_proc(fn)
        signal = SignalSpec(np.zeros(4), 1.0)
        violations = check_jump_positivity(proc, signal, trials=4, seed=5)
        bad = [v for v in violations if v.coord == 0]
        assert bad and all(v.record.jump < 0 for v in bad)
        assert bad[0].record.location == pytest.approx(0.5, abs=1e-6)
