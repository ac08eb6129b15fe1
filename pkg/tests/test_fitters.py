"""Fitting procedures: exactness, KKT conditions, ties, and batching."""

import itertools

import numpy as np
import numpy.testing as npt
import pytest

from dfsearch.errors import CapacityError
from dfsearch.fitters import (
    FitProcedure,
    SUBSET_P_MAX,
    best_subset_solve,
    fit_path,
    hard_threshold,
    lasso_kkt_residual,
    lasso_solve,
    least_squares_on_support,
    refit_on_active_sets,
    relaxed_lasso_fit,
    ridge_fit,
    soft_threshold,
)
from dfsearch.model import DesignMatrix, RngSpec, gen_block_design, gen_orthogonal_design


def _random_design(n, p, seed):
    rng = np.random.default_rng(seed)
    return DesignMatrix(rng.standard_normal((n, p)), orthogonal=False)


class TestThresholdOperators:
    def test_soft_shrinks_toward_zero(self):
        v = np.array([3.0, -2.0, 0.5, -0.5, 0.0])
        npt.assert_allclose(soft_threshold(v, 1.0), [2.0, -1.0, 0.0, 0.0, 0.0])

    def test_hard_keeps_or_kills(self):
        v = np.array([3.0, -2.0, 0.5, -0.5, 0.0])
        npt.assert_allclose(hard_threshold(v, 1.0), [3.0, -2.0, 0.0, 0.0, 0.0])

    def test_boundary_component_kept_by_hard_dropped_by_soft(self):
        v = np.array([1.0, -1.0])
        npt.assert_allclose(hard_threshold(v, 1.0), [1.0, -1.0])
        npt.assert_allclose(soft_threshold(v, 1.0), [0.0, 0.0])

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            soft_threshold(np.ones(2), -0.1)
        with pytest.raises(ValueError):
            hard_threshold(np.ones(2), -0.1)


class TestLeastSquaresOnSupport:
    def test_empty_support_fits_zero(self):
        d = _random_design(6, 4, 0)
        out = least_squares_on_support(d, np.ones(6), ())
        npt.assert_array_equal(out.beta, np.zeros(4))
        npt.assert_array_equal(out.fitted, np.zeros(6))
        assert tuple(out.active_set) == ()

    def test_identity_design_projects_coordinates(self):
        d = gen_orthogonal_design(3, 3)
        out = least_squares_on_support(d, np.array([1.0, 2.0, 3.0]), (0, 2))
        npt.assert_allclose(out.fitted, [1.0, 0.0, 3.0], atol=1e-14)

    def test_duplicated_column_projects_onto_span(self):
        rng = np.random.default_rng(3)
        col = rng.standard_normal(8)
        X = np.column_stack([col, col, rng.standard_normal(8)])
        d = DesignMatrix(X, orthogonal=False)
        y = rng.standard_normal(8)
        out = least_squares_on_support(d, y, (0, 1))
        proj = col * (col @ y) / (col @ col)
        npt.assert_allclose(out.fitted, proj, atol=1e-10)

    def test_fitted_equals_design_times_beta(self):
        d = _random_design(10, 5, 4)
        y = np.random.default_rng(5).standard_normal(10)
        out = least_squares_on_support(d, y, (1, 3, 4))
        npt.assert_allclose(out.fitted, d.values @ out.beta, atol=1e-12)
        assert all(out.beta[j] == 0 for j in (0, 2))

    def test_out_of_range_support_rejected(self):
        d = _random_design(6, 4, 0)
        with pytest.raises(ValueError):
            least_squares_on_support(d, np.ones(6), (0, 4))


class TestLasso:
    @pytest.mark.parametrize("lam", [0.05, 0.5, 2.0, 10.0])
    def test_kkt_residual_small(self, lam):
        d = _random_design(20, 10, 11)
        y = np.random.default_rng(12).standard_normal(20)
        out = lasso_solve(d, y, lam)
        assert lasso_kkt_residual(d, y, lam, out.beta) <= 1e-8

    def test_zero_penalty_is_least_squares(self):
        d = _random_design(15, 6, 2)
        y = np.random.default_rng(1).standard_normal(15)
        out = lasso_solve(d, y, 0.0)
        beta_ls = np.linalg.pinv(d.values) @ y
        npt.assert_allclose(out.beta, beta_ls, atol=1e-10)

    def test_orthogonal_design_soft_thresholds(self):
        d = gen_orthogonal_design(12, 8)
        y = np.random.default_rng(8).standard_normal(12)
        lam = 0.6
        out = lasso_solve(d, y, lam)
        npt.assert_allclose(out.beta, soft_threshold(d.values.T @ y, lam), atol=1e-10)

    def test_objective_beats_random_perturbations(self):
        d = _random_design(20, 10, 21)
        y = np.random.default_rng(22).standard_normal(20)
        lam = 1.0
        out = lasso_solve(d, y, lam)

        def objective(b):
            return 0.5 * np.sum((y - d.values @ b) ** 2) + lam * np.abs(b).sum()

        assert out.objective == pytest.approx(objective(out.beta), abs=1e-10)
        rng = np.random.default_rng(23)
        for scale in (1e-4, 1e-2, 1.0):
            for _ in range(40):
                other = out.beta + scale * rng.standard_normal(10)
                assert objective(other) >= out.objective - 1e-12

    def test_huge_penalty_gives_empty_model(self):
        d = _random_design(10, 4, 5)
        y = np.random.default_rng(6).standard_normal(10)
        lam = 10.0 * np.abs(d.values.T @ y).max()
        out = lasso_solve(d, y, lam)
        npt.assert_array_equal(out.beta, np.zeros(4))

    def test_active_size_shrinks_with_penalty_orthogonal(self):
        d = gen_orthogonal_design(20, 12)
        y = np.random.default_rng(31).standard_normal(20)
        sizes = [
            len(lasso_solve(d, y, lam).active_set)
            for lam in np.linspace(0.0, 3.0, 16)
        ]
        assert all(a >= b for a, b in zip(sizes[:-1], sizes[1:]))


def _brute_force_subset(X, y, lam):
    """Smallest penalized objective over every support, preferring small
    then lexicographically earliest supports on ties."""
    p = X.shape[1]
    best = (np.inf, None)
    for size in range(p + 1):
        for S in itertools.combinations(range(p), size):
            if S:
                coef, *_ = np.linalg.lstsq(X[:, S], y, rcond=None)
                rss = np.sum((y - X[:, S] @ coef) ** 2)
            else:
                rss = np.sum(y**2)
            val = 0.5 * rss + lam * size
            if val < best[0] - 1e-12:
                best = (val, S)
    return best


class TestBestSubset:
    @pytest.mark.parametrize("seed,lam", [(0, 0.3), (1, 0.8), (2, 1.7), (3, 0.05)])
    def test_matches_exhaustive_reference(self, seed, lam):
        d = _random_design(12, 6, seed)
        y = np.random.default_rng(100 + seed).standard_normal(12)
        out = best_subset_solve(d, y, lam)
        ref_val, ref_support = _brute_force_subset(d.values, y, lam)
        assert out.objective == pytest.approx(ref_val, abs=1e-9)
        assert tuple(out.active_set) == ref_support

    def test_tie_prefers_smaller_support(self):
        # y=(1,1) on the identity at lam=0.5 ties every support at value 1
        d = gen_orthogonal_design(2, 2)
        out = best_subset_solve(d, np.array([1.0, 1.0]), 0.5)
        assert tuple(out.active_set) == ()

    def test_tie_prefers_lexicographic_order(self):
        # duplicated column: {0} and {1} give identical fits, {0} must win
        X = np.array([[1.0, 1.0], [0.0, 0.0]])
        d = DesignMatrix(X, orthogonal=False)
        out = best_subset_solve(d, np.array([1.0, 0.0]), 0.1)
        assert tuple(out.active_set) == (0,)
        npt.assert_allclose(out.fitted, [1.0, 0.0], atol=1e-12)

    def test_dependent_columns_handled(self):
        rng = np.random.default_rng(9)
        col = rng.standard_normal(10)
        X = np.column_stack([col, 2.0 * col, rng.standard_normal((10, 2))])
        d = DesignMatrix(X, orthogonal=False)
        y = rng.standard_normal(10)
        out = best_subset_solve(d, y, 0.2)
        ref_val, _ = _brute_force_subset(X, y, 0.2)
        assert out.objective == pytest.approx(ref_val, abs=1e-9)

    def test_active_size_shrinks_with_penalty_orthogonal(self):
        d = gen_orthogonal_design(10, 10)
        y = np.random.default_rng(41).standard_normal(10)
        sizes = [
            len(best_subset_solve(d, y, lam).active_set)
            for lam in np.linspace(0.0, 2.0, 9)
        ]
        assert all(a >= b for a, b in zip(sizes[:-1], sizes[1:]))

    def test_orthogonal_case_is_hard_thresholding(self):
        d = gen_orthogonal_design(9, 9)
        y = np.random.default_rng(55).standard_normal(9)
        lam = 0.4
        out = best_subset_solve(d, y, lam)
        npt.assert_allclose(out.beta, hard_threshold(y, np.sqrt(2 * lam)), atol=1e-12)

    def test_capacity_guard(self):
        d = _random_design(30, SUBSET_P_MAX + 1, 0)
        with pytest.raises(CapacityError):
            FitProcedure(kind="best-subset", lam=1.0, design=d)

    def test_path_matches_single_solves(self):
        d = _random_design(14, 7, 77)
        rng = np.random.default_rng(78)
        Y = rng.standard_normal((3, 14))
        lams = [0.1, 0.6, 2.5]
        path = fit_path("best-subset", d, Y, lams)
        for li, lam in enumerate(lams):
            for r in range(3):
                solo = best_subset_solve(d, Y[r], lam)
                batch = path[li].row(r)
                npt.assert_array_equal(batch.beta, solo.beta)
                npt.assert_array_equal(batch.active_set, solo.active_set)


class TestRelaxedLasso:
    def test_refits_least_squares_on_lasso_support(self):
        d = _random_design(18, 9, 6)
        y = np.random.default_rng(7).standard_normal(18)
        lam = 0.9
        relaxed = relaxed_lasso_fit(d, y, lam)
        base = lasso_solve(d, y, lam)
        npt.assert_array_equal(relaxed.active_set, base.active_set)
        refit = least_squares_on_support(d, y, base.active_set)
        npt.assert_allclose(relaxed.fitted, refit.fitted, atol=1e-10)

    def test_orthogonal_case_is_hard_thresholding_at_lambda(self):
        d = gen_orthogonal_design(11, 11)
        y = np.random.default_rng(17).standard_normal(11)
        lam = 0.7
        out = relaxed_lasso_fit(d, y, lam)
        npt.assert_allclose(out.fitted, hard_threshold(y, lam), atol=1e-10)


class TestRidge:
    def test_matches_normal_equations(self):
        d = _random_design(16, 5, 10)
        y = np.random.default_rng(11).standard_normal(16)
        lam = 2.3
        out = ridge_fit(d, y, lam)
        ref = np.linalg.solve(
            d.values.T @ d.values + lam * np.eye(5), d.values.T @ y
        )
        npt.assert_allclose(out.beta, ref, atol=1e-10)
        assert tuple(out.active_set) == tuple(range(5))

    def test_requires_positive_penalty(self):
        d = _random_design(8, 3, 1)
        with pytest.raises(ValueError):
            ridge_fit(d, np.ones(8), 0.0)


class TestFitProcedure:
    def test_unknown_kind_rejected(self):
        d = _random_design(8, 3, 0)
        with pytest.raises(ValueError):
            FitProcedure(kind="stepwise", lam=1.0, design=d)

    def test_negative_or_nonfinite_penalty_rejected(self):
        d = _random_design(8, 3, 0)
        with pytest.raises(ValueError):
            FitProcedure(kind="lasso", lam=-1.0, design=d)
        with pytest.raises(ValueError):
            FitProcedure(kind="lasso", lam=np.nan, design=d)

    def test_thresholds_need_orthogonal_design(self):
        d = _random_design(8, 3, 0)
        with pytest.raises(ValueError):
            FitProcedure(kind="hard-threshold", lam=1.0, design=d)
        ok = FitProcedure(
            kind="hard-threshold", lam=1.0, design=gen_orthogonal_design(8, 3)
        )
        assert ok.lam == 1.0

    def test_support_only_for_fixed_support_kind(self):
        d = _random_design(8, 3, 0)
        with pytest.raises(ValueError):
            FitProcedure(kind="lasso", lam=1.0, design=d, support=(0,))
        with pytest.raises(ValueError):
            FitProcedure(kind="least-squares-on-support", lam=0.0, design=d)
        proc = FitProcedure(
            kind="least-squares-on-support", lam=0.0, design=d, support=(2, 0)
        )
        assert proc.support == (0, 2)

    @pytest.mark.parametrize(
        "kind,lam",
        [
            ("lasso", 0.4),
            ("best-subset", 0.3),
            ("relaxed-lasso", 0.4),
            ("ridge", 1.5),
            ("hard-threshold", 0.8),
            ("soft-threshold", 0.8),
        ],
    )
    def test_batch_rows_match_single_fits(self, kind, lam):
        d = gen_orthogonal_design(9, 6)
        rng = np.random.default_rng(14)
        Y = rng.standard_normal((4, 9))
        proc = FitProcedure(kind=kind, lam=lam, design=d)
        batch = proc.fit_many(Y)
        for r in range(4):
            solo = proc.fit(Y[r])
            npt.assert_array_equal(batch.row(r).beta, solo.beta)
            npt.assert_array_equal(batch.row(r).fitted, solo.fitted)
            npt.assert_array_equal(batch.row(r).active_set, solo.active_set)

    def test_batch_rows_match_single_fits_general_design(self):
        d = gen_block_design(15, 6, [3, 3], 0.4, 0.8, RngSpec(seed=20, stream_id=0))
        rng = np.random.default_rng(21)
        Y = rng.standard_normal((3, 15))
        for kind, lam in (("lasso", 0.5), ("best-subset", 0.4), ("relaxed-lasso", 0.5)):
            proc = FitProcedure(kind=kind, lam=lam, design=d)
            batch = proc.fit_many(Y)
            for r in range(3):
                solo = proc.fit(Y[r])
                npt.assert_allclose(batch.row(r).beta, solo.beta, atol=1e-12)

    def test_deterministic_given_inputs(self):
        d = _random_design(12, 5, 33)
        y = np.random.default_rng(34).standard_normal(12)
        proc = FitProcedure(kind="lasso", lam=0.8, design=d)
        npt.assert_array_equal(proc.fit(y).beta, proc.fit(y).beta)


class TestRefitOnActiveSets:
    def test_grouped_refits_match_direct(self):
        d = _random_design(10, 4, 44)
        rng = np.random.default_rng(45)
        Y = rng.standard_normal((5, 10))
        masks = np.zeros((5, 4), dtype=bool)
        masks[0, [0, 2]] = True
        masks[1, [0, 2]] = True
        masks[2, :] = True
        masks[4, [3]] = True
        beta, fitted = refit_on_active_sets(d.values, Y, masks)
        for r in range(5):
            S = tuple(np.flatnonzero(masks[r]))
            ref = least_squares_on_support(d, Y[r], S)
            npt.assert_allclose(beta[r], ref.beta, atol=1e-12)
            npt.assert_allclose(fitted[r], ref.fitted, atol=1e-12)
