import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdrygp.boundary import BoundaryConfig, MeanSpec
from bdrygp.designs import full_grid, sparse_grid
from bdrygp.errors import DomainError, NumericalError, SingularModelError
from bdrygp.fem import combination, lagrange_full
from bdrygp.gp import (
    factorize,
    find_duplicates,
    fit,
    posterior_cov,
    predict_batch,
    predict_mean,
    tridiag_inverse_1d,
)
from bdrygp.harness.functions import TestFunction
from bdrygp.kernels import KernelParams, diag_cov, gram


def bubble(X):
    X = np.atleast_2d(X)
    return np.prod(X * (1 - X), axis=1)


def bm_model(mode="full", d=2, k=3, f=None, omega=1.0, variance=1.0, order=None):
    b = BoundaryConfig.from_mode(mode, d)
    f = f or TestFunction("product_peak", d)
    X = sparse_grid(k, d, b).array()
    if order is not None:
        X = X[order]
    mean = MeanSpec(b, f if b.has_boundary else None)
    return fit(X, KernelParams.isotropic(d, omega, variance), "bdrymatern", mean, f)


class TestFit:
    def test_single_point(self):
        b = BoundaryConfig.from_mode("full", 1)
        m = fit([[0.5]], KernelParams.isotropic(1, 1.0), "bdrymatern", MeanSpec(b, bubble), bubble)
        assert m.residuals.tolist() == [0.25]
        assert m.factor.lower[0, 0] == pytest.approx(np.sqrt(0.23105858), rel=1e-8)
        assert m.jitter_used == 0.0

    def test_residuals_vanish_when_f_is_mean(self):
        b = BoundaryConfig.from_mode("left", 2)
        f = TestFunction("corner_peak", 2)
        spec = MeanSpec(b, f)
        X = sparse_grid(2, 2, b).array()

        def g(P):
            from bdrygp.boundary import mean_values
            return mean_values(P, spec)

        m = fit(X, KernelParams.isotropic(2, 1.0), "bdrymatern", spec, g)
        assert np.all(m.residuals == 0)

    def test_duplicates_named(self):
        b = BoundaryConfig.from_mode("full", 1)
        X = np.array([[0.25], [0.5], [0.25]])
        assert find_duplicates(X) == [(0, 2)]
        with pytest.raises(SingularModelError) as info:
            fit(X, KernelParams.isotropic(1, 1.0), "bdrymatern", MeanSpec(b, bubble), bubble)
        assert info.value.duplicates == [(0, 2)]
        assert "0.25" in str(info.value)

    def test_factor_reproduces_gram(self):
        m = bm_model("none", 3, 4)
        K = gram(m.X, m.params, m.bounds)
        L = m.factor.lower
        assert np.array_equal(L, np.tril(L))
        err = np.linalg.norm(L @ L.T - K - m.jitter_used * np.eye(m.n)) / np.linalg.norm(K)
        assert err <= 1e-12

    def test_jitter_ladder_escalates(self):
        K = np.ones((3, 3))
        f = factorize(K.copy())
        assert f.jitter_used > 0
        L = f.lower
        assert np.linalg.norm(L @ L.T - K - f.jitter_used * np.eye(3)) <= 1e-12 * np.linalg.norm(K)

    def test_ladder_exhausted(self):
        K = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(SingularModelError):
            factorize(K)

    def test_design_object_accepted(self):
        b = BoundaryConfig.from_mode("full", 2)
        g = full_grid((2, 2), b)
        m1 = fit(g, None, "brownian", MeanSpec(b, bubble), bubble)
        m2 = fit(g.array(), None, "brownian", MeanSpec(b, bubble), bubble)
        assert np.array_equal(m1.weights, m2.weights)

    def test_mismatched_design_bounds(self):
        g = full_grid((2, 2), BoundaryConfig.from_mode("left", 2))
        b = BoundaryConfig.from_mode("full", 2)
        with pytest.raises(DomainError):
            fit(g, None, "brownian", MeanSpec(b, bubble), bubble)


class TestPredict:
    @pytest.mark.parametrize("mode", ["full", "left", "none"])
    @pytest.mark.parametrize("name", ["corner_peak", "product_peak", "rosenbrock"])
    def test_interpolates_design(self, mode, name):
        f = TestFunction(name, 2)
        m = bm_model(mode, 2, 4, f=f)
        y = f(m.X)
        assert np.max(np.abs(m.predict(m.X) - y)) <= 1e-8 * (1 + np.max(np.abs(y)))

    def test_boundary_equals_truth(self):
        f = TestFunction("corner_peak", 2)
        m = bm_model("left", 2, 3, f=f)
        for x in ([0.0, 0.3], [0.7, 0.0], [0.0, 0.0]):
            truth = f(np.array([x]))[0]
            assert predict_mean(m, x) == pytest.approx(truth, abs=1e-9)
            assert posterior_cov(m, x, x) == 0.0

    def test_brownian_1d_left(self):
        b = BoundaryConfig.from_mode("left", 1)
        m = fit([[0.5], [1.0]], None, "brownian", MeanSpec(b, bubble), bubble)
        assert predict_mean(m, [0.25]) == pytest.approx(0.125, abs=1e-12)

    def test_outside_rejected(self):
        m = bm_model()
        with pytest.raises(DomainError):
            predict_mean(m, [1.5, 0.5])
        with pytest.raises(DomainError):
            posterior_cov(m, [0.5, 0.5], [0.5, -0.1])

    def test_posterior_vanishes_at_design(self):
        m = bm_model("left", 2, 3, variance=2.0)
        for x in m.X:
            assert abs(posterior_cov(m, x, x)) <= 1e-9 * 2.0

    def test_prior_when_empty(self):
        b = BoundaryConfig.from_mode("full", 2)
        m = fit(np.empty((0, 2)), KernelParams.isotropic(2, 1.0), "bdrymatern", MeanSpec(b, bubble), bubble)
        x, y = [0.3, 0.6], [0.5, 0.5]
        assert posterior_cov(m, x, y) == pytest.approx(
            float(np.prod([np.sinh(0.3) * np.sinh(0.5) / np.sinh(1), np.sinh(0.5) * np.sinh(0.4) / np.sinh(1)])), rel=1e-12)
        assert predict_mean(m, x) == pytest.approx(0.0, abs=1e-12)

    def test_variance_bounds(self):
        m = bm_model("full", 3, 3, variance=1.5)
        Q = np.random.default_rng(0).random((1000, 3))
        v = m.variance(Q)
        prior = diag_cov(Q, m.params, m.bounds)
        assert np.all(v >= 0)
        assert np.all(v <= prior + 1e-9 * 1.5)

    def test_variance_matches_pointwise(self):
        m = bm_model("left", 2, 3)
        Q = np.random.default_rng(2).random((20, 2))
        v = m.variance(Q)
        assert np.allclose(v, [max(posterior_cov(m, q, q), 0) for q in Q], rtol=1e-10, atol=1e-14)

    def test_negative_variance_raises(self):
        # a deliberately inconsistent gram makes posterior variances clearly negative
        b = BoundaryConfig.from_mode("full", 1)
        X = np.array([[0.25], [0.5], [0.75]])
        m = fit(X, None, "brownian", MeanSpec(b, bubble), bubble, fast_path=False,
                gram_hook=lambda K: K.__imul__(0.5))
        with pytest.raises(NumericalError):
            m.variance([[0.4]])

    def test_permutation_invariance(self):
        base = bm_model("left", 2, 4)
        perm = np.random.default_rng(9).permutation(base.n)
        shuffled = bm_model("left", 2, 4, order=perm)
        Q = np.random.default_rng(1).random((300, 2))
        a, b = base.predict(Q), shuffled.predict(Q)
        assert np.max(np.abs(a - b)) <= 1e-9 * (1 + np.max(np.abs(a)))


class TestBatch:
    def test_design_points(self):
        f = TestFunction("product_peak", 2)
        m = bm_model("full", 2, 3, f=f)
        out = predict_batch(m, m.X[:5])
        for s, x in zip(out, m.X[:5]):
            assert s.mean == pytest.approx(f(x[None])[0], rel=1e-9)
            assert abs(s.variance) <= 1e-9

    def test_empty(self):
        assert predict_batch(bm_model(), []) == []

    def test_repeated(self):
        m = bm_model()
        out = predict_batch(m, [[0.3, 0.4]] * 3)
        assert out[0] == out[1] == out[2]

    def test_error_has_index(self):
        with pytest.raises(DomainError, match="query 1"):
            predict_batch(bm_model(), [[0.3, 0.4], [2.0, 0.1]])


class TestTridiagonal:
    def test_two_points(self):
        assert np.array_equal(tridiag_inverse_1d([0.5, 1.0]), [[4.0, -2.0], [-2.0, 2.0]])

    def test_single(self):
        assert np.array_equal(tridiag_inverse_1d([1.0]), [[1.0]])

    @pytest.mark.parametrize("n", [1, 2, 4, 8, 16])
    def test_inverts_gram(self, n):
        pts = np.arange(1, n + 1) / n
        K = gram(pts[:, None], None, BoundaryConfig.from_mode("left", 1), "brownian")
        T = tridiag_inverse_1d(pts)
        assert np.max(np.abs(T @ K - np.eye(n))) <= 1e-12
        assert np.allclose(T, np.linalg.inv(K), rtol=0, atol=1e-9 * n)
        assert np.count_nonzero(np.triu(T, 2)) == 0

    @pytest.mark.parametrize("kind", ["full", "right"])
    def test_other_kinds(self, kind):
        pts = np.array([0.125, 0.25, 0.5, 0.75]) if kind == "full" else np.array([0.0, 0.25, 0.5, 0.875])
        K = gram(pts[:, None], None, BoundaryConfig.from_mode(kind, 1), "brownian")
        assert np.max(np.abs(tridiag_inverse_1d(pts, kind) @ K - np.eye(4))) <= 1e-12

    def test_unsorted_rejected(self):
        with pytest.raises(DomainError):
            tridiag_inverse_1d([0.5, 0.25])
        with pytest.raises(DomainError):
            tridiag_inverse_1d([0.5, 0.5])
        with pytest.raises(DomainError):
            tridiag_inverse_1d([0.0, 0.5])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 64), st.integers(0, 2**32 - 1))
    def test_fast_path_matches_dense(self, n, seed):
        rng = np.random.default_rng(seed)
        pts = np.sort(rng.choice(np.arange(1, 129), size=n, replace=False)) / 128.0
        X = rng.permutation(pts)[:, None]
        b = BoundaryConfig.from_mode("left", 1)

        def f(P):
            return np.sin(3 * P[:, 0]) + 1

        spec = MeanSpec(b, f)
        fast = fit(X, None, "brownian", spec, f, fast_path=True)
        dense = fit(X, None, "brownian", spec, f, fast_path=False)
        Q = rng.random((50, 1))
        assert np.max(np.abs(fast.predict(Q) - dense.predict(Q))) <= 1e-10


class TestEquivalence:
    @pytest.mark.parametrize("d,level", [(1, 4), (2, 3), (3, 2)])
    @pytest.mark.parametrize("mode", ["full", "left"])
    def test_full_grid(self, d, level, mode):
        b = BoundaryConfig.from_mode(mode, d)
        g = full_grid((level,) * d, b)
        f = TestFunction("corner_peak", d)
        spec = MeanSpec(b, f)
        m = fit(g, None, "brownian", spec, f)
        Q = np.random.default_rng(4).random((200, d))
        from bdrygp.boundary import mean_values

        mu = mean_values(Q, spec)
        fem = mu + lagrange_full(lambda P: f(P) - mean_values(P, spec), (level,) * d, b, Q)
        assert np.max(np.abs(m.predict(Q) - fem)) <= 1e-8

    @pytest.mark.parametrize("d,k", [(1, 5), (2, 4), (3, 3)])
    def test_sparse_grid(self, d, k):
        b = BoundaryConfig.from_mode("full", d)
        m = fit(sparse_grid(k, d, b), None, "brownian", MeanSpec(b, bubble), bubble)
        Q = np.random.default_rng(5).random((200, d))
        assert np.max(np.abs(m.predict(Q) - combination(bubble, k, b, Q))) <= 1e-8


def test_error_domination_ratio_bounded():
    d = 2
    b = BoundaryConfig.from_mode("full", d)
    f = TestFunction("product_peak", d)
    spec = MeanSpec(b, f)
    probe = np.random.default_rng(11).random((2000, d))
    truth = f(probe)
    ratios = {}
    for k in (2, 4, 6):
        X = sparse_grid(k, d, b).array()
        br = fit(X, None, "brownian", spec, f).predict(probe)
        bm = fit(X, KernelParams.isotropic(d, 1.0), "bdrymatern", spec, f).predict(probe)
        ratios[k] = np.max(np.abs(truth - br)) / np.max(np.abs(truth - bm))
    assert ratios[6] <= 2 * ratios[2]
