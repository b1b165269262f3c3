import numpy as np
import pytest
from numpy.testing import assert_allclose

from klgp.errors import DomainError
from klgp.kernels import KernelSpec, as_callback
from klgp.kl1d import kl_build_smooth, kl_build_nonsmooth, kl_eval_basis, kl_truncate
from klgp.quadrature import gauss_rule
from klgp.regression import Dataset, design_matrix, predict, ridge_fit


def make_se_expansion(n=30, m=None, lengthscale=0.2):
    kernel = as_callback(KernelSpec("squared-exponential", lengthscale=lengthscale))
    expansion = kl_build_smooth(kernel, (-1, 1), n)
    return kl_truncate(expansion, m) if m else expansion


def synthetic_dataset(count, noise=0.1, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, count)
    y = np.cos(3 * np.exp(x)) + noise * rng.standard_normal(count)
    return Dataset(x, y, noise)


class TestDesignMatrix:
    def test_constant_kernel_column_is_unit(self):
        kernel = as_callback(KernelSpec("constant"))
        expansion = kl_truncate(kl_build_smooth(kernel, (-1, 1), 8), 1)
        dataset = Dataset(np.linspace(-1, 1, 9), np.zeros(9), 0.1)
        design = design_matrix(expansion, dataset)
        assert design.shape == (9, 1)
        assert_allclose(np.abs(design.matrix[:, 0]), np.ones(9), atol=1e-12)

    def test_full_rank_at_gauss_points(self):
        # independent oracle: Gram determinant is bounded away from zero
        n = 8
        expansion = make_se_expansion(n=n)
        nodes, _ = gauss_rule(n).mapped(-1, 1)
        dataset = Dataset(nodes, np.zeros(n), 0.1)
        design = design_matrix(expansion, dataset)
        assert design.singular_values.min() > 0
        gram_det = np.linalg.det(design.matrix @ design.matrix.T)
        assert gram_det > 0

    def test_svd_reconstruction(self):
        expansion = make_se_expansion(n=30, m=25)
        dataset = synthetic_dataset(200)
        design = design_matrix(expansion, dataset)
        rebuilt = (design.u * design.singular_values) @ design.vt
        scale = np.max(np.abs(design.matrix))
        assert np.max(np.abs(design.matrix - rebuilt)) <= 1e-12 * scale
        m = design.shape[1]
        assert_allclose(design.u.T @ design.u, np.eye(m), atol=1e-12)
        assert_allclose(design.vt @ design.vt.T, np.eye(m), atol=1e-12)

    def test_point_outside_domain(self):
        expansion = make_se_expansion()
        with pytest.raises(DomainError):
            design_matrix(expansion, Dataset(np.array([0.0, 1.5]),
                                             np.zeros(2), 0.1))


class TestRidgeFit:
    def test_zero_targets_zero_mean(self):
        expansion = make_se_expansion(n=20)
        dataset = Dataset(np.linspace(-1, 1, 15), np.zeros(15), 0.3)
        summary = ridge_fit(design_matrix(expansion, dataset), dataset)
        assert_allclose(summary.beta_mean, np.zeros(expansion.m), atol=1e-15)

    def test_large_noise_shrinks_to_prior(self):
        expansion = make_se_expansion(n=20)
        rng = np.random.default_rng(1)
        dataset = Dataset(rng.uniform(-1, 1, 12), rng.standard_normal(12), 1e6)
        summary = ridge_fit(design_matrix(expansion, dataset), dataset)
        assert np.linalg.norm(summary.beta_mean) <= 1e-9

    def test_matches_dense_solve(self):
        expansion = make_se_expansion(n=12)
        dataset = synthetic_dataset(6, seed=3)
        design = design_matrix(expansion, dataset)
        summary = ridge_fit(design, dataset)
        x_mat = design.matrix
        dense = np.linalg.solve(
            x_mat.T @ x_mat + dataset.noise**2 * np.eye(expansion.m),
            x_mat.T @ dataset.targets)
        assert_allclose(summary.beta_mean, dense, rtol=1e-10, atol=1e-12)
        residual = (x_mat.T @ x_mat + dataset.noise**2 * np.eye(expansion.m)) \
            @ summary.beta_mean - x_mat.T @ dataset.targets
        assert np.linalg.norm(residual) <= 1e-10 * np.linalg.norm(
            x_mat.T @ dataset.targets)


class TestPredict:
    def test_matches_dense_data_space_solution(self):
        # push-through oracle: phi(x)^T beta == k_m(x, X)(K_m + s^2 I)^{-1} y
        expansion = make_se_expansion(n=12, m=8)
        dataset = synthetic_dataset(5, seed=4)
        design = design_matrix(expansion, dataset)
        summary = ridge_fit(design, dataset)
        x_test = np.linspace(-0.95, 0.95, 20)
        result = predict(expansion, summary, x_test)
        k_m = design.matrix @ design.matrix.T
        weights = np.linalg.solve(k_m + dataset.noise**2 * np.eye(dataset.size),
                                  dataset.targets)
        dense_mean = kl_eval_basis(expansion, x_test) @ design.matrix.T @ weights
        assert_allclose(result.mean, dense_mean, rtol=1e-9, atol=1e-12)

    def test_zero_data_and_prior_limit(self):
        expansion = make_se_expansion(n=16)
        x = np.linspace(-1, 1, 10)
        dataset = Dataset(x, np.zeros(10), 1e8)
        summary = ridge_fit(design_matrix(expansion, dataset), dataset)
        result = predict(expansion, summary, x)
        assert_allclose(result.mean, np.zeros(10), atol=1e-15)
        phi = kl_eval_basis(expansion, x)
        prior_var = np.sum(phi * phi, axis=1)  # effective kernel diagonal
        assert_allclose(result.latent_variance, prior_var, rtol=1e-6)

    def test_near_interpolation_at_tiny_noise(self):
        # noiseless synthetic drawn from the prior itself
        expansion = make_se_expansion(n=24, m=20)
        from klgp.kl1d import kl_sample
        x = np.linspace(-0.9, 0.9, 10)
        y = kl_sample(expansion, 7, x)
        dataset = Dataset(x, y, 1e-6)
        summary = ridge_fit(design_matrix(expansion, dataset), dataset)
        result = predict(expansion, summary, x)
        assert np.max(np.abs(result.mean - y)) < 1e-4

    def test_variance_positivity_and_bounds(self):
        expansion = make_se_expansion(n=20, m=12)
        rng = np.random.default_rng(9)
        for trial in range(10):
            count = int(rng.integers(1, 40))
            x = rng.uniform(-1, 1, count)
            y = rng.standard_normal(count)
            noise = float(rng.uniform(0.01, 2.0))
            dataset = Dataset(x, y, noise)
            summary = ridge_fit(design_matrix(expansion, dataset), dataset)
            x_test = rng.uniform(-1, 1, 15)
            result = predict(expansion, summary, x_test)
            assert np.all(result.predictive_variance >= noise**2)
            phi = kl_eval_basis(expansion, x_test)
            prior_var = np.sum(phi * phi, axis=1)
            assert np.all(result.latent_variance >= 0)
            assert np.all(result.latent_variance <= prior_var + 1e-10)

    def test_scalar_query(self):
        expansion = make_se_expansion(n=12)
        dataset = synthetic_dataset(8)
        summary = ridge_fit(design_matrix(expansion, dataset), dataset)
        result = predict(expansion, summary, 0.25)
        assert np.isscalar(result.mean)
        assert result.predictive_variance > result.latent_variance

    def test_underdetermined_fit_is_well_posed(self):
        # fewer observations than basis functions: thin SVD plus the prior
        # on the orthogonal complement
        expansion = make_se_expansion(n=25)
        dataset = synthetic_dataset(4, seed=5)
        summary = ridge_fit(design_matrix(expansion, dataset), dataset)
        result = predict(expansion, summary, np.array([0.1, 0.9]))
        assert np.all(np.isfinite(result.mean))
        assert np.all(result.latent_variance >= 0)


class TestReducedRankConsistency:
    def test_mean_converges_monotonically_to_full_rank(self):
        full = make_se_expansion(n=30)
        dataset = synthetic_dataset(40, seed=6)
        x_test = np.linspace(-0.9, 0.9, 25)
        summary_full = ridge_fit(design_matrix(full, dataset), dataset)
        reference = predict(full, summary_full, x_test).mean
        errors = []
        for m in (5, 10, 20, full.m):
            truncated = kl_truncate(full, m)
            summary = ridge_fit(design_matrix(truncated, dataset), dataset)
            mean = predict(truncated, summary, x_test).mean
            errors.append(np.max(np.abs(mean - reference)))
        assert errors[-1] <= 1e-12
        assert errors[0] >= errors[1] >= errors[2] >= errors[3]


class TestMixedKernelPushThrough:
    def test_random_instances(self):
        rng = np.random.default_rng(12)
        specs = [
            KernelSpec("squared-exponential", lengthscale=0.3),
            KernelSpec("matern", lengthscale=0.25, nu=1.5),
            KernelSpec("matern", lengthscale=0.4, nu=2.5),
        ]
        for trial in range(20):
            spec = specs[trial % len(specs)]
            builder = kl_build_smooth if spec.smooth else kl_build_nonsmooth
            n = int(rng.integers(10, 26))
            m = int(rng.integers(2, min(n, 21)))
            expansion = kl_truncate(builder(as_callback(spec), (-1, 1), n), m)
            count = int(rng.integers(2, 51))
            x = rng.uniform(-1, 1, count)
            y = rng.standard_normal(count)
            noise = float(rng.uniform(0.05, 1.0))
            dataset = Dataset(x, y, noise)
            design = design_matrix(expansion, dataset)
            summary = ridge_fit(design, dataset)
            x_test = rng.uniform(-1, 1, 7)
            mean = predict(expansion, summary, x_test).mean
            k_m = design.matrix @ design.matrix.T
            dense = kl_eval_basis(expansion, x_test) @ design.matrix.T @ \
                np.linalg.solve(k_m + noise**2 * np.eye(count), y)
            assert np.max(np.abs(mean - dense) / (1 + np.abs(mean))) <= 1e-9


class TestDatasetValidation:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros(3), np.zeros(4), 0.1)

    def test_bad_noise(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros(3), np.zeros(3), 0.0)

    def test_empty(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros(0), np.zeros(0), 0.1)

    def test_bad_input_shape(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((3, 3)), np.zeros(3), 0.1)
