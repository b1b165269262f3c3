import numpy as np
import pytest
from numpy.testing import assert_allclose

from klgp.errors import DomainError, ResourceLimitError
from klgp.kernels import KernelSpec, as_callback
from klgp.kl1d import kl_build_smooth, kl_eval_basis
from klgp.kl2d import kl2d_eval_basis, kl2d_truncate, kl_build_2d
from klgp.quadrature import gauss_rule

SQUARE = ((-1.0, 1.0), (-1.0, 1.0))


def separable_se(lengthscale):
    """k((x1,y1),(x2,y2)) = k1(x1,x2) k1(y1,y2) with a 1D SE factor."""
    def kernel(p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        dx = p[..., 0] - q[..., 0]
        dy = p[..., 1] - q[..., 1]
        return np.exp(-(dx * dx + dy * dy) / (2 * lengthscale**2))
    return kernel


class TestConstantKernel:
    def test_rank_one_with_area_eigenvalue(self):
        kernel = as_callback(KernelSpec("constant", dim=2))
        expansion = kl_build_2d(kernel, SQUARE, 6)
        assert expansion.eigenvalues[0] == pytest.approx(4.0, abs=1e-12)
        assert np.max(expansion.eigenvalues[1:]) <= 1e-12

    def test_unit_scaled_basis(self):
        kernel = as_callback(KernelSpec("constant", dim=2))
        expansion = kl2d_truncate(kl_build_2d(kernel, SQUARE, 6), 1)
        phi = kl2d_eval_basis(expansion, np.array([[0.3, -0.4], [0.9, 0.9]]))
        assert_allclose(np.abs(phi), np.ones((2, 1)), atol=1e-12)

    def test_rectangle_area(self):
        kernel = as_callback(KernelSpec("constant", dim=2))
        expansion = kl_build_2d(kernel, ((0.0, 2.0), (0.0, 1.0)), (6, 5))
        assert expansion.eigenvalues[0] == pytest.approx(2.0, abs=1e-12)


class TestSeparableKernel:
    def test_eigenvalues_are_products(self):
        n = 8
        kernel_2d = separable_se(0.25)
        two_d = kl_build_2d(kernel_2d, SQUARE, n)
        kernel_1d = as_callback(KernelSpec("squared-exponential", lengthscale=0.25))
        one_d = kl_build_smooth(kernel_1d, (-1, 1), n)
        products = np.sort(np.outer(one_d.eigenvalues,
                                    one_d.eigenvalues).ravel())[::-1]
        assert_allclose(two_d.eigenvalues, products, atol=1e-9)

    def test_top_eigenfunction_is_product(self):
        n = 8
        two_d = kl_build_2d(separable_se(0.25), SQUARE, n)
        kernel_1d = as_callback(KernelSpec("squared-exponential", lengthscale=0.25))
        one_d = kl_build_smooth(kernel_1d, (-1, 1), n)
        rng = np.random.default_rng(2)
        pts = rng.uniform(-1, 1, (25, 2))
        # lambda_1 is simple (the next product eigenvalue is well separated)
        phi2 = kl2d_eval_basis(two_d, pts)[:, 0]
        phi_x = kl_eval_basis(one_d, pts[:, 0])[:, 0]
        phi_y = kl_eval_basis(one_d, pts[:, 1])[:, 0]
        product = phi_x * phi_y / np.sqrt(one_d.eigenvalues[0]
                                          * one_d.eigenvalues[0])
        product *= np.sqrt(two_d.eigenvalues[0])
        err = min(np.max(np.abs(phi2 - product)), np.max(np.abs(phi2 + product)))
        assert err < 1e-8


class TestInvariants:
    def test_trace_preservation(self):
        kernel = as_callback(KernelSpec("squared-exponential",
                                        lengthscale=0.25, dim=2))
        n = 10
        expansion = kl_build_2d(kernel, SQUARE, n)
        nodes, weights = gauss_rule(n).mapped(-1, 1)
        w2 = np.repeat(weights, n) * np.tile(weights, n)
        assert np.sum(expansion.eigenvalues) == pytest.approx(np.sum(w2), abs=1e-12)
        assert np.sum(expansion.eigenvalues) == pytest.approx(4.0, abs=1e-12)

    def test_nystrom_matrix_reconstruction(self):
        # catches flattening-order bugs: rebuild the weighted Gram matrix
        # from the coefficient-tensor route and compare entrywise
        kernel = as_callback(KernelSpec("squared-exponential",
                                        lengthscale=0.4, dim=2))
        n = 7
        expansion = kl_build_2d(kernel, SQUARE, n)
        nodes, weights = gauss_rule(n).mapped(-1, 1)
        grid = np.empty((n * n, 2))
        grid[:, 0] = np.repeat(nodes, n)
        grid[:, 1] = np.tile(nodes, n)
        w2 = np.repeat(weights, n) * np.tile(weights, n)
        phi = kl2d_eval_basis(expansion, grid)
        khat = phi @ phi.T
        original = kernel(grid[:, None, :], grid[None, :, :])
        weighted_diff = np.sqrt(w2)[:, None] * (khat - original) * np.sqrt(w2)[None, :]
        assert np.max(np.abs(weighted_diff)) <= 1e-11

    def test_orthonormality_by_tensor_quadrature(self):
        kernel = as_callback(KernelSpec("squared-exponential",
                                        lengthscale=0.5, dim=2))
        expansion = kl_build_2d(kernel, ((0.0, 2.0), (-1.0, 0.0)), (7, 6))
        (a, b), (c, d) = expansion.domain
        qx, wx = gauss_rule(30).mapped(a, b)
        qy, wy = gauss_rule(30).mapped(c, d)
        grid = np.empty((30 * 30, 2))
        grid[:, 0] = np.repeat(qx, 30)
        grid[:, 1] = np.tile(qy, 30)
        w2 = np.repeat(wx, 30) * np.tile(wy, 30)
        lam = expansion.eigenvalues
        keep = lam > 1e-8 * lam[0]
        phi = kl2d_eval_basis(expansion, grid)[:, keep]
        u = phi / np.sqrt(lam[keep])
        gram = (u * w2[:, None]).T @ u
        assert_allclose(gram, np.eye(keep.sum()), atol=5e-9)

    def test_eigenvalues_sorted_and_clamped(self):
        kernel = as_callback(KernelSpec("matern", lengthscale=0.3, nu=1.5, dim=2))
        expansion = kl_build_2d(kernel, SQUARE, 8)
        lam = expansion.eigenvalues
        assert np.all(np.diff(lam) <= 0)
        assert np.all(lam >= 0)


class TestGuardsAndErrors:
    def test_axis_order_guard(self):
        kernel = as_callback(KernelSpec("constant", dim=2))
        with pytest.raises(ResourceLimitError):
            kl_build_2d(kernel, SQUARE, 49)

    def test_point_outside_rectangle(self):
        kernel = as_callback(KernelSpec("constant", dim=2))
        expansion = kl_build_2d(kernel, SQUARE, 4)
        with pytest.raises(DomainError):
            kl2d_eval_basis(expansion, np.array([1.2, 0.0]))

    def test_too_few_nodes(self):
        kernel = as_callback(KernelSpec("constant", dim=2))
        with pytest.raises(ValueError):
            kl_build_2d(kernel, SQUARE, (1, 5))

    def test_truncate_range(self):
        kernel = as_callback(KernelSpec("constant", dim=2))
        expansion = kl_build_2d(kernel, SQUARE, 4)
        with pytest.raises(ValueError):
            kl2d_truncate(expansion, 17)
