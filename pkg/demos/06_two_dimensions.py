"""KL expansions and regression on a rectangle.

The discretization is a tensor product of per-axis Gauss rules; the dense
eigenproblem has size (nx ny)^2, which keeps per-axis orders modest, but a
20 x 20 grid already reaches ~5e-5 L2 kernel accuracy for smooth kernels.
"""

import time

import numpy as np

from klgp import (
    Dataset,
    KernelSpec,
    as_callback,
    design_matrix,
    effective_kernel_error,
    kl_build_2d,
    kl_build_smooth,
    predict,
    ridge_fit,
)

square = ((-1.0, 1.0), (-1.0, 1.0))
kernel2d = as_callback(KernelSpec("squared-exponential", lengthscale=0.25, dim=2))

t0 = time.perf_counter()
expansion = kl_build_2d(kernel2d, square, 15)
print(f"15x15 build: {time.perf_counter() - t0:.2f}s, m = {expansion.m}")
print("L2 kernel error:", f"{effective_kernel_error(kernel2d, expansion):.2e}")

# For separable kernels the 2D eigenvalues are products of 1D ones.
kernel1d = as_callback(KernelSpec("squared-exponential", lengthscale=0.25))
lam1 = kl_build_smooth(kernel1d, (-1, 1), 15).eigenvalues
products = np.sort(np.outer(lam1, lam1).ravel())[::-1]
print("top 2D eigenvalues vs products of 1D eigenvalues:")
for i in range(4):
    print(f"  {expansion.eigenvalues[i]:.10f} vs {products[i]:.10f}")

# Regression on the usual 2D synthetic: y = -x2 + sin(6 x1) + noise.
rng = np.random.default_rng(3)
side = 50
g = np.linspace(-1, 1, side)
pts = np.column_stack([np.repeat(g, side), np.tile(g, side)])
targets = -pts[:, 1] + np.sin(6 * pts[:, 0]) + 0.1 * rng.standard_normal(side**2)
dataset = Dataset(pts, targets, 0.1)

t0 = time.perf_counter()
summary = ridge_fit(design_matrix(expansion, dataset), dataset)
print(f"\nfit with N = {dataset.size}: {time.perf_counter() - t0:.2f}s")

probe = np.array([[-0.5, -0.5], [0.0, 0.3], [0.6, -0.2], [0.9, 0.9]])
result = predict(expansion, summary, probe)
print(f"{'x1':>6s} {'x2':>6s} {'truth':>8s} {'mean':>8s}")
for p, mean in zip(probe, result.mean):
    truth = -p[1] + np.sin(6 * p[0])
    print(f"{p[0]:>6.2f} {p[1]:>6.2f} {truth:>8.3f} {mean:>8.3f}")
