import numpy as np
import pytest

from klgp.kernels import KernelSpec, as_callback


@pytest.fixture
def se_kernel():
    """Unit-amplitude squared-exponential with lengthscale 0.2."""
    return as_callback(KernelSpec("squared-exponential", lengthscale=0.2))


@pytest.fixture
def matern32_kernel():
    return as_callback(KernelSpec("matern", lengthscale=0.2, nu=1.5))


@pytest.fixture
def brownian_kernel():
    return as_callback(KernelSpec("brownian"))


@pytest.fixture
def constant_kernel():
    return as_callback(KernelSpec("constant"))


def brownian_eigenvalue(j):
    """Closed-form eigenvalues of min(x, x') on [0, 1]: 4 / ((2j-1) pi)^2."""
    return 4.0 / ((2 * j - 1) ** 2 * np.pi**2)


def brownian_eigenfunction(j, x):
    """Closed-form unit-norm eigenfunctions sqrt(2) sin((j - 1/2) pi x)."""
    return np.sqrt(2.0) * np.sin((j - 0.5) * np.pi * np.asarray(x))
