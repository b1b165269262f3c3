"""KL expansions on rectangles via tensor-product Gauss discretization.

The weighted Nystrom matrix lives on the tensor grid of per-axis Gauss
nodes, flattened row-major: grid point (i, j) maps to row i * ny + j.  Any
bijective flattening works as long as it is used consistently; the
round-trip test in the suite reconstructs the Nystrom matrix from the
eigenpairs to pin this down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceLimitError
from .kl1d import _check_symmetric, _clamp_spectrum
from .quadrature import gauss_rule, legendre_table, vals_to_coefs_map

__all__ = ["KLExpansion2D", "kl_build_2d", "kl2d_eval_basis", "kl2d_truncate"]

MAX_AXIS_ORDER = 48


@dataclass(frozen=True)
class KLExpansion2D:
    """A truncated KL expansion on a rectangle [a, b] x [c, d].

    ``coefficients[l, i, j]`` is the coefficient of P_i(tx) P_j(ty) in the
    l-th eigenfunction, with per-axis mapped variables tx, ty; the scaling
    makes eigenfunctions orthonormal in L2 of the rectangle.
    """

    domain: tuple[tuple[float, float], tuple[float, float]]
    orders: tuple[int, int]
    eigenvalues: np.ndarray
    coefficients: np.ndarray
    algorithm: str = "algorithm-4"

    @property
    def m(self) -> int:
        return len(self.eigenvalues)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        coefs = np.asarray(self.coefficients, dtype=float)
        lam.setflags(write=False)
        coefs.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "coefficients", coefs)


def _rect(domain):
    (a, b), (c, d) = domain
    a, b, c, d = float(a), float(b), float(c), float(d)
    if not (b > a and d > c):
        raise ValueError(f"invalid rectangle [{a},{b}] x [{c},{d}]")
    return (a, b), (c, d)


def kl_build_2d(kernel, domain, n) -> KLExpansion2D:
    """Full KL expansion of a kernel on a rectangle.

    Parameters
    ----------
    kernel : callable
        Symmetric PSD kernel k(p, q) on point pairs; must broadcast over
        arrays whose last axis holds the two coordinates.
    domain : ((a, b), (c, d))
        Rectangle as a pair of per-axis intervals.
    n : int or (int, int)
        Per-axis node counts.  The dense eigenproblem has size
        (nx * ny)^2, so each axis order is capped at 48.

    Returns the full m = nx * ny expansion, eigenvalues descending.
    """
    if np.isscalar(n):
        nx = ny = int(n)
    else:
        nx, ny = (int(v) for v in n)
    if nx < 2 or ny < 2:
        raise ValueError(f"need at least 2 nodes per axis, got ({nx}, {ny})")
    if nx > MAX_AXIS_ORDER or ny > MAX_AXIS_ORDER:
        raise ResourceLimitError(
            f"per-axis order ({nx}, {ny}) exceeds the dense-eigensolver guard "
            f"of {MAX_AXIS_ORDER}; the {nx * ny} x {ny * nx} eigenproblem "
            "would be impractical"
        )
    (a, b), (c, d) = _rect(domain)
    rule_x, rule_y = gauss_rule(nx), gauss_rule(ny)
    x_nodes, x_weights = rule_x.mapped(a, b)
    y_nodes, y_weights = rule_y.mapped(c, d)

    points = np.empty((nx * ny, 2))
    points[:, 0] = np.repeat(x_nodes, ny)
    points[:, 1] = np.tile(y_nodes, nx)
    weights = np.repeat(x_weights, ny) * np.tile(y_weights, nx)

    gram = np.asarray(kernel(points[:, None, :], points[None, :, :]), dtype=float)
    if gram.shape != (nx * ny, nx * ny):
        raise ValueError(
            "2D kernel callback must broadcast over point arrays with a "
            f"trailing coordinate axis; got result shape {gram.shape}"
        )
    _check_symmetric(gram, "the kernel Gram matrix")
    sqrt_w = np.sqrt(weights)
    weighted = sqrt_w[:, None] * gram * sqrt_w[None, :]

    lam, vecs = np.linalg.eigh(weighted)
    lam = lam[::-1].copy()
    vecs = vecs[:, ::-1]
    lam = _clamp_spectrum(lam)

    node_values = vecs / sqrt_w[:, None]
    mx = vals_to_coefs_map(nx).matrix
    my = vals_to_coefs_map(ny).matrix
    m = nx * ny
    coefs = np.empty((m, nx, ny))
    for l in range(m):
        coefs[l] = mx @ node_values[:, l].reshape(nx, ny) @ my.T
    flat = coefs.reshape(m, -1)
    idx = np.argmax(np.abs(flat), axis=1)
    flip = flat[np.arange(m), idx] < 0
    coefs[flip] *= -1.0
    return KLExpansion2D(domain=((a, b), (c, d)), orders=(nx, ny),
                         eigenvalues=lam, coefficients=coefs)


def kl2d_truncate(expansion: KLExpansion2D, m: int) -> KLExpansion2D:
    """Keep the m largest eigenpairs."""
    if not 1 <= m <= expansion.m:
        raise ValueError(f"truncation order {m} outside [1, {expansion.m}]")
    if m == expansion.m:
        return expansion
    return KLExpansion2D(
        domain=expansion.domain,
        orders=expansion.orders,
        eigenvalues=expansion.eigenvalues[:m].copy(),
        coefficients=expansion.coefficients[:m].copy(),
        algorithm=expansion.algorithm,
    )


def kl2d_eval_basis(expansion: KLExpansion2D, p):
    """Scaled basis (phi_1(p), ..., phi_m(p)) at points of the rectangle.

    ``p`` is a single point (length-2 sequence) or an (N, 2) array.
    """
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 1
    pts = np.atleast_2d(p)
    if pts.shape[1] != 2:
        raise ValueError(f"expected points with 2 coordinates, got shape {p.shape}")
    (a, b), (c, d) = expansion.domain
    if (np.any(pts[:, 0] < a) or np.any(pts[:, 0] > b)
            or np.any(pts[:, 1] < c) or np.any(pts[:, 1] > d)):
        raise DomainError(
            f"point outside the build rectangle [{a},{b}] x [{c},{d}]"
        )
    nx, ny = expansion.orders
    tx = (2 * pts[:, 0] - a - b) / (b - a)
    ty = (2 * pts[:, 1] - c - d) / (d - c)
    px = legendre_table(nx, tx)  # (nx, N)
    py = legendre_table(ny, ty)  # (ny, N)
    # Khatri-Rao product collapses the tensor contraction to one matmul.
    kr = (px[:, None, :] * py[None, :, :]).reshape(nx * ny, -1)
    values = expansion.coefficients.reshape(expansion.m, -1) @ kr  # (m, N)
    phi = (np.sqrt(expansion.eigenvalues)[:, None] * values).T
    return phi[0] if scalar else phi
