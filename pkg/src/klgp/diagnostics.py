"""Error control for KL expansions.

Three quantities drive order selection:

* the measured L2 kernel error  ||k - sum_i lambda_i u_i u_i||_2,
* the discretization proxy delta_max = max_i |lambda_i(n) - lambda_i(2n)|,
  which avoids a 2d-dimensional integral,
* the truncation tail sqrt(sum_{i>m} lambda_i^2), the L2 error an exact
  rank-m truncation would have.

For kernels with j continuous derivatives the eigenpair discretization
error decays like O(n^-(j+1)) and the tail algebraically in m; those rates
are background, not asserted anywhere - the code reports computed values
only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .kl1d import KLExpansion, kl_build_nonsmooth, kl_build_smooth, kl_eval_basis
from .kl2d import KLExpansion2D, kl2d_eval_basis
from .quadrature import adaptive_integrate, gauss_rule

__all__ = [
    "ErrorReport",
    "OrderSelection",
    "truncation_tail",
    "effective_kernel_error",
    "discretization_proxy",
    "choose_order",
    "convergence_table",
]


@dataclass(frozen=True)
class ErrorReport:
    """Discretization / truncation error summary for a build at (n, m)."""

    delta_max: float
    tail: float
    proxy_total: float
    epsilon: float | None = None


def truncation_tail(eigenvalues, m: int) -> float:
    """sqrt(sum_{i>m} lambda_i^2) over the supplied (untruncated) spectrum."""
    lam = np.asarray(eigenvalues, dtype=float)
    if not 0 <= m <= len(lam):
        raise ValueError(f"truncation order {m} outside [0, {len(lam)}]")
    return float(np.sqrt(np.sum(lam[m:] ** 2)))


def _tensor_l2_sq_1d(kernel, expansion, quad_order):
    a, b = expansion.domain
    nodes, weights = gauss_rule(quad_order).mapped(a, b)
    phi = kl_eval_basis(expansion, nodes)  # (Q, m)
    khat = phi @ phi.T
    k = np.asarray(kernel(nodes[:, None], nodes[None, :]), dtype=float)
    return float(weights @ (k - khat) ** 2 @ weights), float(np.max(np.abs(k)))


def _effective_kernel_error_1d(kernel, expansion, tol):
    a, b = expansion.domain
    coarse_sq, k_scale = _tensor_l2_sq_1d(kernel, expansion, 2 * expansion.n + 32)
    # tol is relative on epsilon = sqrt(I); I needs |dI| <= 2 * tol * I.
    tol_sq = max(2.0 * tol * coarse_sq, 1e-31)
    inner_tol = tol_sq / (16.0 * (b - a))
    # Refining past the evaluation noise of the squared difference is
    # pointless: (k - khat) carries ~eps * k_scale of rounding per point.
    eval_noise = 4 * np.finfo(float).eps * k_scale
    rms_diff = np.sqrt(max(coarse_sq, 0.0)) / (b - a)
    floor = 8.0 * (rms_diff * eval_noise + eval_noise**2)

    def section_error_sq(x):
        phi_x = kl_eval_basis(expansion, x)

        def integrand(ys):
            k_vals = np.asarray(kernel(x, ys), dtype=float)
            khat = kl_eval_basis(expansion, ys) @ phi_x
            diff = k_vals - khat
            return diff * diff

        return adaptive_integrate(integrand, a, b, inner_tol, noise_floor=floor)

    total_sq = adaptive_integrate(section_error_sq, a, b, tol_sq,
                                  noise_floor=2.0 * floor * (b - a))
    return float(np.sqrt(max(total_sq, 0.0)))


def _effective_kernel_error_2d(kernel, expansion):
    # Fixed tensor Gauss rule with 2n nodes per axis; a 4D adaptive
    # integral would buy nothing at these smoothness levels.
    (a, b), (c, d) = expansion.domain
    nx, ny = expansion.orders
    qx, wx = gauss_rule(2 * nx).mapped(a, b)
    qy, wy = gauss_rule(2 * ny).mapped(c, d)
    grid = np.empty((len(qx) * len(qy), 2))
    grid[:, 0] = np.repeat(qx, len(qy))
    grid[:, 1] = np.tile(qy, len(qx))
    weights = np.repeat(wx, len(qy)) * np.tile(wy, len(qx))
    phi = kl2d_eval_basis(expansion, grid)  # (G, m)
    khat = phi @ phi.T
    k = np.asarray(kernel(grid[:, None, :], grid[None, :, :]), dtype=float)
    total_sq = float(weights @ (k - khat) ** 2 @ weights)
    return float(np.sqrt(max(total_sq, 0.0)))


def effective_kernel_error(kernel, expansion, tol: float = 0.02) -> float:
    """Measured L2 distance between k and the expansion's effective kernel.

    1D expansions use nested adaptive quadrature, resolved to a relative
    tolerance ``tol`` on the returned error; 2D expansions use a fixed
    tensor rule with twice the build order per axis.  Non-convergence of
    the adaptive quadrature raises QuadratureError with a partial value.
    """
    if isinstance(expansion, KLExpansion2D):
        return _effective_kernel_error_2d(kernel, expansion)
    if isinstance(expansion, KLExpansion):
        return _effective_kernel_error_1d(kernel, expansion, tol)
    raise TypeError(f"not a KL expansion: {type(expansion).__name__}")


def discretization_proxy(kernel, domain, n: int, m: int,
                         builder=kl_build_smooth) -> ErrorReport:
    """Compare spectra at n and 2n nodes and report the error proxy.

    delta_max is the largest per-index eigenvalue shift over i <= m (sorted
    spectra; clusters make this conservative, which only overestimates).
    The tail at m always comes from the untruncated 2n spectrum.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    small = builder(kernel, domain, n)
    big = builder(kernel, domain, 2 * n)
    return _proxy_from_spectra(small.eigenvalues, big.eigenvalues, m)


def _proxy_from_spectra(lam_small, lam_big, m):
    delta_max = float(np.max(np.abs(lam_small[:m] - lam_big[:m])))
    tail = truncation_tail(lam_big, m)
    return ErrorReport(delta_max=delta_max, tail=tail,
                       proxy_total=delta_max + tail)


class OrderSelection(NamedTuple):
    n: int
    m: int
    report: ErrorReport
    converged: bool


def choose_order(kernel, domain, target: float, smoothness: str,
                 start: int = 16, cap: int = 1024) -> OrderSelection:
    """Smallest doubling order whose error proxy meets ``target``.

    Doubles n from ``start``; at each candidate, m is the smallest
    truncation whose tail (from the 2n build) is <= target / 2.  Stops when
    delta_max + tail <= target or the cap is reached, in which case the
    best-effort result is returned with ``converged=False``.
    """
    if not target > 1e-14:
        raise ValueError(f"target must exceed 1e-14, got {target}")
    if smoothness not in ("smooth", "nonsmooth"):
        raise ValueError(f"smoothness must be 'smooth' or 'nonsmooth', got {smoothness!r}")
    builder = kl_build_smooth if smoothness == "smooth" else kl_build_nonsmooth

    n = start
    small = builder(kernel, domain, n)
    while True:
        big = builder(kernel, domain, 2 * n)
        lam_big = big.eigenvalues
        tail_sq = np.cumsum((lam_big**2)[::-1])[::-1]  # tail_sq[m] = sum_{i>=m}
        tails = np.sqrt(np.append(tail_sq[1:], 0.0))
        eligible = np.nonzero(tails[: n] <= target / 2)[0]
        m = int(eligible[0]) + 1 if len(eligible) else n
        report = _proxy_from_spectra(small.eigenvalues, lam_big, m)
        if report.proxy_total <= target:
            return OrderSelection(n=n, m=m, report=report, converged=True)
        if 2 * n > cap:
            return OrderSelection(n=n, m=m, report=report, converged=False)
        n *= 2
        small = big if big.n == n else builder(kernel, domain, n)


def convergence_table(kernel, domain, orders, builder=kl_build_smooth,
                      compute_l2=True, tol=0.02):
    """Rows of (n, m, delta_max, tail, epsilon, seconds) for a sweep of n.

    m = n throughout (full expansions), matching how the accuracy tables
    are reported.  ``epsilon`` is None when compute_l2 is off.
    """
    rows = []
    for n in orders:
        started = time.perf_counter()
        expansion = builder(kernel, domain, n)
        report = discretization_proxy(kernel, domain, n, n, builder=builder)
        epsilon = None
        if compute_l2:
            epsilon = effective_kernel_error(kernel, expansion, tol=tol)
        rows.append({
            "n": n,
            "m": n,
            "delta_max": report.delta_max,
            "tail": report.tail,
            "epsilon": epsilon,
            "seconds": time.perf_counter() - started,
        })
    return rows
