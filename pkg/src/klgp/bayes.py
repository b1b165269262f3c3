"""Bayesian hyperparameter inference with the coefficients marginalized out.

The model has three hyperparameters: kernel amplitude alpha (half-normal
prior), observation noise sigma (half-normal), and lengthscale ell (uniform).
Conditional on (ell, alpha, sigma) the coefficient posterior is Gaussian and
the evidence is available in closed form through the SVD of the design
matrix, so the hyperparameter posterior reduces to a three-dimensional
quadrature:

* ell is discretized once with Gauss nodes on its prior support; each node
  gets its own KL expansion (same discretization order n everywhere, so
  posterior-mean functions share a Legendre basis and can be mixed).
* (alpha, sigma) are integrated per ell-node with a tensor Gauss rule.  The
  evidence concentrates like 1/sqrt(N), so a fixed grid over the whole prior
  box under-resolves it badly for large N; the rectangle is therefore
  centered on the conditional posterior mode with a width of a few posterior
  standard deviations (found by a deterministic zoom search), clipped to the
  prior truncation box.

All mass bookkeeping runs in log space with a running maximum; posterior
moments and the mixed posterior-mean function are exact sums over the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec, as_callback
from .kl1d import kl_build_smooth
from .quadrature import LegendreSeries, gauss_rule
from .regression import Dataset, DesignMatrix, design_matrix, _svd_log_evidence

__all__ = ["PriorSpec", "BayesGrid", "BayesPosterior", "log_evidence", "bayes_fit"]


@dataclass(frozen=True)
class PriorSpec:
    """Hyperpriors: half-normal scales for alpha and sigma, uniform ell range.

    The half-normal N+(0, s) is parameterized by its scale (standard
    deviation of the underlying normal) s.
    """

    alpha_scale: float = 3.0
    sigma_scale: float = 3.0
    ell_bounds: tuple[float, float] = (0.02, 1.0)

    def __post_init__(self):
        if not (self.alpha_scale > 0 and self.sigma_scale > 0):
            raise ValueError("prior scales must be positive")
        lo, hi = self.ell_bounds
        if not 0 < lo < hi:
            raise ValueError(f"need 0 < ell_lo < ell_hi, got ({lo}, {hi})")

    def log_alpha_density(self, value):
        s = self.alpha_scale
        return 0.5 * np.log(2 / np.pi) - np.log(s) - value**2 / (2 * s**2)

    def log_sigma_density(self, value):
        s = self.sigma_scale
        return 0.5 * np.log(2 / np.pi) - np.log(s) - value**2 / (2 * s**2)


@dataclass(frozen=True)
class BayesGrid:
    """Quadrature layout for the hyperparameter marginalization.

    ell_count Gauss nodes cover the ell prior range; alpha_count x
    sigma_count tensor Gauss nodes cover an adapted (alpha, sigma)
    rectangle, truncated at prior_truncation prior scales.  Pinning an axis
    replaces its rule by a single unit-weight node (point mass), which turns
    the fit into the corresponding conditional model.
    """

    ell_count: int = 100
    alpha_count: int = 40
    sigma_count: int = 40
    prior_truncation: float = 6.0
    mode_window: float = 8.0
    alpha_pin: float | None = None
    sigma_pin: float | None = None

    def __post_init__(self):
        if min(self.ell_count, self.alpha_count, self.sigma_count) < 1:
            raise ValueError("grid counts must be >= 1")
        if not self.prior_truncation > 0 or not self.mode_window > 0:
            raise ValueError("truncation and window factors must be positive")
        for pin in (self.alpha_pin, self.sigma_pin):
            if pin is not None and not pin > 0:
                raise ValueError(f"pinned values must be positive, got {pin}")


@dataclass(frozen=True)
class BayesPosterior:
    """Moments of the hyperparameter posterior and the mixed mean function."""

    log_normalizer: float
    alpha_mean: float
    alpha_variance: float
    sigma_mean: float
    sigma_variance: float
    ell_mean: float
    ell_variance: float
    mean_series: LegendreSeries
    ell_nodes: np.ndarray
    ell_posterior_weights: np.ndarray
    expansions: dict = field(repr=False)


def log_evidence(design: DesignMatrix, targets, alpha: float, sigma: float) -> float:
    """log N(y | 0, alpha X X^T + sigma^2 I) through the design SVD.

    alpha is the prior variance of the coefficients; alpha = 0 turns the
    prior off and the density reduces to N(y | 0, sigma^2 I).
    """
    y = np.asarray(targets, dtype=float)
    z = design.u.T @ y
    residual_sq = max(float(y @ y - z @ z), 0.0)
    return _svd_log_evidence(design.singular_values, z, residual_sq,
                             len(y), alpha, sigma)


def _log_evidence_grid(s, z, residual_sq, n_obs, alphas, sigmas):
    """Vectorized evidence over an (alpha, sigma) tensor grid -> (A, S)."""
    marginal = (alphas[:, None, None] * (s * s)[None, None, :]
                + (sigmas * sigmas)[None, :, None])
    logdet = np.sum(np.log(marginal), axis=2) \
        + (n_obs - len(s)) * np.log(sigmas * sigmas)[None, :]
    quad = np.sum((z * z)[None, None, :] / marginal, axis=2) \
        + residual_sq / (sigmas * sigmas)[None, :]
    return -0.5 * (logdet + quad + n_obs * math.log(2 * math.pi))


def _zoom_mode(objective_grid, lo_a, hi_a, lo_s, hi_s, rounds=18, size=13):
    """Deterministic zoom search for the maximizer of a 2D log density.

    objective_grid(alphas, sigmas) -> (A, S) values.  Starts from a
    geometric grid over the full box and halves the (log-space) window
    around the running argmax each round.
    """
    best_a = best_s = None
    la, ha = math.log(lo_a), math.log(hi_a)
    ls, hs = math.log(lo_s), math.log(hi_s)
    for _ in range(rounds):
        alphas = np.exp(np.linspace(la, ha, size))
        sigmas = np.exp(np.linspace(ls, hs, size))
        values = objective_grid(alphas, sigmas)
        i, j = np.unravel_index(np.argmax(values), values.shape)
        best_a, best_s = alphas[i], sigmas[j]
        step_a = (ha - la) / (size - 1)
        step_s = (hs - ls) / (size - 1)
        la, ha = math.log(best_a) - step_a, math.log(best_a) + step_a
        ls, hs = math.log(best_s) - step_s, math.log(best_s) + step_s
    return best_a, best_s


def _curvature_sd(objective, value, other_fixed, which, bound):
    """Posterior standard deviation from a second difference at the mode."""
    h = max(1e-4 * value, 1e-12)
    if which == "alpha":
        f = lambda v: objective(np.array([v]), np.array([other_fixed]))[0, 0]
    else:
        f = lambda v: objective(np.array([other_fixed]), np.array([v]))[0, 0]
    second = (f(value + h) - 2 * f(value) + f(max(value - h, h * 1e-6))) / h**2
    if second < 0:
        return 1.0 / math.sqrt(-second)
    return bound  # flat or rising: cover the whole box


def _axis_rule(count, lo, hi):
    nodes, weights = gauss_rule(count).mapped(lo, hi)
    return nodes, weights


def _hyper_rectangle(objective, priors, grid):
    """Adapted (alpha, sigma) integration rectangle inside the prior box."""
    a_hi = grid.prior_truncation * priors.alpha_scale
    s_hi = grid.prior_truncation * priors.sigma_scale
    a_lo_min, s_lo_min = a_hi * 1e-12, s_hi * 1e-12
    mode_a, mode_s = _zoom_mode(objective, a_lo_min, a_hi, s_lo_min, s_hi)
    sd_a = _curvature_sd(objective, mode_a, mode_s, "alpha", a_hi)
    sd_s = _curvature_sd(objective, mode_s, mode_a, "sigma", s_hi)
    w = grid.mode_window
    a_lo = max(a_lo_min, mode_a - w * sd_a)
    a_hi_adapted = min(a_hi, mode_a + w * sd_a)
    s_lo = max(s_lo_min, mode_s - w * sd_s)
    s_hi_adapted = min(s_hi, mode_s + w * sd_s)
    return (a_lo, a_hi_adapted), (s_lo, s_hi_adapted)


def _expansion_key(spec: KernelSpec, domain, n):
    return (spec.family, spec.nu, float(spec.lengthscale),
            float(domain[0]), float(domain[1]), int(n))


def bayes_fit(spec: KernelSpec, priors: PriorSpec, grid: BayesGrid,
              dataset: Dataset, domain, n: int = 140,
              expansion_cache: dict | None = None) -> BayesPosterior:
    """Posterior moments under the three-hyperparameter model.

    ``spec`` fixes the kernel family (its lengthscale and amplitude fields
    are ignored: ell comes from the grid, alpha from the prior).  Unit-
    amplitude expansions are built per ell node - with the coefficient
    prior variance alpha, the implied kernel is alpha * k, so no rebuild is
    needed across alpha.  ``expansion_cache`` (a dict) is consulted and
    filled; passing the same cache to repeated fits skips the rebuilds
    without changing a single output bit.

    Returns hyperparameter means/variances and the posterior-mean function
    mixed across the full grid, as Legendre coefficients on ``domain``.
    """
    if spec.dim != 1:
        raise ValueError("Bayesian fitting is implemented for 1D expansions")
    if np.asarray(dataset.inputs).ndim != 1:
        raise ValueError("dataset does not match a 1D expansion")
    if expansion_cache is None:
        expansion_cache = {}

    lo, hi = priors.ell_bounds
    ell_nodes, ell_weights = _axis_rule(grid.ell_count, lo, hi)
    log_ell_prior = -math.log(hi - lo)

    y = dataset.targets
    n_obs = dataset.size

    log_mass = np.empty(len(ell_nodes))
    cond_alpha = np.empty((len(ell_nodes), 2))  # E[alpha], E[alpha^2] per ell
    cond_sigma = np.empty((len(ell_nodes), 2))
    cond_coefs = np.empty((len(ell_nodes), n))

    for idx, ell in enumerate(ell_nodes):
        kspec = KernelSpec(family=spec.family, amplitude=1.0,
                           lengthscale=float(ell), nu=spec.nu, dim=1)
        key = _expansion_key(kspec, domain, n)
        expansion = expansion_cache.get(key)
        if expansion is None:
            expansion = kl_build_smooth(as_callback(kspec), domain, n)
            expansion_cache[key] = expansion
        design = design_matrix(expansion, dataset)
        s = design.singular_values
        z = design.u.T @ y
        residual_sq = max(float(y @ y - z @ z), 0.0)

        def objective(alphas, sigmas):
            return (_log_evidence_grid(s, z, residual_sq, n_obs, alphas, sigmas)
                    + priors.log_alpha_density(alphas)[:, None]
                    + priors.log_sigma_density(sigmas)[None, :])

        if grid.alpha_pin is not None and grid.sigma_pin is not None:
            a_nodes = np.array([grid.alpha_pin]); a_w = np.ones(1)
            s_nodes = np.array([grid.sigma_pin]); s_w = np.ones(1)
        else:
            (a_lo, a_hi), (s_lo, s_hi) = _hyper_rectangle(objective, priors, grid)
            if grid.alpha_pin is not None:
                a_nodes = np.array([grid.alpha_pin]); a_w = np.ones(1)
            else:
                a_nodes, a_w = _axis_rule(grid.alpha_count, a_lo, a_hi)
            if grid.sigma_pin is not None:
                s_nodes = np.array([grid.sigma_pin]); s_w = np.ones(1)
            else:
                s_nodes, s_w = _axis_rule(grid.sigma_count, s_lo, s_hi)

        log_q = objective(a_nodes, s_nodes) \
            + np.log(a_w)[:, None] + np.log(s_w)[None, :]
        peak = float(np.max(log_q))
        mass = np.exp(log_q - peak)
        total = float(np.sum(mass))
        log_mass[idx] = peak + math.log(total) \
            + math.log(ell_weights[idx]) + log_ell_prior
        weights = mass / total

        cond_alpha[idx, 0] = float(weights.sum(axis=1) @ a_nodes)
        cond_alpha[idx, 1] = float(weights.sum(axis=1) @ (a_nodes**2))
        cond_sigma[idx, 0] = float(weights.sum(axis=0) @ s_nodes)
        cond_sigma[idx, 1] = float(weights.sum(axis=0) @ (s_nodes**2))

        # E[alpha d / (alpha d^2 + sigma^2)] per singular direction, then one
        # back-rotation gives the conditional mean of the coefficient vector.
        gain = (a_nodes[:, None, None] * s[None, None, :]
                / (a_nodes[:, None, None] * (s * s)[None, None, :]
                   + (s_nodes * s_nodes)[None, :, None]))
        mean_gain = np.einsum("as,asj->j", weights, gain)
        beta_mean = design.vt.T @ (mean_gain * z)
        cond_coefs[idx] = expansion.coefficients @ (
            np.sqrt(expansion.eigenvalues) * beta_mean)

    peak = float(np.max(log_mass))
    ell_post = np.exp(log_mass - peak)
    ell_post /= ell_post.sum()
    log_normalizer = peak + math.log(float(np.sum(np.exp(log_mass - peak))))

    alpha_mean = float(ell_post @ cond_alpha[:, 0])
    alpha_var = max(float(ell_post @ cond_alpha[:, 1]) - alpha_mean**2, 0.0)
    sigma_mean = float(ell_post @ cond_sigma[:, 0])
    sigma_var = max(float(ell_post @ cond_sigma[:, 1]) - sigma_mean**2, 0.0)
    ell_mean = float(ell_post @ ell_nodes)
    ell_var = max(float(ell_post @ (ell_nodes**2)) - ell_mean**2, 0.0)
    mixed_coefs = ell_post @ cond_coefs

    return BayesPosterior(
        log_normalizer=log_normalizer,
        alpha_mean=alpha_mean, alpha_variance=alpha_var,
        sigma_mean=sigma_mean, sigma_variance=sigma_var,
        ell_mean=ell_mean, ell_variance=ell_var,
        mean_series=LegendreSeries(mixed_coefs, domain=tuple(map(float, domain))),
        ell_nodes=ell_nodes,
        ell_posterior_weights=ell_post,
        expansions=expansion_cache,
    )
