"""Reduced-rank GP regression: design matrix, SVD ridge solve, prediction.

With the prior written in the scaled eigenfunction basis, GP regression is
ridge regression on the expansion coefficients.  Every posterior quantity is
routed through the thin SVD of the N x m design matrix; the N x N data-space
system is never formed, so a fit costs O(N m^2) and predictions O(m) each.

Note on the data-space identity: (X X^T + s^2 I)^{-1} equals
U (D^2 + s^2 I)^{-1} U^T only on the column span of U; the orthogonal
complement contributes (I - U U^T)/s^2.  The coefficient-space (push-through)
form used here is exact and never touches the complement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .kl1d import KLExpansion, kl_eval_basis
from .kl2d import KLExpansion2D, kl2d_eval_basis

__all__ = ["Dataset", "DesignMatrix", "PosteriorSummary", "Prediction",
           "design_matrix", "ridge_fit", "predict"]


@dataclass(frozen=True)
class Dataset:
    """Observed inputs, targets, and the observation-noise level.

    inputs : ndarray, shape (N,) for 1D or (N, 2) for 2D
    targets : ndarray, shape (N,)
    noise : float, standard deviation of the iid Gaussian observation noise
    """

    inputs: np.ndarray
    targets: np.ndarray
    noise: float

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.targets, dtype=float)
        if x.ndim not in (1, 2) or (x.ndim == 2 and x.shape[1] != 2):
            raise ValueError(f"inputs must be (N,) or (N, 2), got {x.shape}")
        if y.shape != (x.shape[0],):
            raise ValueError(
                f"targets shape {y.shape} does not match {x.shape[0]} inputs"
            )
        if x.shape[0] < 1:
            raise ValueError("need at least one observation")
        if not self.noise > 0:
            raise ValueError(f"noise must be > 0, got {self.noise}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", y)

    @property
    def size(self) -> int:
        return len(self.targets)


def basis_at(expansion, x):
    """Scaled-basis rows phi_j(x_i) for either a 1D or 2D expansion."""
    if isinstance(expansion, KLExpansion2D):
        return kl2d_eval_basis(expansion, x)
    if isinstance(expansion, KLExpansion):
        return kl_eval_basis(expansion, x)
    raise TypeError(f"not a KL expansion: {type(expansion).__name__}")


@dataclass(frozen=True)
class DesignMatrix:
    """The design matrix X_ij = phi_j(x_i) with its cached thin SVD."""

    matrix: np.ndarray
    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray

    def __post_init__(self):
        for name in ("matrix", "u", "singular_values", "vt"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def shape(self):
        return self.matrix.shape


def design_matrix(expansion, dataset: Dataset) -> DesignMatrix:
    """Fill X via the scaled basis and cache its thin SVD."""
    x = np.asarray(dataset.inputs, dtype=float)
    matrix = basis_at(expansion, x)
    u, s, vt = np.linalg.svd(matrix, full_matrices=False)
    return DesignMatrix(matrix=matrix, u=u, singular_values=s, vt=vt)


@dataclass(frozen=True)
class PosteriorSummary:
    """Ridge posterior over expansion coefficients.

    The coefficient covariance sigma^2 V (D^2 + sigma^2 I)^{-1} V^T is kept
    factored (vt, singular_values, noise); beta_mean solves
    (X^T X + sigma^2 I) beta = X^T y.
    """

    beta_mean: np.ndarray
    vt: np.ndarray
    singular_values: np.ndarray
    noise: float
    log_evidence: float

    def __post_init__(self):
        self.beta_mean.setflags(write=False)


def _svd_log_evidence(singular_values, z, residual_sq, n_obs, alpha, sigma):
    """log N(y | 0, alpha X X^T + sigma^2 I) from the SVD pieces.

    z = U^T y and residual_sq = |y|^2 - |z|^2 capture the parts of y inside
    and outside the column span of X.
    """
    from .errors import IllPosedEvidenceError

    if alpha < 0:
        raise ValueError(f"prior variance alpha must be >= 0, got {alpha}")
    if not sigma > 0:
        raise IllPosedEvidenceError(
            f"evidence needs sigma > 0 (got sigma={sigma}, alpha={alpha})"
        )
    k = len(singular_values)
    marginal_var = alpha * singular_values**2 + sigma**2
    logdet = float(np.sum(np.log(marginal_var))) + (n_obs - k) * np.log(sigma**2)
    quad = float(np.sum(z * z / marginal_var)) + residual_sq / sigma**2
    return -0.5 * (logdet + quad + n_obs * np.log(2 * np.pi))


def ridge_fit(design: DesignMatrix, dataset: Dataset) -> PosteriorSummary:
    """Posterior over coefficients for the unit-variance coefficient prior.

    beta_mean = V (D^2 + sigma^2 I)^{-1} D U^T y; always well posed for
    sigma > 0, including rank-deficient designs.
    """
    sigma = dataset.noise
    y = dataset.targets
    s = design.singular_values
    z = design.u.T @ y
    beta = design.vt.T @ (s / (s**2 + sigma**2) * z)
    residual_sq = max(float(y @ y - z @ z), 0.0)
    log_ev = _svd_log_evidence(s, z, residual_sq, dataset.size, 1.0, sigma)
    return PosteriorSummary(beta_mean=beta, vt=design.vt.copy(),
                            singular_values=s.copy(), noise=sigma,
                            log_evidence=log_ev)


class Prediction(NamedTuple):
    mean: np.ndarray
    latent_variance: np.ndarray
    predictive_variance: np.ndarray


def predict(expansion, summary: PosteriorSummary, x) -> Prediction:
    """Posterior mean and variance of the latent function at x.

    mean = phi(x)^T beta_mean; the latent variance applies the factored
    coefficient covariance, and the predictive variance adds the observation
    noise sigma^2.  Scalar x gives scalar outputs.
    """
    phi = basis_at(expansion, x)
    scalar = phi.ndim == 1
    phi = np.atleast_2d(phi)
    mean = phi @ summary.beta_mean
    s = summary.singular_values
    sigma2 = summary.noise**2
    proj = summary.vt @ phi.T  # (k, N)
    inside = sigma2 * np.sum(proj * proj / (s**2 + sigma2)[:, None], axis=0)
    # Directions outside the design row space keep their full prior variance.
    complement = np.maximum(np.sum(phi * phi, axis=1) - np.sum(proj * proj, axis=0), 0.0)
    latent = inside + complement
    predictive = latent + sigma2
    if scalar:
        return Prediction(float(mean[0]), float(latent[0]), float(predictive[0]))
    return Prediction(mean, latent, predictive)
