"""klgp: reduced-rank Gaussian processes via quadrature eigensolvers.

Build the eigenfunction expansion of a GP prior on an interval or rectangle
once, then do regression, prediction, sampling, and Bayesian hyperparameter
inference in the low-dimensional coefficient space.
"""

from .bayes import BayesGrid, BayesPosterior, PriorSpec, bayes_fit, log_evidence
from .diagnostics import (
    ErrorReport,
    OrderSelection,
    choose_order,
    convergence_table,
    discretization_proxy,
    effective_kernel_error,
    truncation_tail,
)
from .errors import (
    DomainError,
    IllPosedEvidenceError,
    NotPositiveSemiDefiniteError,
    NumericalError,
    QuadratureError,
    ResourceLimitError,
)
from .kernels import KernelSpec, as_callback, kernel_eval, kernel_radial
from .kl1d import (
    KLExpansion,
    kl_build_nonsmooth,
    kl_build_smooth,
    kl_eval_basis,
    kl_sample,
    kl_truncate,
)
from .kl2d import KLExpansion2D, kl2d_eval_basis, kl2d_truncate, kl_build_2d
from .quadrature import (
    GaussRule,
    LegendreSeries,
    ValsToCoefsMap,
    adaptive_integrate,
    gauss_rule,
    legendre_eval,
    legendre_table,
    vals_to_coefs,
    vals_to_coefs_map,
)
from .regression import (
    Dataset,
    DesignMatrix,
    PosteriorSummary,
    Prediction,
    design_matrix,
    predict,
    ridge_fit,
)
from .storage import load_expansion, save_expansion

__version__ = "0.1.0"
