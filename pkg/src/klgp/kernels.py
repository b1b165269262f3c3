"""Covariance kernel families and their classification.

Two stationary families cover the experiments: the squared exponential and
the half-integer Matern kernels (nu in {1/2, 3/2, 5/2}, closed forms, no
Bessel functions).  A Brownian-motion kernel (min(x, x')) and a constant
kernel are included as analytically tractable extras; both are handy as
oracles and in configs.

The eigensolvers never see a KernelSpec: they consume plain symmetric
callbacks (see :func:`as_callback`), so non-stationary user kernels plug in
the same way.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = ["KernelSpec", "kernel_eval", "kernel_radial", "as_callback"]

SUPPORTED_NU = (0.5, 1.5, 2.5)
_FAMILIES = ("squared-exponential", "matern", "brownian", "constant")

_ALIASES = {
    "se": "squared-exponential",
    "rbf": "squared-exponential",
    "squared_exponential": "squared-exponential",
    "gaussian": "squared-exponential",
}


@dataclass(frozen=True)
class KernelSpec:
    """A covariance kernel family with hyperparameters.

    Parameters
    ----------
    family : str
        One of 'squared-exponential', 'matern', 'brownian', 'constant'
        (aliases 'se'/'rbf' are accepted).
    amplitude : float
        Kernel value at zero separation (variance scale), >= 0.
    lengthscale : float
        Correlation length, > 0.  Unused by 'brownian' and 'constant'.
    nu : float, optional
        Matern smoothness, one of {0.5, 1.5, 2.5}.  Required for 'matern'.
    dim : int
        Input dimension, 1 or 2.
    """

    family: str
    amplitude: float = 1.0
    lengthscale: float = 1.0
    nu: float | None = None
    dim: int = 1

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        object.__setattr__(self, "family", family)
        if family not in _FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; "
                             f"expected one of {_FAMILIES}")
        if not self.amplitude >= 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if not self.lengthscale > 0:
            raise ValueError(f"lengthscale must be > 0, got {self.lengthscale}")
        if family == "matern":
            if self.nu not in SUPPORTED_NU:
                raise ValueError(
                    f"unsupported Matern smoothness nu={self.nu}; only the "
                    f"half-integer closed forms {SUPPORTED_NU} are implemented"
                )
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if family == "brownian" and self.dim != 1:
            raise ValueError("the Brownian kernel is one-dimensional")

    @property
    def smooth(self) -> bool:
        """True if the kernel is smooth on the diagonal.

        Smooth kernels go to the plain Nystrom eigensolver; kernels with a
        diagonal kink (Matern, Brownian) get the split-quadrature solver.
        """
        return self.family in ("squared-exponential", "constant")

    def with_lengthscale(self, lengthscale: float) -> "KernelSpec":
        return replace(self, lengthscale=lengthscale)

    def to_dict(self) -> dict:
        out = {
            "family": self.family,
            "amplitude": self.amplitude,
            "lengthscale": self.lengthscale,
            "dimension": self.dim,
        }
        if self.family == "matern":
            out["nu"] = self.nu
        return out

    @classmethod
    def from_dict(cls, record: dict) -> "KernelSpec":
        return cls(
            family=record["family"],
            amplitude=float(record.get("amplitude", 1.0)),
            lengthscale=float(record.get("lengthscale", 1.0)),
            nu=float(record["nu"]) if record.get("nu") is not None else None,
            dim=int(record.get("dimension", 1)),
        )


def kernel_radial(spec: KernelSpec, r):
    """Evaluate a stationary family at separation r >= 0.

    Not defined for the (non-stationary) Brownian kernel.
    """
    r = np.asarray(r, dtype=float)
    alpha = spec.amplitude
    ell = spec.lengthscale
    if spec.family == "squared-exponential":
        return alpha * np.exp(-(r * r) / (2 * ell * ell))
    if spec.family == "constant":
        return alpha * np.ones_like(r)
    if spec.family == "matern":
        if spec.nu == 0.5:
            return alpha * np.exp(-r / ell)
        if spec.nu == 1.5:
            c = np.sqrt(3.0) * r / ell
            return alpha * (1 + c) * np.exp(-c)
        c = np.sqrt(5.0) * r / ell
        return alpha * (1 + c + c * c / 3.0) * np.exp(-c)
    raise ValueError(f"{spec.family!r} has no radial form")


def kernel_eval(spec: KernelSpec, x, y):
    """Evaluate k(x, y).

    For dim 1, x and y are floats or broadcastable arrays of floats.  For
    dim 2, they are arrays whose last axis has length 2, broadcast on the
    leading axes.
    """
    if spec.family == "brownian":
        return spec.amplitude * np.minimum(np.asarray(x, dtype=float),
                                           np.asarray(y, dtype=float))
    if spec.dim == 1:
        r = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    else:
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        r = np.sqrt(np.sum(d * d, axis=-1))
    return kernel_radial(spec, r)


def as_callback(spec: KernelSpec):
    """The symmetric kernel callback consumed by the eigensolvers."""
    def kernel(x, y):
        return kernel_eval(spec, x, y)
    return kernel
