"""Legendre polynomials, Gauss-Legendre rules, and panel-based adaptive integration.

Everything downstream (eigensolvers, regression, error diagnostics) is built on
the pieces in this module: the three-term Legendre recursion, Gauss-Legendre
nodes and weights, the values-to-coefficients transform at Gauss nodes, and a
recursive-bisection integrator for non-polynomial integrands.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalError, QuadratureError

__all__ = [
    "GaussRule",
    "LegendreSeries",
    "ValsToCoefsMap",
    "legendre_eval",
    "legendre_table",
    "normalized_legendre_table",
    "gauss_rule",
    "vals_to_coefs_map",
    "vals_to_coefs",
    "adaptive_integrate",
]


def legendre_eval(degree: int, t):
    """Evaluate the Legendre polynomial P_degree at t by forward recursion.

    Parameters
    ----------
    degree : int
        Polynomial degree, >= 0.
    t : float or ndarray
        Evaluation points, nominally in [-1, 1].

    Returns
    -------
    float or ndarray
        P_degree(t).
    """
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    t = np.asarray(t, dtype=float)
    p_prev = np.ones_like(t)
    if degree == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = t.copy()
    for i in range(1, degree):
        p_prev, p = p, ((2 * i + 1) * t * p - i * p_prev) / (i + 1)
    return p if p.ndim else float(p)


def legendre_table(count: int, t):
    """Table of P_0 .. P_{count-1} at the points t.

    Returns an array of shape (count, len(t)); row j holds P_j.  The dtype of
    t is preserved, so extended-precision tables can be produced by passing a
    longdouble argument.
    """
    t = np.atleast_1d(np.asarray(t))
    table = np.empty((count, t.size), dtype=t.dtype)
    table[0] = 1.0
    if count > 1:
        table[1] = t
    for i in range(1, count - 1):
        table[i + 1] = ((2 * i + 1) * t * table[i] - i * table[i - 1]) / (i + 1)
    return table


def normalized_legendre_table(count: int, t):
    """Table of the unit-norm polynomials sqrt((2j+1)/2) * P_j, j < count."""
    table = legendre_table(count, t)
    scale = np.sqrt((2 * np.arange(count, dtype=table.dtype) + 1) / 2)
    return table * scale[:, None]


def _legendre_with_derivative(n, x):
    # Returns (P_n(x), P_n'(x)) using the recursion and the derivative identity
    # (1 - x^2) P_n'(x) = n (P_{n-1}(x) - x P_n(x)).  Valid for |x| < 1.
    p_prev = np.ones_like(x)
    p = x.copy()
    for i in range(1, n):
        p_prev, p = p, ((2 * i + 1) * x * p - i * p_prev) / (i + 1)
    dp = n * (p_prev - x * p) / (1 - x * x)
    return p, dp


@dataclass(frozen=True)
class GaussRule:
    """An order-n Gauss-Legendre rule on [-1, 1].

    nodes are the roots of P_n in increasing order; weights are positive and
    sum to 2.  Nodes and weights are exactly symmetric about 0 by
    construction.  Instances are immutable (arrays are read-only views).
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def mapped(self, a: float, b: float):
        """Nodes and weights affinely mapped to [a, b] (weights pick up (b-a)/2)."""
        if not b > a:
            raise ValueError(f"need a < b, got [{a}, {b}]")
        half = 0.5 * (b - a)
        return (a + b) / 2 + half * self.nodes, half * self.weights


@lru_cache(maxsize=None)
def gauss_rule(n: int) -> GaussRule:
    """Order-n Gauss-Legendre nodes and weights.

    Newton iteration on P_n from Chebyshev-angle starting guesses, carried out
    in extended precision so the returned double-precision rule is correctly
    rounded.  Weights come from w_i = 2 / ((1 - x_i^2) P_n'(x_i)^2).  Only the
    positive half is solved; the rule is mirrored so the symmetry
    x_i = -x_{n+1-i}, w_i = w_{n+1-i} holds bit for bit.
    """
    if n < 1:
        raise ValueError(f"rule order must be >= 1, got {n}")
    if n == 1:
        nodes = np.zeros(1)
        weights = np.full(1, 2.0)
    else:
        ld = np.longdouble
        half_count = n // 2
        k = np.arange(1, half_count + 1)
        theta = np.pi * (4 * k - 1) / (4.0 * n + 2)
        x = (np.cos(theta) * (1 - (n - 1) / (8.0 * n**3))).astype(ld)
        converged = False
        for _ in range(100):
            p, dp = _legendre_with_derivative(n, x)
            dx = p / dp
            x = x - dx
            if np.max(np.abs(dx)) <= 4 * np.finfo(ld).eps:
                converged = True
                break
        if not converged:
            raise NumericalError(
                f"Gauss-Legendre root finding did not converge for order {n}"
            )
        p, dp = _legendre_with_derivative(n, x)
        w = 2 / ((1 - x * x) * dp * dp)
        x64 = np.asarray(x, dtype=float)
        w64 = np.asarray(w, dtype=float)
        if n % 2:
            _, dp0 = _legendre_with_derivative(n, np.zeros(1, dtype=ld))
            w0 = float(2 / (dp0[0] * dp0[0]))
            nodes = np.concatenate([-x64, [0.0], x64[::-1]])
            weights = np.concatenate([w64, [w0], w64[::-1]])
        else:
            nodes = np.concatenate([-x64, x64[::-1]])
            weights = np.concatenate([w64, w64[::-1]])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return GaussRule(order=n, nodes=nodes, weights=weights)


@dataclass(frozen=True)
class LegendreSeries:
    """A finite Legendre expansion on an interval [a, b].

    Evaluation maps x through t = (2x - a - b)/(b - a) before the recursion.
    ``normalized`` selects between the ordinary basis P_j and the unit-norm
    basis sqrt((2j+1)/2) P_j.
    """

    coefficients: np.ndarray
    domain: tuple[float, float] = (-1.0, 1.0)
    normalized: bool = False

    def __post_init__(self):
        a, b = self.domain
        if not b > a:
            raise ValueError(f"invalid domain [{a}, {b}]")
        coefs = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", coefs)

    def __len__(self):
        return len(self.coefficients)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.domain
        t = (2 * x - a - b) / (b - a)
        table = legendre_table(len(self.coefficients), t.ravel())
        coefs = self.coefficients
        if self.normalized:
            coefs = coefs * np.sqrt((2 * np.arange(len(coefs)) + 1) / 2)
        values = coefs @ table
        return values.reshape(x.shape) if x.ndim else float(values[0])

    def to_ordinary(self) -> "LegendreSeries":
        if not self.normalized:
            return self
        scale = np.sqrt((2 * np.arange(len(self.coefficients)) + 1) / 2)
        return LegendreSeries(self.coefficients * scale, self.domain, normalized=False)

    def to_normalized(self) -> "LegendreSeries":
        if self.normalized:
            return self
        scale = np.sqrt((2 * np.arange(len(self.coefficients)) + 1) / 2)
        return LegendreSeries(self.coefficients / scale, self.domain, normalized=True)


@dataclass(frozen=True)
class ValsToCoefsMap:
    """Dense map from values at order-n Gauss nodes to Legendre coefficients.

    Row j of ``matrix`` is the degree-j coefficient functional
    c_j = (2j+1)/2 * sum_i w_i P_j(x_i) f(x_i), which is exact for
    polynomials of degree <= n-1 by quadrature exactness.
    """

    order: int
    matrix: np.ndarray


@lru_cache(maxsize=None)
def vals_to_coefs_map(n: int) -> ValsToCoefsMap:
    """The order-n values-to-coefficients matrix (cached)."""
    rule = gauss_rule(n)
    table = legendre_table(n, rule.nodes)
    j = np.arange(n)
    matrix = (2 * j[:, None] + 1) / 2.0 * (table * rule.weights[None, :])
    matrix.setflags(write=False)
    return ValsToCoefsMap(order=n, matrix=matrix)


def vals_to_coefs(rule: GaussRule, values, domain=(-1.0, 1.0)) -> LegendreSeries:
    """Interpolate values tabulated at the rule's nodes by a Legendre expansion.

    Returns the ordinary-basis series of length n whose evaluation at the
    (mapped) nodes reproduces ``values``.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (rule.order,):
        raise ValueError(
            f"expected {rule.order} values for an order-{rule.order} rule, "
            f"got shape {values.shape}"
        )
    coefs = vals_to_coefs_map(rule.order).matrix @ values
    return LegendreSeries(coefs, domain=domain)


def _eval_panel(f, x):
    try:
        values = np.asarray(f(x), dtype=float)
        if values.shape == x.shape:
            return values
    except Exception:
        pass
    # scalar-only integrand; fall back to a loop
    return np.array([float(f(xi)) for xi in x])


def adaptive_integrate(
    f,
    a: float,
    b: float,
    tol: float,
    panel_order: int = 16,
    max_depth: int = 40,
    noise_floor: float = 0.0,
) -> float:
    """Integrate f over [a, b] by recursive panel bisection.

    A fixed-order Gauss rule is applied to each panel; a panel is accepted
    when the sum of its two half-panel estimates agrees with the whole-panel
    estimate within the panel's share of ``tol`` (halved at each split).
    ``f`` may be vectorized over an ndarray argument; scalar-only callables
    are handled at reduced speed.

    ``noise_floor`` is a per-unit-length disagreement level below which
    refinement is pointless (evaluation noise of f); panels are also
    accepted at that resolution.  It contributes at most
    noise_floor * (b - a) to the result and is 0 by default.

    Raises
    ------
    QuadratureError
        If any panel would need to split beyond ``max_depth`` levels.  The
        exception carries the partial estimate accumulated so far.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if not b > a:
        if b == a:
            return 0.0
        raise ValueError(f"need a <= b, got [{a}, {b}]")
    rule = gauss_rule(panel_order)

    def panel_estimate(lo, hi):
        half = 0.5 * (hi - lo)
        x = (lo + hi) / 2 + half * rule.nodes
        return half * float(rule.weights @ _eval_panel(f, x))

    total = 0.0
    # stack entries: (lo, hi, whole-panel estimate, local tolerance, depth)
    stack = [(a, b, panel_estimate(a, b), tol, 0)]
    while stack:
        lo, hi, whole, local_tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = panel_estimate(lo, mid)
        right = panel_estimate(mid, hi)
        refined = left + right
        accept = max(local_tol, noise_floor * (hi - lo))
        if abs(refined - whole) <= accept or mid in (lo, hi):
            total += refined
            continue
        if depth >= max_depth:
            partial = total + refined + sum(entry[2] for entry in stack)
            raise QuadratureError(
                f"panel [{lo}, {hi}] did not converge within depth {max_depth}",
                partial,
            )
        stack.append((lo, mid, left, local_tol / 2, depth + 1))
        stack.append((mid, hi, right, local_tol / 2, depth + 1))
    return total
