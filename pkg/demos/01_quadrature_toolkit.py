"""Gauss-Legendre rules, Legendre transforms, adaptive integration.

Everything else in the library is built out of these three pieces, so this
is the place to start.
"""

import numpy as np

from klgp import adaptive_integrate, gauss_rule, legendre_eval, vals_to_coefs

# ---------------------------------------------------------------------------
# An order-n rule integrates polynomials of degree <= 2n - 1 exactly.
rule = gauss_rule(6)
print("order-6 rule")
print("  nodes  :", np.round(rule.nodes, 6))
print("  weights:", np.round(rule.weights, 6))
print("  sum of weights (= length of [-1,1]):", rule.weights.sum())
print("  integral of x^10 :", rule.weights @ rule.nodes**10,
      " exact:", 2 / 11)
print("  integral of x^12 :", rule.weights @ rule.nodes**12,
      " exact:", 2 / 13, " (degree 12 > 11, no longer exact)")

# Rules map affinely to any interval; weights pick up the Jacobian.
nodes, weights = gauss_rule(20).mapped(0.0, np.pi)
print("\nintegral of sin on [0, pi]:", weights @ np.sin(nodes), " exact: 2")

# ---------------------------------------------------------------------------
# Tabulate a function at the nodes and read off its Legendre coefficients.
rule = gauss_rule(16)
series = vals_to_coefs(rule, np.exp(rule.nodes))
print("\nLegendre coefficients of exp(x), degrees 0..5:")
print(" ", np.round(series.coefficients[:6], 10))
x = np.linspace(-1, 1, 7)
print("  max interpolation error on a fine grid:",
      np.max(np.abs(series(x) - np.exp(x))))

# The degree-j basis polynomial comes back as a one-hot coefficient vector.
one_hot = vals_to_coefs(rule, legendre_eval(4, rule.nodes))
print("  coefficients recovered for P_4:", np.round(one_hot.coefficients[:6], 12))

# ---------------------------------------------------------------------------
# Adaptive bisection handles kinks that a single panel cannot.
value = adaptive_integrate(np.abs, -1.0, 1.0, 1e-12)
print("\nadaptive integral of |x| on [-1,1]:", value, " exact: 1")
value = adaptive_integrate(lambda x: np.exp(-np.abs(x) / 0.05), -1, 1, 1e-12)
print("adaptive integral of exp(-|x|/0.05):", value,
      " exact:", 2 * 0.05 * (1 - np.exp(-20)))
