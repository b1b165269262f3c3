"""Why kernels with a diagonal kink get their own eigensolver.

The plain weighted-Nystrom route converges only algebraically when the
kernel is not smooth at zero separation (Matern, Brownian).  Assembling
the system matrix from per-row integrals split at the diagonal restores
fast convergence: each half-integral sees a smooth integrand.
"""

import numpy as np

from klgp import KernelSpec, as_callback, kl_build_nonsmooth, kl_build_smooth

kernel = as_callback(KernelSpec("matern", lengthscale=0.2, nu=2.5))

reference = kl_build_nonsmooth(kernel, (-1, 1), 160).eigenvalues[19]
print("convergence of lambda_20 for the Matern-5/2 kernel (lengthscale 0.2)")
print(f"reference value (split quadrature, n=160): {reference:.15e}\n")
print(f"{'n':>5s} {'plain Nystrom':>15s} {'split quadrature':>18s}")
for n in (20, 40, 60, 80):
    err_plain = abs(kl_build_smooth(kernel, (-1, 1), n).eigenvalues[19]
                    - reference)
    err_split = abs(kl_build_nonsmooth(kernel, (-1, 1), n).eigenvalues[19]
                    - reference)
    print(f"{n:>5d} {err_plain:>15.2e} {err_split:>18.2e}")

print("""
The split-quadrature route hits machine precision by n = 60 while the
plain route is still at ~1e-7 and shrinking polynomially.
""")

# Brownian motion has closed-form eigenpairs, a stringent oracle.
brownian = as_callback(KernelSpec("brownian"))
expansion = kl_build_nonsmooth(brownian, (0.0, 1.0), 60)
j = np.arange(1, 6)
exact = 4.0 / ((2 * j - 1) ** 2 * np.pi**2)
print("Brownian kernel min(x, x') on [0, 1]: eigenvalues vs 4/((2j-1) pi)^2")
for jj, (got, want) in enumerate(zip(expansion.eigenvalues[:5], exact), 1):
    print(f"  j={jj}: {got:.12f} vs {want:.12f}  (diff {abs(got - want):.1e})")
