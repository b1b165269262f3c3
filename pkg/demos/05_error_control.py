"""Choosing discretization and truncation orders with error diagnostics.

Two cheap quantities steer the choice without any 2d-dimensional
integral: the eigenvalue shift between an n-node and a 2n-node build
(discretization proxy) and the spectrum tail (truncation error).  The
measured L2 kernel error is available as a cross-check.
"""

from klgp import (
    KernelSpec,
    as_callback,
    choose_order,
    convergence_table,
    discretization_proxy,
    effective_kernel_error,
    kl_build_smooth,
    kl_truncate,
)

kernel = as_callback(KernelSpec("squared-exponential", lengthscale=0.2))

print("convergence sweep, squared exponential (lengthscale 0.2):")
print(f"{'n':>4s} {'delta_max':>11s} {'tail':>11s} {'measured L2':>13s}")
for row in convergence_table(kernel, (-1, 1), [10, 20, 30, 40]):
    print(f"{row['n']:>4d} {row['delta_max']:>11.2e} {row['tail']:>11.2e} "
          f"{row['epsilon']:>13.2e}")

selection = choose_order(kernel, (-1, 1), 1e-4, "smooth")
print(f"\nchoose_order(target 1e-4) -> n = {selection.n}, m = {selection.m}, "
      f"proxy {selection.report.proxy_total:.2e}")
expansion = kl_truncate(kl_build_smooth(kernel, (-1, 1), selection.n),
                        selection.m)
print("measured L2 error at that (n, m):",
      f"{effective_kernel_error(kernel, expansion):.2e}")

matern = as_callback(KernelSpec("matern", lengthscale=0.2, nu=1.5))
report = discretization_proxy(matern, (-1, 1), 40, 40)
print(f"\nMatern-3/2 at n = 40: delta_max {report.delta_max:.2e}, "
      f"tail {report.tail:.2e}")
print("the tail dominates: truncation error, not discretization, limits")
print("accuracy for kernels with little smoothness")
