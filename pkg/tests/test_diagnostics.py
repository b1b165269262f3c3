import numpy as np
import pytest

from klgp.diagnostics import (
    choose_order,
    convergence_table,
    discretization_proxy,
    effective_kernel_error,
    truncation_tail,
)
from klgp.kernels import KernelSpec, as_callback
from klgp.kl1d import kl_build_nonsmooth, kl_build_smooth, kl_truncate


class TestEffectiveKernelError:
    def test_constant_kernel_rank_one_is_exact(self, constant_kernel):
        expansion = kl_truncate(kl_build_smooth(constant_kernel, (-1, 1), 8), 1)
        assert effective_kernel_error(constant_kernel, expansion) <= 1e-12

    def test_se_paper_row_n40(self, se_kernel):
        expansion = kl_build_smooth(se_kernel, (-1, 1), 40)
        eps = effective_kernel_error(se_kernel, expansion)
        assert 0.17e-10 / 3 <= eps <= 0.17e-10 * 3

    def test_matern_paper_row_n50(self, matern32_kernel):
        expansion = kl_build_smooth(matern32_kernel, (-1, 1), 50)
        eps = effective_kernel_error(matern32_kernel, expansion)
        assert 0.86e-3 / 3 <= eps <= 0.86e-3 * 3

    def test_non_increasing_in_truncation_order(self, se_kernel):
        expansion = kl_build_smooth(se_kernel, (-1, 1), 30)
        errors = [effective_kernel_error(se_kernel, kl_truncate(expansion, m))
                  for m in (10, 20, 30)]
        assert errors[0] >= errors[1] >= errors[2]

    def test_tail_lower_bounds_measured_error(self, se_kernel):
        # an exact rank-m truncation cannot beat the tail; discretization
        # can only push the measured error up to delta_max * m above it
        n, m = 25, 20
        expansion = kl_truncate(kl_build_smooth(se_kernel, (-1, 1), n), m)
        eps = effective_kernel_error(se_kernel, expansion)
        report = discretization_proxy(se_kernel, (-1, 1), n, m)
        assert eps >= report.tail - report.delta_max * m


class TestDiscretizationProxy:
    def test_constant_kernel(self, constant_kernel):
        report = discretization_proxy(constant_kernel, (-1, 1), 8, 1)
        assert report.delta_max <= 1e-13
        assert report.tail <= 1e-13

    def test_proxy_tracks_measured_error(self, se_kernel):
        # the proxy underestimates the measured L2 error here by ~12x
        # (it ignores eigenfunction discretization error), so the
        # cross-validation window is a factor of 20
        report = discretization_proxy(se_kernel, (-1, 1), 25, 25)
        expansion = kl_build_smooth(se_kernel, (-1, 1), 25)
        eps = effective_kernel_error(se_kernel, expansion)
        assert report.proxy_total / 20 <= eps <= report.proxy_total * 20

    def test_monotone_in_n_for_matern12(self):
        kernel = as_callback(KernelSpec("matern", lengthscale=0.2, nu=0.5))
        proxies = [discretization_proxy(kernel, (-1, 1), n, 20).proxy_total
                   for n in (20, 40, 80)]
        assert proxies[0] > proxies[1] > proxies[2]

    def test_m_bounds(self, se_kernel):
        with pytest.raises(ValueError):
            discretization_proxy(se_kernel, (-1, 1), 10, 11)


class TestChooseOrder:
    def test_constant_kernel_minimal(self, constant_kernel):
        selection = choose_order(constant_kernel, (-1, 1), 1e-6, "smooth")
        assert selection.n == 16
        assert selection.m == 1
        assert selection.converged

    def test_se_target_1e4(self, se_kernel):
        # doubling from 16 lands on 32 for the 1e-4 target (n = 16 gives a
        # proxy around 1e-3); the discretization proxy is met there
        selection = choose_order(se_kernel, (-1, 1), 1e-4, "smooth")
        assert selection.converged
        assert selection.n == 32
        assert selection.report.proxy_total <= 1e-4

    def test_matern_target_1e3_meets_measured_error(self, matern32_kernel):
        selection = choose_order(matern32_kernel, (-1, 1), 1e-3, "nonsmooth")
        assert selection.converged
        assert selection.report.proxy_total <= 1e-3
        expansion = kl_truncate(
            kl_build_nonsmooth(matern32_kernel, (-1, 1), selection.n),
            selection.m)
        eps = effective_kernel_error(matern32_kernel, expansion)
        assert eps <= 3e-3

    def test_cap_reached_reports_best_effort(self):
        kernel = as_callback(KernelSpec("matern", lengthscale=0.02, nu=0.5))
        selection = choose_order(kernel, (-1, 1), 2e-14, "nonsmooth",
                                 start=16, cap=32)
        assert not selection.converged
        assert selection.report.proxy_total > 2e-14

    def test_target_validation(self, se_kernel):
        with pytest.raises(ValueError):
            choose_order(se_kernel, (-1, 1), 1e-15, "smooth")
        with pytest.raises(ValueError):
            choose_order(se_kernel, (-1, 1), 1e-4, "analytic")


class TestTruncationTail:
    def test_matches_manual_sum(self):
        lam = np.array([4.0, 2.0, 1.0, 0.5])
        assert truncation_tail(lam, 2) == pytest.approx(np.sqrt(1.25))
        assert truncation_tail(lam, 4) == 0.0

    def test_bounds(self):
        with pytest.raises(ValueError):
            truncation_tail(np.ones(3), 4)


def test_convergence_table_rows(se_kernel):
    rows = convergence_table(se_kernel, (-1, 1), [10, 20], compute_l2=True)
    assert [r["n"] for r in rows] == [10, 20]
    assert rows[0]["epsilon"] > rows[1]["epsilon"]
    assert all(r["seconds"] >= 0 for r in rows)
    no_l2 = convergence_table(se_kernel, (-1, 1), [10], compute_l2=False)
    assert no_l2[0]["epsilon"] is None
