import numpy as np
import pytest
from numpy.testing import assert_allclose

from klgp.kernels import KernelSpec, as_callback, kernel_eval, kernel_radial


class TestClosedForms:
    def test_se_at_zero_separation(self):
        spec = KernelSpec("squared-exponential", amplitude=2.5, lengthscale=0.2)
        assert kernel_eval(spec, 0.37, 0.37) == pytest.approx(2.5, rel=1e-15)

    def test_se_known_value(self):
        # r^2 / (2 l^2) = 0.16 / 0.08 = 2
        spec = KernelSpec("squared-exponential", lengthscale=0.2)
        assert kernel_eval(spec, 0.0, 0.4) == pytest.approx(np.exp(-2.0), rel=1e-14)

    def test_matern32_known_value(self):
        # closed form at r = l: (1 + sqrt(3)) exp(-sqrt(3)) = 0.48335772...
        spec = KernelSpec("matern", lengthscale=0.2, nu=1.5)
        expected = (1 + np.sqrt(3.0)) * np.exp(-np.sqrt(3.0))
        assert expected == pytest.approx(0.4833577245965077, rel=1e-14)
        assert kernel_eval(spec, 0.1, 0.3) == pytest.approx(expected, rel=1e-14)

    def test_matern12_is_exponential(self):
        spec = KernelSpec("matern", lengthscale=0.37, nu=0.5)
        r = np.linspace(0, 3, 40)
        assert_allclose(kernel_radial(spec, r), np.exp(-r / 0.37), rtol=1e-15)

    def test_matern52_closed_form(self):
        spec = KernelSpec("matern", lengthscale=0.5, nu=2.5)
        r = 0.7
        c = np.sqrt(5) * r / 0.5
        expected = (1 + c + c * c / 3) * np.exp(-c)
        assert kernel_radial(spec, r) == pytest.approx(expected, rel=1e-15)

    def test_brownian(self):
        spec = KernelSpec("brownian", amplitude=2.0)
        assert kernel_eval(spec, 0.3, 0.8) == pytest.approx(0.6)
        assert kernel_eval(spec, 0.8, 0.3) == pytest.approx(0.6)

    def test_two_dimensional_radius(self):
        spec = KernelSpec("squared-exponential", lengthscale=1.0, dim=2)
        p = np.array([0.0, 0.0])
        q = np.array([3.0, 4.0])
        assert kernel_eval(spec, p, q) == pytest.approx(np.exp(-25.0 / 2), rel=1e-14)


class TestProperties:
    @pytest.mark.parametrize("family,nu", [
        ("squared-exponential", None),
        ("matern", 0.5),
        ("matern", 1.5),
        ("matern", 2.5),
    ])
    def test_gram_psd_on_random_points(self, family, nu):
        spec = KernelSpec(family, amplitude=1.3, lengthscale=0.3, nu=nu)
        kernel = as_callback(spec)
        rng = np.random.default_rng(11)
        for _ in range(20):
            pts = rng.uniform(-1, 1, int(rng.integers(2, 9)))
            gram = kernel(pts[:, None], pts[None, :])
            min_eig = np.linalg.eigvalsh(gram).min()
            assert min_eig >= -1e-10 * spec.amplitude, (
                f"{family} nu={nu}: min eigenvalue {min_eig}"
            )

    @pytest.mark.parametrize("family,nu", [
        ("squared-exponential", None),
        ("matern", 0.5),
        ("matern", 1.5),
        ("matern", 2.5),
    ])
    def test_monotone_decreasing_in_r(self, family, nu):
        spec = KernelSpec(family, lengthscale=0.4, nu=nu)
        r = np.linspace(0, 4, 200)
        values = kernel_radial(spec, r)
        assert np.all(np.diff(values) < 0)

    def test_amplitude_linearity(self):
        rng = np.random.default_rng(5)
        r = rng.uniform(0, 2, 30)
        for family, nu in (("squared-exponential", None), ("matern", 1.5)):
            unit = kernel_radial(KernelSpec(family, amplitude=1.0,
                                            lengthscale=0.3, nu=nu), r)
            scaled = kernel_radial(KernelSpec(family, amplitude=1.7,
                                              lengthscale=0.3, nu=nu), r)
            assert_allclose(scaled, 1.7 * unit, rtol=1e-15)

    def test_symmetry(self):
        spec = KernelSpec("matern", lengthscale=0.2, nu=2.5)
        rng = np.random.default_rng(6)
        x, y = rng.uniform(-1, 1, (2, 25))
        assert np.array_equal(kernel_eval(spec, x, y), kernel_eval(spec, y, x))


class TestValidation:
    def test_unsupported_nu(self):
        with pytest.raises(ValueError, match="unsupported Matern smoothness"):
            KernelSpec("matern", nu=1.7)

    def test_matern_requires_nu(self):
        with pytest.raises(ValueError):
            KernelSpec("matern")

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown kernel family"):
            KernelSpec("periodic")

    def test_aliases(self):
        assert KernelSpec("se").family == "squared-exponential"
        assert KernelSpec("rbf").family == "squared-exponential"

    def test_negative_amplitude(self):
        with pytest.raises(ValueError):
            KernelSpec("se", amplitude=-1.0)

    def test_nonpositive_lengthscale(self):
        with pytest.raises(ValueError):
            KernelSpec("se", lengthscale=0.0)

    def test_brownian_is_1d_only(self):
        with pytest.raises(ValueError):
            KernelSpec("brownian", dim=2)

    def test_smoothness_classification(self):
        assert KernelSpec("squared-exponential").smooth
        assert KernelSpec("constant").smooth
        assert not KernelSpec("matern", nu=1.5).smooth
        assert not KernelSpec("brownian").smooth

    def test_dict_round_trip(self):
        spec = KernelSpec("matern", amplitude=0.7, lengthscale=0.11, nu=2.5)
        assert KernelSpec.from_dict(spec.to_dict()) == spec
        plain = KernelSpec("squared-exponential", lengthscale=3.0, dim=2)
        assert KernelSpec.from_dict(plain.to_dict()) == plain
