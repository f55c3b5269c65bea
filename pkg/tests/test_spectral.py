"""Spectral decomposition, inversion, rotation, and torus separability."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringfisher.errors import (
    MalformedKernelError,
    NotPositiveSemidefiniteError,
    SingularCovarianceError,
    SizeLimitError,
    UnpairedModeError,
)
from ringfisher.spectral import (
    TWO_PI,
    CorrelationKernel,
    TorusCorrelation,
    apply_inverse,
    decompose,
    exponential_kernel,
    gaussian_kernel,
    kernel_from_spectrum,
    materialize_dense,
    mode_coefficients,
    rotate_pattern,
    synthesize,
    torus_inverse_check,
    validate_psd,
)

from conftest import (
    dense_eigenvalues,
    dense_ring_matrix,
    eigenvalue_multiset,
    random_psd_kernel,
    white_kernel,
)


class TestDecompose:
    def test_n4_closed_form(self, n4_decomp):
        by_freq = {m.frequency: m for m in n4_decomp.modes}
        assert by_freq[0].eigenvalue == pytest.approx(2.25, abs=1e-12)
        assert by_freq[1].eigenvalue == pytest.approx(0.75, abs=1e-12)
        assert by_freq[2].eigenvalue == pytest.approx(0.25, abs=1e-12)
        assert not by_freq[0].paired and by_freq[1].paired and not by_freq[2].paired
        # cross-check against the dense symmetric eigensolver oracle
        np.testing.assert_allclose(
            eigenvalue_multiset(n4_decomp), dense_eigenvalues(n4_decomp.kernel), atol=1e-12
        )

    def test_white_noise_flat_spectrum(self):
        decomp = decompose(white_kernel(8, sigma_sq=4.0))
        assert all(m.eigenvalue == pytest.approx(4.0, abs=0) for m in decomp.modes)

    def test_n6_matches_dense_oracle(self, n6_decomp):
        np.testing.assert_allclose(
            eigenvalue_multiset(n6_decomp), dense_eigenvalues(n6_decomp.kernel), atol=1e-10
        )

    def test_modes_sorted_and_complete(self, n6_decomp):
        freqs = [m.frequency for m in n6_decomp.modes]
        assert freqs == sorted(freqs) == [0, 1, 2, 3]
        assert sum(m.multiplicity for m in n6_decomp.modes) == 6

    @pytest.mark.parametrize("values", [(1.0, 0.5), (1.0, 0.5, 0.25, 0.1)])
    def test_wrong_value_count_rejected(self, values):
        with pytest.raises(MalformedKernelError):
            CorrelationKernel(4, values)

    def test_nonpositive_c0_rejected(self):
        with pytest.raises(MalformedKernelError):
            CorrelationKernel(4, (0.0, 0.1, 0.1))

    def test_small_ring_rejected(self):
        with pytest.raises(MalformedKernelError):
            CorrelationKernel(3, (1.0, 0.1))


class TestValidatePsd:
    def test_n4_valid(self, n4_decomp):
        report = validate_psd(n4_decomp)
        assert report.valid and report.strictly_positive
        assert report.min_eigenvalue == pytest.approx(0.25, abs=1e-12)

    def test_identity_kernel(self):
        report = validate_psd(decompose(white_kernel(4)))
        assert report.valid
        assert report.min_eigenvalue == pytest.approx(1.0, abs=0)

    def test_boundary_and_invalid(self):
        ok = validate_psd(decompose(CorrelationKernel(4, (1.0, 0.9, 0.9))))
        assert ok.valid
        assert ok.min_eigenvalue == pytest.approx(0.1, abs=1e-12)
        bad = validate_psd(decompose(CorrelationKernel(4, (1.0, 1.2, 0.0))))
        assert not bad.valid
        assert 2 in bad.negative_frequencies
        assert bad.min_eigenvalue == pytest.approx(1.0 - 2.4, abs=1e-12)


class TestMaterializeDense:
    def test_n4_row(self, n4_kernel):
        np.testing.assert_allclose(materialize_dense(n4_kernel)[0], [1.0, 0.5, 0.25, 0.5])

    def test_identity(self):
        np.testing.assert_allclose(materialize_dense(white_kernel(4)), np.eye(4))

    def test_n6_row(self, n6_kernel):
        np.testing.assert_allclose(
            materialize_dense(n6_kernel)[0], [1.0, 0.4, 0.1, 0.05, 0.1, 0.4]
        )

    def test_matches_definition_oracle(self, n6_kernel):
        np.testing.assert_allclose(materialize_dense(n6_kernel), dense_ring_matrix(n6_kernel))

    def test_size_limit(self, n6_kernel):
        with pytest.raises(SizeLimitError):
            materialize_dense(n6_kernel, size_limit=4)

    def test_default_size_limit(self):
        big = white_kernel(4100)
        with pytest.raises(SizeLimitError):
            materialize_dense(big)


class TestApplyInverse:
    def test_white_noise_scales(self, rng):
        decomp = decompose(white_kernel(8, sigma_sq=2.0))
        v = rng.normal(size=8)
        np.testing.assert_allclose(apply_inverse(decomp, v), v / 2.0, atol=1e-12)

    def test_eigenvector_input(self, n4_decomp):
        w1 = n4_decomp.cos_vector(1)
        np.testing.assert_allclose(apply_inverse(n4_decomp, w1), w1 / 0.75, atol=1e-12)

    def test_matches_dense_solve_oracle(self, n6_decomp, rng):
        v = rng.normal(size=6)
        expected = np.linalg.solve(dense_ring_matrix(n6_decomp.kernel), v)
        np.testing.assert_allclose(apply_inverse(n6_decomp, v), expected, atol=1e-9)

    def test_stacked_input(self, n6_decomp, rng):
        vs = rng.normal(size=(5, 6))
        expected = np.linalg.solve(dense_ring_matrix(n6_decomp.kernel), vs.T).T
        np.testing.assert_allclose(apply_inverse(n6_decomp, vs), expected, atol=1e-9)

    def test_singular_rejected(self):
        decomp = decompose(white_kernel(4, sigma_sq=1e-13))
        with pytest.raises(SingularCovarianceError):
            apply_inverse(decomp, np.ones(4))


class TestRotatePattern:
    def test_thirty_degree_weights(self, n6_decomp):
        rotated = rotate_pattern(n6_decomp, {1: (1.0, 0.0)}, math.radians(30.0))
        a, b = rotated[1]
        assert round(a, 3) == 0.866
        assert round(b, 3) == 0.5

    def test_zero_angle_identity(self, n6_decomp):
        coeffs = {1: (0.3, -1.1), 2: (0.7, 0.2)}
        assert rotate_pattern(n6_decomp, coeffs, 0.0) == coeffs

    def test_half_turn_at_double_frequency(self, n6_decomp):
        rotated = rotate_pattern(n6_decomp, {2: (1.0, 0.0)}, math.pi / 2.0)
        np.testing.assert_allclose(rotated[2], (-1.0, 0.0), atol=1e-12)

    @pytest.mark.parametrize("frequency", [0, 3])
    def test_singletons_rejected(self, n6_decomp, frequency):
        with pytest.raises(UnpairedModeError):
            rotate_pattern(n6_decomp, {frequency: (1.0, 0.0)}, 0.1)

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(
        theta1=st.floats(-10.0, 10.0),
        theta2=st.floats(-10.0, 10.0),
        a=st.floats(-5.0, 5.0),
        b=st.floats(-5.0, 5.0),
    )
    def test_composition_additive_and_norm_preserving(self, theta1, theta2, a, b):
        decomp = decompose(CorrelationKernel(6, (1.0, 0.4, 0.1, 0.05)))
        coeffs = {1: (a, b), 2: (b, -a)}
        once = rotate_pattern(decomp, rotate_pattern(decomp, coeffs, theta1), theta2)
        combined = rotate_pattern(decomp, coeffs, theta1 + theta2)
        for k in coeffs:
            np.testing.assert_allclose(once[k], combined[k], atol=1e-12)
            assert math.hypot(*combined[k]) == pytest.approx(math.hypot(*coeffs[k]), abs=1e-12)

    @pytest.mark.parametrize("n", [5, 8, 12])
    def test_integer_rotation_equals_index_roll(self, n, rng):
        decomp = decompose(random_psd_kernel(rng, n))
        v = rng.normal(size=n)
        coeffs = mode_coefficients(decomp, v)
        for shift in (1, 2, n - 1):
            paired = {k: coeffs[k] for k in decomp.paired_frequencies}
            rotated = rotate_pattern(decomp, paired, TWO_PI * shift / n)
            rotated[0] = coeffs[0]
            if n % 2 == 0:
                nyquist = n // 2
                rotated[nyquist] = (coeffs[nyquist][0] * (-1.0) ** shift, 0.0)
            np.testing.assert_allclose(
                synthesize(decomp, rotated), np.roll(v, shift), atol=1e-12
            )

    def test_coefficient_roundtrip(self, n6_decomp, rng):
        v = rng.normal(size=6)
        np.testing.assert_allclose(
            synthesize(n6_decomp, mode_coefficients(n6_decomp, v)), v, atol=1e-12
        )


class TestTorusInverse:
    def test_n4(self, n4_decomp):
        assert torus_inverse_check(n4_decomp).passed

    def test_white_noise_diagonal(self):
        sigma_sq = 2.0
        decomp = decompose(white_kernel(4, sigma_sq=sigma_sq))
        report = torus_inverse_check(decomp)
        assert report.passed
        np.testing.assert_allclose(
            TorusCorrelation(decomp).inverse_dense(),
            np.eye(16) / sigma_sq**2,
            atol=1e-12,
        )

    def test_n6(self, n6_decomp):
        assert torus_inverse_check(n6_decomp).passed

    def test_scale_guard(self, rng):
        decomp = decompose(random_psd_kernel(rng, 18))
        with pytest.raises(SizeLimitError):
            torus_inverse_check(decomp)

    def test_dense_entries_separable(self, n4_kernel):
        c = materialize_dense(n4_kernel)
        torus = TorusCorrelation(decompose(n4_kernel))
        dense = torus.dense()
        for i, j, k, l in [(0, 1, 2, 3), (1, 1, 1, 1), (3, 0, 2, 1)]:
            assert dense[i * 4 + j, k * 4 + l] == pytest.approx(c[i, k] * c[j, l], abs=1e-15)


class TestSpectralProperties:
    @pytest.mark.parametrize("n", [4, 9, 16, 33, 64])
    def test_eigenvector_residuals(self, n, rng):
        decomp = decompose(random_psd_kernel(rng, n))
        dense = dense_ring_matrix(decomp.kernel)
        for m in decomp.modes:
            w = decomp.cos_vector(m.frequency)
            np.testing.assert_allclose(dense @ w, m.eigenvalue * w, atol=1e-10)
            if m.paired:
                wp = decomp.sin_vector(m.frequency)
                np.testing.assert_allclose(dense @ wp, m.eigenvalue * wp, atol=1e-10)

    @pytest.mark.parametrize("n", [4, 7, 16, 64])
    def test_orthonormal_basis(self, n, rng):
        decomp = decompose(random_psd_kernel(rng, n))
        gram = decomp.basis_matrix.T @ decomp.basis_matrix
        np.testing.assert_allclose(gram, np.eye(n), atol=1e-10)

    @pytest.mark.parametrize("n", [4, 9, 16])
    def test_spectral_reconstruction(self, n, rng):
        decomp = decompose(random_psd_kernel(rng, n))
        basis, lams = decomp.basis_matrix, decomp.column_eigenvalues
        rebuilt = (basis * lams) @ basis.T
        np.testing.assert_allclose(rebuilt, dense_ring_matrix(decomp.kernel), atol=1e-10)

    def test_closed_form_matches_dense_for_random_kernels(self, rng):
        for _ in range(100):
            n = int(rng.integers(4, 65))
            decomp = decompose(random_psd_kernel(rng, n))
            np.testing.assert_allclose(
                eigenvalue_multiset(decomp), dense_eigenvalues(decomp.kernel), atol=1e-9
            )

    def test_spectrum_roundtrip(self, rng):
        for n in (6, 9, 16):
            lams = rng.uniform(0.1, 3.0, size=n // 2 + 1)
            decomp = decompose(kernel_from_spectrum(n, lams))
            np.testing.assert_allclose(decomp.eigenvalues, lams, atol=1e-12)


class TestKernelFamilies:
    def test_exponential_decay_and_psd(self):
        kernel = exponential_kernel(8, c0=1.0, rho=0.5)
        assert kernel.values[2] == pytest.approx(0.25)
        assert validate_psd(decompose(kernel)).valid

    def test_exponential_rejects_bad_rho(self):
        with pytest.raises(MalformedKernelError):
            exponential_kernel(8, rho=1.5)

    def test_gaussian_narrow_is_psd(self):
        assert validate_psd(decompose(gaussian_kernel(8, length=1.0))).valid

    def test_gaussian_wide_rejected(self):
        # wide ring-Gaussian kernels lose positive semidefiniteness
        with pytest.raises(NotPositiveSemidefiniteError):
            gaussian_kernel(8, length=4.0)
