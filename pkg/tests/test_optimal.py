"""Allocation search: closed forms, vertex-edge enumeration, audit oracle."""

import numpy as np
import pytest

from ringfisher.optimal import (
    audit_random_allocations,
    check_condition,
    maximize_fisher_1d,
    maximize_fisher_2d,
)
from ringfisher.spectral import decompose, exponential_kernel, kernel_from_spectrum

from conftest import dense_ring_matrix, random_psd_kernel, white_kernel


class TestMaximize1D:
    def test_n4_concentration(self, n4_decomp):
        result = maximize_fisher_1d(n4_decomp, 1.0, audit_trials=10_000, seed=5)
        assert result.achieved_fi == pytest.approx(4.0 / 3.0, rel=1e-12)
        assert result.method == "closed_form"
        assert result.allocation.entries[0].frequency == 1
        assert result.audit_margin <= 1e-12

    def test_white_noise_flat_objective(self):
        decomp = decompose(white_kernel(8, sigma_sq=2.0))
        result = maximize_fisher_1d(decomp, 1.0, audit_trials=2000, seed=1)
        assert result.achieved_fi == pytest.approx(0.5, rel=1e-12)
        assert abs(result.audit_margin) < 1e-12

    def test_exponential_kernel_argmin(self):
        kernel = exponential_kernel(8, rho=0.5)
        decomp = decompose(kernel)
        dense = dense_ring_matrix(kernel)
        quotients = {
            k: decomp.cos_vector(k) @ dense @ decomp.cos_vector(k)
            for k in decomp.paired_frequencies
        }
        expected = min(quotients, key=quotients.get)
        result = maximize_fisher_1d(decomp, 1.0)
        assert result.allocation.entries[0].frequency == expected
        assert result.audit_margin is None


class TestMaximize2D:
    def test_n4_single_paired_mode(self, n4_decomp):
        result = maximize_fisher_2d(n4_decomp, 1.0, audit_trials=2000, seed=9)
        assert result.achieved_fi == pytest.approx(16.0 / 9.0, rel=1e-12)
        assert result.method == "closed_form"
        assert result.audit_margin <= 1e-9

    def test_white_noise_concentrates_at_lowest_frequency(self):
        sigma_sq = 2.0
        decomp = decompose(white_kernel(8, sigma_sq=sigma_sq))
        result = maximize_fisher_2d(decomp, 1.0, audit_trials=5000, seed=2)
        (entry,) = result.allocation.entries
        assert entry.frequency == 1
        assert result.achieved_fi == pytest.approx((1.0 / sigma_sq) ** 2, rel=1e-12)
        assert result.audit_margin <= 1e-9

    def test_disagreeing_orderings_split_power(self):
        # eigenvalues 1.0 (k=1) and 0.5 (k=2): the 50/50 split beats both vertices
        decomp = decompose(kernel_from_spectrum(6, [1.2, 1.0, 0.5, 0.8]))
        result = maximize_fisher_2d(decomp, 1.0, audit_trials=100_000, seed=13)
        assert result.method == "vertex_edge"
        assert result.achieved_fi == pytest.approx(1.125, rel=1e-9)
        weights = {e.frequency: e.amplitude**2 for e in result.allocation.entries}
        assert weights[1] == pytest.approx(0.5, rel=1e-9)
        assert weights[2] == pytest.approx(0.5, rel=1e-9)
        # beats both single-frequency vertices and every audited point
        assert result.achieved_fi > 1.0
        assert result.audit_margin <= 1e-9

    def test_power_scaling(self, n6_decomp):
        base = maximize_fisher_2d(n6_decomp, 1.0)
        scaled = maximize_fisher_2d(n6_decomp, 3.0)
        assert scaled.achieved_fi == pytest.approx(9.0 * base.achieved_fi, rel=1e-9)
        base_1d = maximize_fisher_1d(n6_decomp, 1.0)
        scaled_1d = maximize_fisher_1d(n6_decomp, 3.0)
        assert scaled_1d.achieved_fi == pytest.approx(3.0 * base_1d.achieved_fi, rel=1e-12)
        for b, s in zip(base.allocation.entries, scaled.allocation.entries):
            assert s.amplitude**2 / 3.0 == pytest.approx(b.amplitude**2, rel=1e-9)


class TestCheckCondition:
    def test_exponential_kernel_report(self):
        decomp = decompose(exponential_kernel(16, rho=0.9))
        report = check_condition(decomp)
        freqs = decomp.paired_frequencies
        lams = [decomp.mode(k).eigenvalue for k in freqs]
        weighted = [k * k * l for k, l in zip(freqs, lams)]
        assert report.argmin_lambda == freqs[int(np.argmin(lams))]
        assert report.argmin_k2lambda == freqs[int(np.argmin(weighted))]
        assert report.concentration_valid == (report.argmin_lambda == report.argmin_k2lambda)

    def test_white_noise_ties(self):
        report = check_condition(decompose(white_kernel(8)))
        assert not report.lambda_order_ok
        assert report.argmin_lambda == 1
        assert report.argmin_k2lambda == 1
        assert report.concentration_valid

    def test_single_paired_mode_trivially_valid(self):
        report = check_condition(decompose(decompose_kernel_n4()))
        assert report.lambda_order_ok and report.k2lambda_order_ok
        assert report.concentration_valid


def decompose_kernel_n4():
    from ringfisher.spectral import CorrelationKernel

    return CorrelationKernel(4, (1.0, 0.45, 0.05))


class TestAudit:
    def test_n4_bounded_by_closed_form(self, n4_decomp):
        report = audit_random_allocations(n4_decomp, 1.0, "fi1d", 10_000, seed=31)
        assert report.max_objective <= 4.0 / 3.0 + 1e-12

    def test_white_noise_constant_objective(self):
        decomp = decompose(white_kernel(8, sigma_sq=2.0))
        report = audit_random_allocations(decomp, 1.0, "fi1d", 500, seed=8)
        assert report.max_objective == pytest.approx(0.5, abs=1e-12)

    def test_seed_determinism(self, n6_decomp):
        first = audit_random_allocations(n6_decomp, 1.0, "fi2d_x", 1000, seed=77)
        second = audit_random_allocations(n6_decomp, 1.0, "fi2d_x", 1000, seed=77)
        assert first == second

    def test_rejects_zero_trials(self, n6_decomp):
        with pytest.raises(ValueError):
            audit_random_allocations(n6_decomp, 1.0, "fi1d", 0, seed=0)


class TestOptimalityProperties:
    def test_1d_concentration_dominates_audits(self, rng):
        for _ in range(100):
            n = int(rng.integers(4, 65))
            decomp = decompose(random_psd_kernel(rng, n, lam_lo=0.05))
            seed = int(rng.integers(0, 2**31))
            result = maximize_fisher_1d(decomp, 1.0, audit_trials=2000, seed=seed)
            assert result.audit_margin <= 1e-9

    def test_2d_concentration_when_orderings_agree(self, rng):
        checked = 0
        while checked < 10:
            n = int(rng.integers(6, 33))
            decomp = decompose(random_psd_kernel(rng, n, lam_lo=0.05))
            condition = check_condition(decomp)
            if not condition.concentration_valid:
                continue
            checked += 1
            result = maximize_fisher_2d(decomp, 1.0, audit_trials=2000, seed=checked)
            (entry,) = result.allocation.entries
            k = entry.frequency
            lam = decomp.mode(k).eigenvalue
            assert k == condition.argmin_lambda
            assert result.achieved_fi == pytest.approx((1.0 / (k * lam)) ** 2, rel=1e-9)
            assert result.audit_margin <= 1e-9

    def test_2d_search_dominates_audits_even_when_orderings_disagree(self, rng):
        found = 0
        while found < 5:
            n = int(rng.integers(6, 33))
            decomp = decompose(random_psd_kernel(rng, n, lam_lo=0.05))
            if check_condition(decomp).concentration_valid:
                continue
            found += 1
            result = maximize_fisher_2d(decomp, 1.0, audit_trials=20_000, seed=found)
            assert result.audit_margin <= 1e-9
