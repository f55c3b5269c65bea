"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from ringfisher.spectral import (
    CorrelationKernel,
    SpectralDecomposition,
    decompose,
    kernel_from_spectrum,
)


def dense_ring_matrix(kernel: CorrelationKernel) -> np.ndarray:
    """Independent oracle: materialize the matrix straight from the definition."""
    n = kernel.n
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            d = abs(i - j)
            out[i, j] = kernel.values[min(d, n - d)]
    return out


def dense_eigenvalues(kernel: CorrelationKernel) -> np.ndarray:
    """Independent oracle: sorted eigenvalues from a dense symmetric solver."""
    return np.linalg.eigvalsh(dense_ring_matrix(kernel))


def eigenvalue_multiset(decomp: SpectralDecomposition) -> np.ndarray:
    """Closed-form eigenvalues repeated by multiplicity, sorted ascending."""
    values = []
    for m in decomp.modes:
        values.extend([m.eigenvalue] * m.multiplicity)
    return np.sort(values)


def random_psd_kernel(
    rng: np.random.Generator, n: int, lam_lo: float = 0.05, lam_hi: float = 2.0
) -> CorrelationKernel:
    """Random strictly positive kernel built from a prescribed spectrum."""
    lams = rng.uniform(lam_lo, lam_hi, size=n // 2 + 1)
    return kernel_from_spectrum(n, lams)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20250809)


@pytest.fixture
def n4_kernel() -> CorrelationKernel:
    return CorrelationKernel(4, (1.0, 0.5, 0.25))


@pytest.fixture
def n4_decomp(n4_kernel):
    return decompose(n4_kernel)


@pytest.fixture
def n6_kernel() -> CorrelationKernel:
    return CorrelationKernel(6, (1.0, 0.4, 0.1, 0.05))


@pytest.fixture
def n6_decomp(n6_kernel):
    return decompose(n6_kernel)


def white_kernel(n: int, sigma_sq: float = 1.0) -> CorrelationKernel:
    return CorrelationKernel(n, (sigma_sq,) + (0.0,) * (n // 2))
