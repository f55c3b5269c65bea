"""Circulant symmetric correlation kernels on a ring and their spectral decomposition.

A kernel assigns a covariance to every ring distance between two of the n
uniformly placed neurons. The induced n x n matrix is circulant and symmetric,
so its eigenvectors are sampled cosines and sines: every interior frequency k
carries a (cos, sin) eigenvector pair sharing one eigenvalue, while k = 0 and
(for even n) the alternating k = n/2 mode are singletons. Eigenvalues follow
from a closed-form cosine sum over distances, which keeps the decomposition
exact and makes inversion, sampling, and pattern rotation O(n) per mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    MalformedKernelError,
    NoPairedModeError,
    NotPositiveSemidefiniteError,
    SingularCovarianceError,
    SizeLimitError,
    UnpairedModeError,
)

TWO_PI = 2.0 * math.pi

#: Eigenvalues above -PSD_TOLERANCE are accepted as nonnegative; strictly
#: positive means above +PSD_TOLERANCE (required for inversion).
PSD_TOLERANCE = 1e-12

#: Refuse dense materialization above this many neurons unless overridden.
DENSE_SIZE_LIMIT = 4096


def _closed_form_eigenvalues(n: int, values: np.ndarray) -> np.ndarray:
    """Eigenvalues for frequencies 0..floor(n/2) via the cosine sum over distances."""
    half = n // 2
    ks = np.arange(half + 1)
    interior = np.arange(1, (n + 1) // 2)  # distances with two ring realizations
    lams = np.full(half + 1, values[0], dtype=float)
    if interior.size:
        angles = TWO_PI * np.outer(ks, interior) / n
        lams = lams + 2.0 * (np.cos(angles) @ values[interior])
    if n % 2 == 0:
        lams = lams + values[half] * np.where(ks % 2 == 0, 1.0, -1.0)
    return lams


@dataclass(frozen=True)
class CorrelationKernel:
    """Distance-indexed covariances c_0..c_{floor(n/2)} on a ring of n neurons.

    Entry (i, j) of the induced matrix is c at the ring distance
    min(|i-j|, n-|i-j|). c_0 must be positive; n must be at least 4.
    """

    n: int
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 4:
            raise MalformedKernelError(f"neuron count must be an integer >= 4, got {self.n!r}")
        vals = tuple(float(v) for v in self.values)
        expected = self.n // 2 + 1
        if len(vals) != expected:
            raise MalformedKernelError(
                f"kernel for n={self.n} needs {expected} values c_0..c_{self.n // 2}, got {len(vals)}"
            )
        if not all(math.isfinite(v) for v in vals):
            raise MalformedKernelError("kernel values must be finite")
        if vals[0] <= 0.0:
            raise MalformedKernelError(f"c_0 must be positive, got {vals[0]}")
        object.__setattr__(self, "values", vals)

    @property
    def max_distance(self) -> int:
        return self.n // 2

    def value_at_distance(self, d: int) -> float:
        return self.values[min(d % self.n, self.n - d % self.n)]


def exponential_kernel(n: int, c0: float = 1.0, rho: float = 0.5) -> CorrelationKernel:
    """Geometric decay c_d = c0 * rho**d over ring distance, PSD-checked."""
    if not 0.0 < rho < 1.0:
        raise MalformedKernelError(f"rho must lie in (0, 1), got {rho}")
    kernel = CorrelationKernel(n, tuple(c0 * rho**d for d in range(n // 2 + 1)))
    _require_psd(kernel)
    return kernel


def gaussian_kernel(n: int, c0: float = 1.0, length: float = 1.0) -> CorrelationKernel:
    """Ring-Gaussian decay c_d = c0 * exp(-d^2 / (2 length^2)), PSD-checked."""
    if length <= 0.0:
        raise MalformedKernelError(f"length must be positive, got {length}")
    kernel = CorrelationKernel(
        n, tuple(c0 * math.exp(-(d * d) / (2.0 * length * length)) for d in range(n // 2 + 1))
    )
    _require_psd(kernel)
    return kernel


def kernel_from_spectrum(n: int, eigenvalues: Iterable[float]) -> CorrelationKernel:
    """Kernel whose decomposition has the given eigenvalues at frequencies 0..floor(n/2).

    Inverts the closed-form cosine sum, so it is the exact preimage of
    ``decompose``: handy for constructing kernels with a prescribed spectrum.
    """
    lams = np.asarray(list(eigenvalues), dtype=float)
    half = n // 2
    if lams.shape != (half + 1,):
        raise MalformedKernelError(f"need {half + 1} eigenvalues for n={n}, got {lams.shape}")
    ds = np.arange(half + 1)
    interior = np.arange(1, (n + 1) // 2)
    cs = np.full(half + 1, lams[0], dtype=float)
    if interior.size:
        angles = TWO_PI * np.outer(ds, interior) / n
        cs = cs + 2.0 * (np.cos(angles) @ lams[interior])
    if n % 2 == 0:
        cs = cs + lams[half] * np.where(ds % 2 == 0, 1.0, -1.0)
    return CorrelationKernel(n, tuple(cs / n))


def _require_psd(kernel: CorrelationKernel) -> None:
    lams = _closed_form_eigenvalues(kernel.n, np.asarray(kernel.values))
    if lams.min() < -PSD_TOLERANCE:
        k_bad = int(np.argmin(lams))
        raise NotPositiveSemidefiniteError(
            f"kernel is not positive semidefinite: eigenvalue {lams[k_bad]:.6g} at frequency {k_bad}"
        )


@dataclass(frozen=True)
class EigenMode:
    """One spatial frequency of the decomposition.

    Paired modes carry orthonormal cosine and sine eigenvectors sharing the
    eigenvalue; k = 0 and the alternating mode at k = n/2 (even n) are
    singletons whose sine sample vanishes identically.
    """

    frequency: int
    eigenvalue: float
    paired: bool

    @property
    def multiplicity(self) -> int:
        return 2 if self.paired else 1


@dataclass(frozen=True)
class SpectralDecomposition:
    """Full analytic eigensystem of a circulant symmetric kernel."""

    kernel: CorrelationKernel
    modes: tuple[EigenMode, ...]

    def __post_init__(self) -> None:
        if sum(m.multiplicity for m in self.modes) != self.kernel.n:
            raise MalformedKernelError("mode multiplicities must span the whole space")

    @property
    def n(self) -> int:
        return self.kernel.n

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.eigenvalue for m in self.modes])

    @property
    def paired_frequencies(self) -> tuple[int, ...]:
        return tuple(m.frequency for m in self.modes if m.paired)

    def mode(self, frequency: int) -> EigenMode:
        for m in self.modes:
            if m.frequency == frequency:
                return m
        raise KeyError(f"no mode at frequency {frequency}")

    def is_paired(self, frequency: int) -> bool:
        return self.mode(frequency).paired

    def cos_vector(self, frequency: int) -> np.ndarray:
        """Unit-norm cosine eigenvector at the given frequency."""
        n = self.n
        idx = np.arange(n)
        if frequency == 0:
            return np.full(n, 1.0 / math.sqrt(n))
        if n % 2 == 0 and frequency == n // 2:
            return np.where(idx % 2 == 0, 1.0, -1.0) / math.sqrt(n)
        return math.sqrt(2.0 / n) * np.cos(TWO_PI * frequency * idx / n)

    def sin_vector(self, frequency: int) -> np.ndarray:
        """Unit-norm sine eigenvector; only paired frequencies have one."""
        if not self.is_paired(frequency):
            raise UnpairedModeError(f"frequency {frequency} has no sine eigenvector")
        idx = np.arange(self.n)
        return math.sqrt(2.0 / self.n) * np.sin(TWO_PI * frequency * idx / self.n)

    @cached_property
    def _basis(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal eigenvector matrix (columns) and per-column eigenvalues."""
        cols = []
        lams = []
        for m in self.modes:
            cols.append(self.cos_vector(m.frequency))
            lams.append(m.eigenvalue)
            if m.paired:
                cols.append(self.sin_vector(m.frequency))
                lams.append(m.eigenvalue)
        basis = np.column_stack(cols)
        basis.flags.writeable = False
        return basis, np.array(lams)

    @property
    def basis_matrix(self) -> np.ndarray:
        return self._basis[0]

    @property
    def column_eigenvalues(self) -> np.ndarray:
        return self._basis[1]

    def min_paired_eigenvalue(self) -> float:
        paired = [m.eigenvalue for m in self.modes if m.paired]
        if not paired:
            raise NoPairedModeError("decomposition has no paired mode")
        return min(paired)


def decompose(kernel: CorrelationKernel) -> SpectralDecomposition:
    """Spectrally decompose a kernel using the closed-form cosine sums."""
    n = kernel.n
    lams = _closed_form_eigenvalues(n, np.asarray(kernel.values))
    modes = tuple(
        EigenMode(
            frequency=int(k),
            eigenvalue=float(lams[k]),
            paired=0 < k < (n + 1) // 2,
        )
        for k in range(n // 2 + 1)
    )
    return SpectralDecomposition(kernel=kernel, modes=modes)


@dataclass(frozen=True)
class PsdReport:
    """Validity report for a decomposed kernel, never raised as an error."""

    min_eigenvalue: float
    min_frequency: int
    valid: bool
    strictly_positive: bool
    negative_frequencies: tuple[int, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "min_frequency": self.min_frequency,
            "valid": self.valid,
            "strictly_positive": self.strictly_positive,
            "negative_frequencies": list(self.negative_frequencies),
        }


def validate_psd(decomp: SpectralDecomposition, tol: float = PSD_TOLERANCE) -> PsdReport:
    """Report the smallest eigenvalue and whether the kernel is (strictly) PSD."""
    lams = decomp.eigenvalues
    k_min = int(np.argmin(lams))
    negative = tuple(int(m.frequency) for m in decomp.modes if m.eigenvalue < -tol)
    return PsdReport(
        min_eigenvalue=float(lams[k_min]),
        min_frequency=int(decomp.modes[k_min].frequency),
        valid=not negative,
        strictly_positive=bool(lams.min() > tol),
        negative_frequencies=negative,
    )


def materialize_dense(kernel: CorrelationKernel, size_limit: int = DENSE_SIZE_LIMIT) -> np.ndarray:
    """Dense n x n matrix with entry (i, j) = c at ring distance of i, j.

    Intended for test oracles and small-n checks; refuses to allocate above
    ``size_limit`` neurons.
    """
    n = kernel.n
    if n > size_limit:
        raise SizeLimitError(f"n={n} exceeds dense materialization limit {size_limit}")
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :])
    dist = np.minimum(dist, n - dist)
    return np.asarray(kernel.values)[dist]


def apply_inverse(
    decomp: SpectralDecomposition, v: np.ndarray, tol: float = PSD_TOLERANCE
) -> np.ndarray:
    """Multiply by the inverse correlation matrix in the eigenbasis.

    Accepts a single vector of length n or a stack shaped (..., n). Raises
    SingularCovarianceError unless every eigenvalue exceeds ``tol``.
    """
    basis, lams = decomp._basis
    if lams.min() <= tol:
        raise SingularCovarianceError(
            f"covariance is singular at tolerance {tol}: min eigenvalue {lams.min():.6g}"
        )
    v = np.asarray(v, dtype=float)
    return ((v @ basis) / lams) @ basis.T


def mode_coefficients(decomp: SpectralDecomposition, v: np.ndarray) -> dict[int, tuple[float, float]]:
    """Project a vector on each mode, returning (cos, sin) coefficients per frequency.

    Singleton frequencies report a zero sine coefficient.
    """
    v = np.asarray(v, dtype=float)
    out: dict[int, tuple[float, float]] = {}
    for m in decomp.modes:
        a = float(decomp.cos_vector(m.frequency) @ v)
        b = float(decomp.sin_vector(m.frequency) @ v) if m.paired else 0.0
        out[m.frequency] = (a, b)
    return out


def synthesize(decomp: SpectralDecomposition, coeffs: Mapping[int, tuple[float, float]]) -> np.ndarray:
    """Rebuild a vector from per-frequency (cos, sin) coefficients."""
    v = np.zeros(decomp.n)
    for k, (a, b) in coeffs.items():
        mode = decomp.mode(k)
        v += a * decomp.cos_vector(k)
        if mode.paired:
            v += b * decomp.sin_vector(k)
        elif b != 0.0:
            raise UnpairedModeError(f"frequency {k} has no sine eigenvector to weight")
    return v


def rotate_pattern(
    decomp: SpectralDecomposition,
    coeffs: Mapping[int, tuple[float, float]],
    theta: float,
) -> dict[int, tuple[float, float]]:
    """Rotate a pattern by theta radians via its eigen-coefficients.

    Shifting a ring pattern rotates each frequency's (cos, sin) coefficient
    pair by k * theta:

        (a, b) -> (a cos(k theta) - b sin(k theta), b cos(k theta) + a sin(k theta))

    Composition is additive in theta and the per-mode norm is preserved.
    Coefficients may target paired frequencies only.
    """
    out: dict[int, tuple[float, float]] = {}
    for k, (a, b) in coeffs.items():
        if not decomp.is_paired(k):
            raise UnpairedModeError(f"cannot rotate singleton frequency {k}")
        c, s = math.cos(k * theta), math.sin(k * theta)
        out[k] = (a * c - b * s, b * c + a * s)
    return out


@dataclass(frozen=True)
class TorusCorrelation:
    """Separable torus covariance: the same ring kernel on both axes.

    Entry ((i, j), (k, l)) equals C[i, k] * C[j, l]; the inverse factorizes the
    same way, which ``torus_inverse_check`` verifies against a dense oracle.
    """

    axis: SpectralDecomposition

    @property
    def n(self) -> int:
        return self.axis.n

    def dense(self, size_limit: int = 64) -> np.ndarray:
        c = materialize_dense(self.axis.kernel, size_limit=size_limit)
        return np.kron(c, c)

    def inverse_dense(self, tol: float = PSD_TOLERANCE) -> np.ndarray:
        """Kronecker product of the spectrally-inverted axis matrix with itself."""
        basis, lams = self.axis._basis
        if lams.min() <= tol:
            raise SingularCovarianceError(
                f"axis covariance singular at tolerance {tol}: min eigenvalue {lams.min():.6g}"
            )
        axis_inv = (basis / lams) @ basis.T
        return np.kron(axis_inv, axis_inv)


@dataclass(frozen=True)
class TorusInverseReport:
    max_abs_error: float
    tolerance: float
    passed: bool


def torus_inverse_check(
    decomp: SpectralDecomposition, tol: float = 1e-8
) -> TorusInverseReport:
    """Compare the separable torus inverse against dense n^2 x n^2 inversion.

    Only sensible at dense-oracle scale (n <= 16).
    """
    if decomp.n > 16:
        raise SizeLimitError(f"torus inverse check is a dense oracle, n={decomp.n} > 16")
    torus = TorusCorrelation(axis=decomp)
    dense_inverse = np.linalg.inv(torus.dense())
    separable = torus.inverse_dense()
    err = float(np.max(np.abs(dense_inverse - separable)))
    return TorusInverseReport(max_abs_error=err, tolerance=tol, passed=err <= tol)
