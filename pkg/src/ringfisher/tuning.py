"""Tuning-curve populations expressed as power allocations over eigen-modes.

A population's derivative profile lives in the paired eigen-modes of the noise
correlation: each active frequency k contributes amplitude T_k and phase c_k,
with the squared amplitudes summing to the signal power budget. Integrating
once (constants fixed to zero) gives the mean responses, so every neuron's
tuning curve is the same waveform shifted by the inter-neuron spacing. The
optimal constructions concentrate the whole budget on a single frequency;
on the torus the two axes share one spectrum and multiply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AxisMismatchError,
    ConditionViolatedError,
    NoPairedModeError,
    ResolutionOutOfRangeError,
)
from .spectral import TWO_PI, SpectralDecomposition

POWER_CONSISTENCY_TOL = 1e-10

FIELD_RESOLUTION_MIN = 16
FIELD_RESOLUTION_MAX = 4096


@dataclass(frozen=True)
class AllocationEntry:
    frequency: int
    amplitude: float
    phase: float = 0.0


@dataclass(frozen=True)
class PowerAllocation:
    """Signal power distributed over paired frequencies with phases.

    ``power`` defaults to the sum of squared amplitudes; passing it explicitly
    asserts consistency. An empty allocation (zero power) is a valid degenerate
    object so that downstream evaluations can report zero cleanly.
    """

    entries: tuple[AllocationEntry, ...]
    power: float = -1.0  # sentinel: derive from entries

    def __post_init__(self) -> None:
        entries = tuple(
            AllocationEntry(int(e.frequency), float(e.amplitude), float(e.phase))
            for e in self.entries
        )
        freqs = [e.frequency for e in entries]
        if len(set(freqs)) != len(freqs):
            raise ValueError(f"duplicate frequencies in allocation: {sorted(freqs)}")
        for e in entries:
            if e.amplitude < 0.0 or not math.isfinite(e.amplitude):
                raise ValueError(f"amplitude must be finite and >= 0, got {e.amplitude}")
            if e.frequency < 1:
                raise ValueError(f"allocation frequencies must be >= 1, got {e.frequency}")
        total = float(sum(e.amplitude**2 for e in entries))
        if self.power == -1.0:
            object.__setattr__(self, "power", total)
        elif abs(self.power - total) > POWER_CONSISTENCY_TOL * max(1.0, abs(self.power)):
            raise ValueError(
                f"declared power {self.power} inconsistent with amplitudes (sum sq = {total})"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def single(cls, frequency: int, power: float, phase: float = 0.0) -> "PowerAllocation":
        if power <= 0.0:
            raise ValueError(f"power must be positive, got {power}")
        return cls(entries=(AllocationEntry(frequency, math.sqrt(power), phase),))

    @classmethod
    def from_powers(
        cls, powers: dict[int, float], phases: dict[int, float] | None = None
    ) -> "PowerAllocation":
        """Build entries from per-frequency power shares (amplitudes are square roots)."""
        phases = phases or {}
        entries = tuple(
            AllocationEntry(k, math.sqrt(p), phases.get(k, 0.0))
            for k, p in sorted(powers.items())
            if p > 0.0
        )
        return cls(entries=entries)

    @property
    def frequencies(self) -> tuple[int, ...]:
        return tuple(e.frequency for e in self.entries)

    def max_frequency(self) -> int:
        return max((e.frequency for e in self.entries), default=0)

    def scaled(self, amplitude_factor: float) -> "PowerAllocation":
        return PowerAllocation(
            entries=tuple(
                AllocationEntry(e.frequency, e.amplitude * amplitude_factor, e.phase)
                for e in self.entries
            )
        )

    def to_dict(self) -> dict:
        return {
            "power": self.power,
            "entries": [
                {"frequency": e.frequency, "amplitude": e.amplitude, "phase": e.phase}
                for e in self.entries
            ],
        }


@dataclass(frozen=True)
class TuningPopulation1D:
    """Ring population whose derivative profile is the given allocation."""

    decomp: SpectralDecomposition
    allocation: PowerAllocation

    def __post_init__(self) -> None:
        paired = set(self.decomp.paired_frequencies)
        for e in self.allocation.entries:
            if e.frequency not in paired:
                raise ValueError(
                    f"frequency {e.frequency} is not a paired mode of the n={self.decomp.n} ring"
                )

    @property
    def n(self) -> int:
        return self.decomp.n


@dataclass(frozen=True)
class TuningPopulation2D:
    """Separable torus population: x and y axes share kernel and amplitude spectrum."""

    x: TuningPopulation1D
    y: TuningPopulation1D
    phase_shift: float = 0.0

    def __post_init__(self) -> None:
        if self.x.decomp.kernel != self.y.decomp.kernel:
            raise AxisMismatchError("x and y axes must share one correlation kernel")
        xs = {e.frequency: e for e in self.x.allocation.entries}
        ys = {e.frequency: e for e in self.y.allocation.entries}
        if set(xs) != set(ys):
            raise ValueError("x and y allocations must activate the same frequencies")
        for k, ex in xs.items():
            ey = ys[k]
            if abs(ex.amplitude - ey.amplitude) > POWER_CONSISTENCY_TOL * max(1.0, ex.amplitude):
                raise ValueError(f"amplitude spectra differ at frequency {k}")
            gap = (ey.phase - ex.phase - k * self.phase_shift) % TWO_PI
            gap = min(gap, TWO_PI - gap)
            if gap > 1e-10:
                raise ValueError(
                    f"y phase at frequency {k} must equal x phase + {k} * phase_shift"
                )

    @classmethod
    def from_axis(
        cls, x: TuningPopulation1D, phase_shift: float = 0.0
    ) -> "TuningPopulation2D":
        """Derive the y axis by shifting each frequency's phase by k * phase_shift."""
        y_alloc = PowerAllocation(
            entries=tuple(
                AllocationEntry(e.frequency, e.amplitude, e.phase + e.frequency * phase_shift)
                for e in x.allocation.entries
            )
        )
        return cls(x=x, y=TuningPopulation1D(x.decomp, y_alloc), phase_shift=phase_shift)

    @property
    def n(self) -> int:
        return self.x.n


def _as_theta_array(theta) -> tuple[np.ndarray, bool]:
    arr = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    scalar = arr.ndim == 0
    return np.atleast_1d(arr), scalar


def mean_response(pop: TuningPopulation1D, theta) -> np.ndarray:
    """Mean population activity f(theta); rows follow theta when given an array.

    Each active frequency contributes (T/k) [sin(k theta + c) w_k
    - cos(k theta + c) w'_k], i.e. the integral of the derivative profile with
    integration constants fixed to zero.
    """
    thetas, scalar = _as_theta_array(theta)
    out = np.zeros((thetas.size, pop.n))
    for e in pop.allocation.entries:
        psi = e.frequency * thetas + e.phase
        w = pop.decomp.cos_vector(e.frequency)
        wp = pop.decomp.sin_vector(e.frequency)
        scale = e.amplitude / e.frequency
        out += scale * (np.outer(np.sin(psi), w) - np.outer(np.cos(psi), wp))
    return out[0] if scalar else out


def mean_derivative(pop: TuningPopulation1D, theta) -> np.ndarray:
    """Derivative of the mean activity with respect to theta (closed form)."""
    thetas, scalar = _as_theta_array(theta)
    out = np.zeros((thetas.size, pop.n))
    for e in pop.allocation.entries:
        psi = e.frequency * thetas + e.phase
        w = pop.decomp.cos_vector(e.frequency)
        wp = pop.decomp.sin_vector(e.frequency)
        out += e.amplitude * (np.outer(np.cos(psi), w) + np.outer(np.sin(psi), wp))
    return out[0] if scalar else out


def mean_second_derivative(pop: TuningPopulation1D, theta) -> np.ndarray:
    """Second derivative of the mean activity (closed form)."""
    thetas, scalar = _as_theta_array(theta)
    out = np.zeros((thetas.size, pop.n))
    for e in pop.allocation.entries:
        psi = e.frequency * thetas + e.phase
        w = pop.decomp.cos_vector(e.frequency)
        wp = pop.decomp.sin_vector(e.frequency)
        out += (
            e.amplitude
            * e.frequency
            * (np.outer(np.cos(psi), wp) - np.outer(np.sin(psi), w))
        )
    return out[0] if scalar else out


def neuron_curve(pop: TuningPopulation1D, neuron: int, thetas: np.ndarray) -> np.ndarray:
    """Single neuron's tuning curve sampled at the given angles."""
    thetas, _ = _as_theta_array(thetas)
    out = np.zeros(thetas.size)
    for e in pop.allocation.entries:
        psi = e.frequency * thetas + e.phase
        w = pop.decomp.cos_vector(e.frequency)[neuron]
        wp = pop.decomp.sin_vector(e.frequency)[neuron]
        out += (e.amplitude / e.frequency) * (np.sin(psi) * w - np.cos(psi) * wp)
    return out


def signal_power(pop: TuningPopulation1D, theta) -> float:
    """Squared norm of the derivative profile; equals the power budget at any theta."""
    d = mean_derivative(pop, theta)
    return float(d @ d)


def _argmin_with_tiebreak(frequencies: Sequence[int], scores: Sequence[float]) -> int:
    """Smallest frequency whose score ties the minimum within 1e-12 absolute."""
    best = min(scores)
    for k, s in sorted(zip(frequencies, scores)):
        if s <= best + 1e-12:
            return k
    return min(frequencies)


def optimal_tuning_1d(decomp: SpectralDecomposition, power: float) -> TuningPopulation1D:
    """Concentrate the whole budget on the paired frequency with smallest eigenvalue.

    Ties break toward the smaller frequency; phase defaults to zero so the
    derivative at theta = 0 aligns with the cosine eigenvector.
    """
    paired = [m for m in decomp.modes if m.paired]
    if not paired:
        raise NoPairedModeError(f"no paired mode available on the n={decomp.n} ring")
    k_star = _argmin_with_tiebreak(
        [m.frequency for m in paired], [m.eigenvalue for m in paired]
    )
    return TuningPopulation1D(decomp, PowerAllocation.single(k_star, power))


def optimal_tuning_2d(
    decomp: SpectralDecomposition, power: float, phase_shift: float = 0.0
) -> TuningPopulation2D:
    """Single-frequency rectangular-grid optimum for the separable torus.

    Valid only when the eigenvalue minimizer and the (frequency^2 * eigenvalue)
    minimizer coincide over paired modes; otherwise the concentration argument
    does not apply and the general simplex search must be used instead.
    """
    paired = [m for m in decomp.modes if m.paired]
    if not paired:
        raise NoPairedModeError(f"no paired mode available on the n={decomp.n} ring")
    freqs = [m.frequency for m in paired]
    lams = [m.eigenvalue for m in paired]
    k_lam = _argmin_with_tiebreak(freqs, lams)
    k_klam = _argmin_with_tiebreak(freqs, [k * k * l for k, l in zip(freqs, lams)])
    if k_lam != k_klam:
        raise ConditionViolatedError(
            f"eigenvalue minimizer {k_lam} and weighted minimizer {k_klam} disagree; "
            "use the general allocation search (optimal.maximize_fisher_2d)"
        )
    x = TuningPopulation1D(decomp, PowerAllocation.single(k_lam, power))
    return TuningPopulation2D.from_axis(x, phase_shift=phase_shift)


def sample_firing_field(
    pop2d: TuningPopulation2D,
    neuron: tuple[int, int],
    resolution: int,
    nonnegative: bool = False,
) -> np.ndarray:
    """Outer product of the two axis curves on a resolution^2 torus grid.

    With ``nonnegative`` each axis curve is lifted by its own minimum before
    multiplying, which renders the positive-bump lattice (display convention);
    callers are responsible for range-checking the resolution.
    """
    i, j = neuron
    thetas = TWO_PI * np.arange(resolution) / resolution
    cx = neuron_curve(pop2d.x, i, thetas)
    cy = neuron_curve(pop2d.y, j, thetas)
    if nonnegative:
        cx = cx - cx.min()
        cy = cy - cy.min()
    return np.outer(cx, cy)


def firing_field_2d(
    pop2d: TuningPopulation2D,
    neuron: tuple[int, int],
    resolution: int,
    nonnegative: bool = False,
) -> np.ndarray:
    """Sampled firing field of one torus neuron; see ``sample_firing_field``."""
    if not FIELD_RESOLUTION_MIN <= resolution <= FIELD_RESOLUTION_MAX:
        raise ResolutionOutOfRangeError(
            f"resolution {resolution} outside [{FIELD_RESOLUTION_MIN}, {FIELD_RESOLUTION_MAX}]"
        )
    return sample_firing_field(pop2d, neuron, resolution, nonnegative=nonnegative)


_NEIGHBOR_SHIFTS = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)]


def count_toroidal_maxima(field: np.ndarray) -> int:
    """Count local maxima of a 2D field with wrap-around (toroidal) adjacency.

    A maximum is a connected plateau of equal values that dominates all eight
    neighbors of each of its pixels; a constant field has none.
    """
    f = np.asarray(field, dtype=float)
    if f.ndim != 2:
        raise ValueError("field must be 2D")
    if np.all(f == f.flat[0]):
        return 0
    candidate = np.ones_like(f, dtype=bool)
    for di, dj in _NEIGHBOR_SHIFTS:
        candidate &= f >= np.roll(np.roll(f, di, axis=0), dj, axis=1)
    rows, cols = f.shape
    seen = np.zeros_like(candidate)
    count = 0
    for i, j in zip(*np.nonzero(candidate)):
        if seen[i, j]:
            continue
        count += 1
        stack = [(i, j)]
        seen[i, j] = True
        while stack:
            a, b = stack.pop()
            for di, dj in _NEIGHBOR_SHIFTS:
                na, nb = (a + di) % rows, (b + dj) % cols
                if candidate[na, nb] and not seen[na, nb]:
                    seen[na, nb] = True
                    stack.append((na, nb))
    return count


@dataclass(frozen=True)
class ShiftReport:
    """Outcome of checking that neighboring tuning curves are shifted copies."""

    max_abs_error: float
    tolerance: float
    passed: bool


def curves_shift_report(curves: np.ndarray, tol: float = 1e-9) -> ShiftReport:
    """Check a sampled curve table (thetas x neurons) for the shifted-copy property.

    The theta grid must be uniform over a full revolution with a multiple of n
    samples so the inter-neuron spacing is an integer number of grid steps; the
    check wraps around cyclically (last neuron against the first).
    """
    samples, n = curves.shape
    if samples % n != 0:
        raise ValueError(f"theta samples ({samples}) must be a multiple of n ({n})")
    step = samples // n
    err = 0.0
    for j in range(n):
        expected = np.roll(curves[:, j], step)
        err = max(err, float(np.max(np.abs(curves[:, (j + 1) % n] - expected))))
    return ShiftReport(max_abs_error=err, tolerance=tol, passed=err <= tol)


def shifted_copy_check(
    pop: TuningPopulation1D, samples_per_neuron: int = 32, tol: float = 1e-9
) -> ShiftReport:
    """Verify each neuron's curve is its predecessor's shifted by one spacing."""
    grid = samples_per_neuron * pop.n
    thetas = TWO_PI * np.arange(grid) / grid
    return curves_shift_report(mean_response(pop, thetas), tol=tol)
