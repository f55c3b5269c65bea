"""Fisher information of ring and torus populations under circulant Gaussian noise.

The quadratic form (derivative profile against the inverse covariance) reduces
in the eigenbasis to a sum of squared per-mode amplitudes over eigenvalues, so
it is independent of position; its position derivative vanishes identically.
On the separable torus the information splits into a product of two one-axis
quadratic forms per direction plus a cross term that vanishes for the
zero-integration-constant populations built here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AxisMismatchError, NonpositiveInformationError
from .spectral import TWO_PI, SpectralDecomposition, apply_inverse
from .tuning import (
    PowerAllocation,
    TuningPopulation1D,
    TuningPopulation2D,
    mean_derivative,
    mean_response,
    mean_second_derivative,
)


@dataclass(frozen=True)
class Tolerances:
    """Central numerical tolerances for identity and consistency checks."""

    identity_rel: float = 1e-9
    finite_difference_rel: float = 1e-6
    cross_term_abs: float = 1e-9
    singular: float = 1e-12


DEFAULT_TOLERANCES = Tolerances()


def _resolve_decomp(
    pop: TuningPopulation1D, decomp: SpectralDecomposition | None
) -> SpectralDecomposition:
    if decomp is None:
        return pop.decomp
    if decomp.kernel != pop.decomp.kernel:
        raise AxisMismatchError("population was built against a different kernel")
    return decomp


def fisher_1d(
    pop: TuningPopulation1D,
    decomp: SpectralDecomposition | None = None,
    theta: float = 0.0,
) -> float:
    """Quadratic-form Fisher information at one position."""
    decomp = _resolve_decomp(pop, decomp)
    d = mean_derivative(pop, theta)
    return float(d @ apply_inverse(decomp, d))


def fisher_1d_spectral(allocation: PowerAllocation, decomp: SpectralDecomposition) -> float:
    """Position-free spectral form: sum of squared amplitudes over eigenvalues."""
    total = 0.0
    for e in allocation.entries:
        total += e.amplitude**2 / decomp.mode(e.frequency).eigenvalue
    return total


def fisher_max_bound(decomp: SpectralDecomposition, power: float) -> float:
    """Upper bound: all power on the smallest paired eigenvalue."""
    return power / decomp.min_paired_eigenvalue()


def fisher_derivative(
    pop: TuningPopulation1D,
    decomp: SpectralDecomposition | None = None,
    theta: float = 0.0,
) -> float:
    """Position derivative of the information: twice the second-derivative form.

    Vanishes identically for the populations built here; computed honestly so
    that deviations would surface.
    """
    decomp = _resolve_decomp(pop, decomp)
    dd = mean_second_derivative(pop, theta)
    return float(2.0 * (dd @ apply_inverse(decomp, mean_derivative(pop, theta))))


def crb(fi: float) -> float:
    """Cramer-Rao bound: reciprocal of a positive Fisher information."""
    if fi <= 0.0:
        raise NonpositiveInformationError(f"information must be positive, got {fi}")
    return 1.0 / fi


@dataclass(frozen=True)
class FisherReport1D:
    theta_samples: tuple[float, ...]
    fi_values: tuple[float, ...]
    fi_spectral: float
    fi_max_bound: float
    crb: float

    def to_dict(self) -> dict:
        return {
            "fi_theta": list(self.fi_values),
            "theta_samples": list(self.theta_samples),
            "fi_spectral": self.fi_spectral,
            "fi_max_bound": self.fi_max_bound,
            "crb": self.crb,
        }


def fisher_report_1d(
    pop: TuningPopulation1D,
    decomp: SpectralDecomposition | None = None,
    theta_samples: int = 64,
) -> FisherReport1D:
    """Evaluate the quadratic form on a uniform grid next to its spectral value."""
    decomp = _resolve_decomp(pop, decomp)
    thetas = TWO_PI * np.arange(theta_samples) / theta_samples
    values = tuple(fisher_1d(pop, decomp, t) for t in thetas)
    spectral = fisher_1d_spectral(pop.allocation, decomp)
    return FisherReport1D(
        theta_samples=tuple(float(t) for t in thetas),
        fi_values=values,
        fi_spectral=spectral,
        fi_max_bound=fisher_max_bound(decomp, pop.allocation.power),
        crb=crb(spectral) if spectral > 0 else float("inf"),
    )


@dataclass(frozen=True)
class FisherReport2D:
    i_x: float
    i_y: float
    i_xy: float
    product_form: float
    minimum_variance: float

    def to_dict(self) -> dict:
        return {
            "i_x": self.i_x,
            "i_y": self.i_y,
            "i_xy": self.i_xy,
            "product_form": self.product_form,
            "minimum_variance": self.minimum_variance,
        }


def fisher_2d(
    pop2d: TuningPopulation2D,
    decomp: SpectralDecomposition | None = None,
    theta: tuple[float, float] = (0.0, 0.0),
) -> FisherReport2D:
    """Directional information on the torus via separable quadratic forms.

    i_x contracts the x derivative and the y response against the axis inverse
    (and symmetrically for i_y); the cross term pairs derivative with response
    on both axes. ``product_form`` is the equivalent spectral expression
    (sum T^2/lambda) * (sum T^2/(k^2 lambda)), and ``minimum_variance`` the
    x-variance bound from inverting the 2x2 information matrix.
    """
    decomp = _resolve_decomp(pop2d.x, decomp)
    theta_x, theta_y = theta
    gx = mean_derivative(pop2d.x, theta_x)
    fx = mean_response(pop2d.x, theta_x)
    gy = mean_derivative(pop2d.y, theta_y)
    fy = mean_response(pop2d.y, theta_y)
    dgx, dfx = apply_inverse(decomp, gx), apply_inverse(decomp, fx)
    dgy, dfy = apply_inverse(decomp, gy), apply_inverse(decomp, fy)
    i_x = float((gx @ dgx) * (fy @ dfy))
    i_y = float((fx @ dfx) * (gy @ dgy))
    i_xy = float((gx @ dfx) * (fy @ dgy))
    spectral_g = fisher_1d_spectral(pop2d.x.allocation, decomp)
    spectral_f = 0.0
    for e in pop2d.x.allocation.entries:
        lam = decomp.mode(e.frequency).eigenvalue
        spectral_f += e.amplitude**2 / (e.frequency**2 * lam)
    det = i_x * i_y - i_xy * i_xy
    minimum_variance = i_y / det if det > 0 else float("inf")
    return FisherReport2D(
        i_x=i_x,
        i_y=i_y,
        i_xy=i_xy,
        product_form=spectral_g * spectral_f,
        minimum_variance=minimum_variance,
    )
