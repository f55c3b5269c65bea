"""File formats: kernel definitions, CSV exports, graymap images, JSON reports."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import MalformedKernelError
from .spectral import (
    CorrelationKernel,
    SpectralDecomposition,
    TWO_PI,
    exponential_kernel,
    gaussian_kernel,
)
from .tuning import TuningPopulation1D, mean_response


def kernel_from_dict(definition: dict) -> CorrelationKernel:
    """Build a kernel from its definition mapping (see ``load_kernel``)."""
    try:
        n = definition["n"]
        family = definition["family"]
        params = definition.get("params", {})
    except (TypeError, KeyError) as exc:
        raise MalformedKernelError(f"kernel definition missing field: {exc}") from exc
    if not isinstance(n, int):
        raise MalformedKernelError(f"n must be an integer, got {n!r}")
    if family == "explicit":
        values = params.get("values")
        if not isinstance(values, list):
            raise MalformedKernelError("explicit kernel needs params.values as a list")
        return CorrelationKernel(n, tuple(float(v) for v in values))
    if family == "exponential":
        return exponential_kernel(n, c0=float(params.get("c0", 1.0)), rho=float(params["rho"]))
    if family == "gaussian":
        return gaussian_kernel(n, c0=float(params.get("c0", 1.0)), length=float(params["length"]))
    raise MalformedKernelError(f"unknown kernel family {family!r}")


def load_kernel(path: str | Path) -> CorrelationKernel:
    """Read a kernel definition file.

    JSON object with fields ``n``, ``family`` (explicit | exponential |
    gaussian) and ``params``: the explicit form lists the covariances
    c_0..c_{floor(n/2)} under ``values``; exponential takes ``c0`` and ``rho``;
    gaussian takes ``c0`` and ``length``.
    """
    try:
        definition = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedKernelError(f"cannot read kernel file {path}: {exc}") from exc
    if not isinstance(definition, dict):
        raise MalformedKernelError("kernel file must hold a JSON object")
    return kernel_from_dict(definition)


def write_decomposition_csv(decomp: SpectralDecomposition, path: str | Path) -> None:
    """Columns k, lambda, paired; one row per frequency."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "lambda", "paired"])
        for m in decomp.modes:
            writer.writerow([m.frequency, repr(m.eigenvalue), str(m.paired).lower()])


def write_curves_csv(
    pop: TuningPopulation1D,
    path: str | Path,
    samples: int = 256,
    offset: float = 0.0,
) -> None:
    """Sampled tuning curves: theta column then one column per neuron."""
    thetas = TWO_PI * np.arange(samples) / samples
    curves = mean_response(pop, thetas) + offset
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["theta"] + [f"neuron_{i}" for i in range(pop.n)])
        for t, row in zip(thetas, curves):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def write_field_csv(field: np.ndarray, path: str | Path) -> None:
    """Matrix of field samples; row = first axis angle, column = second axis angle."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        for row in np.asarray(field, dtype=float):
            writer.writerow([repr(float(v)) for v in row])


def read_field_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="") as handle:
        return np.array([[float(v) for v in row] for row in csv.reader(handle)])


def write_pgm(field: np.ndarray, path: str | Path) -> None:
    """8-bit binary graymap of the min-max normalized field."""
    f = np.asarray(field, dtype=float)
    lo, hi = float(f.min()), float(f.max())
    if math.isclose(lo, hi):
        pixels = np.zeros_like(f, dtype=np.uint8)
    else:
        pixels = np.rint(255.0 * (f - lo) / (hi - lo)).astype(np.uint8)
    rows, cols = pixels.shape
    with open(path, "wb") as handle:
        handle.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        handle.write(pixels.tobytes())


def write_json(payload: dict, path: str | Path) -> None:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def dumps_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()
