"""Command-line interface: decompose, optimize, fisher, field2d, simulate.

Every command is deterministic in its inputs and seed, emits data-first
artifacts (CSV, JSON, binary graymap) and writes a manifest listing input and
output digests so runs can be reproduced and compared byte for byte.

Exit codes: 0 success, 2 malformed input, 3 invalid covariance, 4 infeasible
optimization, 5 bad parameter range, 6 simulation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from ._version import __version__
from . import io as rio
from .errors import (
    ConditionViolatedError,
    MalformedKernelError,
    MultiModePopulationError,
    NoPairedModeError,
    NotPositiveSemidefiniteError,
    ResolutionOutOfRangeError,
    SingularCovarianceError,
    SizeLimitError,
)
from .fisher import (
    crb,
    fisher_2d,
    fisher_max_bound,
    fisher_report_1d,
)
from .mcsim import SimConfig, run_displacement_trials
from .optimal import check_condition, maximize_fisher_1d, maximize_fisher_2d
from .spectral import TWO_PI, decompose, validate_psd
from .tuning import (
    PowerAllocation,
    TuningPopulation1D,
    TuningPopulation2D,
    neuron_curve,
    optimal_tuning_1d,
    optimal_tuning_2d,
    sample_firing_field,
)

EXIT_OK = 0
EXIT_MALFORMED_INPUT = 2
EXIT_INVALID_COVARIANCE = 3
EXIT_INFEASIBLE_OPTIMIZATION = 4
EXIT_BAD_PARAMETER = 5
EXIT_SIMULATION_FAILURE = 6

CLI_RESOLUTION_MIN = 8
CLI_RESOLUTION_MAX = 4096


class ParameterRangeError(ValueError):
    """CLI-level parameter outside its documented range."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringfisher",
        description=(
            "Spectral analysis, optimal tuning construction, Fisher-information "
            "reports, grid-field rendering and Monte Carlo validation for ring "
            "and torus population codes."
        ),
    )
    parser.add_argument("--seed", type=int, default=None, help="override the run seed (default: command or config specific)")
    parser.add_argument("--threads", type=int, default=1, help="worker cap; results are identical for any value (default: 1)")
    parser.add_argument("--out-dir", type=Path, default=Path("."), help="base directory for relative output paths (default: .)")
    parser.add_argument(
        "--offset",
        type=float,
        default=None,
        help=(
            "display DC offset added to exported tuning curves; for 2D fields the "
            "default lifts each axis curve to be nonnegative, 0 keeps signed values"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose a kernel file into eigenvalues")
    p.add_argument("kernel", type=Path, help="kernel definition file (JSON)")
    p.add_argument("out", type=Path, help="decomposition CSV to write (columns k, lambda, paired)")
    p.set_defaults(handler=_cmd_decompose)

    p = sub.add_parser("optimize", help="maximize Fisher information over power allocations")
    p.add_argument("kernel", type=Path)
    p.add_argument("out", type=Path, help="search result JSON to write")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1, help="ring (1) or torus (2) objective (default: 1)")
    p.add_argument("--power", type=float, default=1.0, help="signal power budget (default: 1.0)")
    p.add_argument("--audit-trials", type=int, default=0, help="random-allocation audit size (default: 0, skip)")
    p.add_argument("--curves-out", type=Path, default=None, help="also export the optimal 1D tuning curves as CSV (default: skip)")
    p.add_argument("--curves-samples", type=int, default=256, help="rows in the curves CSV (default: 256)")
    p.set_defaults(handler=_cmd_optimize)

    p = sub.add_parser("fisher", help="Fisher-information report for an allocation")
    p.add_argument("kernel", type=Path)
    p.add_argument("out", type=Path, help="report JSON to write")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1, help="include torus terms with 2 (default: 1)")
    p.add_argument("--power", type=float, default=1.0, help="signal power budget (default: 1.0)")
    p.add_argument("--k", type=int, default=None, help="single active frequency (default: optimal concentration)")
    p.add_argument("--theta-samples", type=int, default=64, help="positions sampled for the value sweep (default: 64)")
    p.set_defaults(handler=_cmd_fisher)

    p = sub.add_parser("field2d", help="render one torus neuron's firing field")
    p.add_argument("kernel", type=Path)
    p.add_argument("out_pgm", type=Path, help="8-bit binary graymap to write")
    p.add_argument("out_csv", type=Path, help="field sample matrix to write")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=int, default=None, help="grid frequency for both axes (default: use --optimal)")
    group.add_argument("--optimal", action="store_true", help="use the optimal single-frequency construction (default: off)")
    p.add_argument("--res", type=int, default=128, help="samples per axis, 8..4096 (default: 128)")
    p.add_argument("--power", type=float, default=1.0, help="signal power budget (default: 1.0)")
    p.add_argument("--phase-shift", type=float, default=0.0, help="y-axis shift applied as frequency * shift (default: 0)")
    p.add_argument("--neuron", type=int, nargs=2, default=(0, 0), metavar=("I", "J"), help="torus neuron to render (default: 0 0)")
    p.set_defaults(handler=_cmd_field2d)

    p = sub.add_parser("simulate", help="run a displacement-estimation experiment")
    p.add_argument("config", type=Path, help="simulation config file (JSON)")
    p.add_argument("out", type=Path, help="result JSON to write")
    p.add_argument("--dump-trials", type=Path, default=None, help="CSV of per-trial estimates (default: skip)")
    p.set_defaults(handler=_cmd_simulate)
    return parser


def _resolve(args: argparse.Namespace, path: Path | None) -> Path | None:
    if path is None or path.is_absolute():
        return path
    return args.out_dir / path


def _write_manifest(
    args: argparse.Namespace,
    primary_out: Path,
    inputs: list[Path],
    outputs: list[Path],
    settings: dict,
    seed: int | None,
) -> None:
    manifest = {
        "command": args.command,
        "version": __version__,
        "seed": seed,
        "threads": args.threads,
        "settings": settings,
        "inputs": {str(p): rio.sha256_file(p) for p in inputs},
        "outputs": {str(p): rio.sha256_file(p) for p in outputs},
    }
    rio.write_json(manifest, str(primary_out) + ".manifest.json")


def _load_decomposition(path: Path):
    kernel = rio.load_kernel(path)
    return decompose(kernel)


def _require_paired(decomp, frequency: int) -> None:
    if frequency not in decomp.paired_frequencies:
        raise ParameterRangeError(
            f"frequency {frequency} is not a paired mode of the n={decomp.n} ring "
            f"(paired: {list(decomp.paired_frequencies)})"
        )


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _cmd_decompose(args: argparse.Namespace) -> int:
    decomp = _load_decomposition(args.kernel)
    out = _resolve(args, args.out)
    rio.write_decomposition_csv(decomp, out)
    report = validate_psd(decomp)
    _write_manifest(args, out, [args.kernel], [out], {"kernel": str(args.kernel)}, None)
    if not report.valid:
        offending = ", ".join(str(k) for k in report.negative_frequencies)
        print(
            f"error: kernel is not positive semidefinite; negative eigenvalue at k = {offending}",
            file=sys.stderr,
        )
        return EXIT_INVALID_COVARIANCE
    print(rio.dumps_json(report.to_dict()))
    return EXIT_OK


def _spectrum_tied(decomp) -> bool:
    lams = sorted(decomp.mode(k).eigenvalue for k in decomp.paired_frequencies)
    return len(lams) > 1 and lams[1] - lams[0] <= 1e-12


def _cmd_optimize(args: argparse.Namespace) -> int:
    decomp = _load_decomposition(args.kernel)
    seed = args.seed if args.seed is not None else 0
    condition = check_condition(decomp)
    if _spectrum_tied(decomp):
        _warn("degenerate spectrum: eigenvalue tie broken toward the smallest frequency")
    if args.dim == 1:
        search = maximize_fisher_1d(decomp, args.power, audit_trials=args.audit_trials, seed=seed)
        fi_section = {
            "fi_spectral": search.achieved_fi,
            "crb": crb(search.achieved_fi),
            "fi_max_bound": fisher_max_bound(decomp, args.power),
        }
    else:
        if not condition.concentration_valid:
            _warn(
                "spectral orderings disagree; reporting the numerically found optimum "
                "instead of a single-frequency concentration"
            )
        search = maximize_fisher_2d(decomp, args.power, audit_trials=args.audit_trials, seed=seed)
        pop2d = TuningPopulation2D.from_axis(TuningPopulation1D(decomp, search.allocation))
        fi_section = fisher_2d(pop2d, decomp).to_dict()
    payload = {
        "search": search.to_dict(),
        "condition": condition.to_dict(),
        "fisher": fi_section,
        "dim": args.dim,
        "power": args.power,
    }
    out = _resolve(args, args.out)
    rio.write_json(payload, out)
    outputs = [out]
    if args.curves_out is not None:
        curves_out = _resolve(args, args.curves_out)
        pop = TuningPopulation1D(decomp, search.allocation)
        rio.write_curves_csv(
            pop, curves_out, samples=args.curves_samples, offset=args.offset or 0.0
        )
        outputs.append(curves_out)
    _write_manifest(
        args, out, [args.kernel], outputs, {"dim": args.dim, "power": args.power}, seed
    )
    print(rio.dumps_json(payload["search"]))
    return EXIT_OK


def _cmd_fisher(args: argparse.Namespace) -> int:
    decomp = _load_decomposition(args.kernel)
    if args.k is not None:
        _require_paired(decomp, args.k)
        pop = TuningPopulation1D(decomp, PowerAllocation.single(args.k, args.power))
    else:
        pop = optimal_tuning_1d(decomp, args.power)
    report = fisher_report_1d(pop, decomp, theta_samples=args.theta_samples)
    payload = report.to_dict()
    payload["ordering_condition"] = check_condition(decomp).to_dict()
    payload.update({"i_x": None, "i_y": None, "i_xy": None})
    if args.dim == 2:
        pop2d = TuningPopulation2D.from_axis(pop)
        payload.update(fisher_2d(pop2d, decomp).to_dict())
    out = _resolve(args, args.out)
    rio.write_json(payload, out)
    _write_manifest(
        args, out, [args.kernel], [out], {"dim": args.dim, "power": args.power, "k": args.k}, None
    )
    print(rio.dumps_json(payload))
    return EXIT_OK


def _cmd_field2d(args: argparse.Namespace) -> int:
    if not CLI_RESOLUTION_MIN <= args.res <= CLI_RESOLUTION_MAX:
        raise ResolutionOutOfRangeError(
            f"--res {args.res} outside [{CLI_RESOLUTION_MIN}, {CLI_RESOLUTION_MAX}]"
        )
    decomp = _load_decomposition(args.kernel)
    if args.optimal:
        pop2d = optimal_tuning_2d(decomp, args.power, phase_shift=args.phase_shift)
    else:
        _require_paired(decomp, args.k)
        pop = TuningPopulation1D(decomp, PowerAllocation.single(args.k, args.power))
        pop2d = TuningPopulation2D.from_axis(pop, phase_shift=args.phase_shift)
    neuron = tuple(args.neuron)
    if args.offset is None:
        # display default: lift each axis curve to nonnegative rates
        field = sample_firing_field(pop2d, neuron, args.res, nonnegative=True)
    elif args.offset == 0.0:
        field = sample_firing_field(pop2d, neuron, args.res, nonnegative=False)
    else:
        # an explicit offset shifts each axis curve, keeping the field separable
        thetas = TWO_PI * np.arange(args.res) / args.res
        cx = neuron_curve(pop2d.x, neuron[0], thetas) + args.offset
        cy = neuron_curve(pop2d.y, neuron[1], thetas) + args.offset
        field = np.outer(cx, cy)
    out_pgm = _resolve(args, args.out_pgm)
    out_csv = _resolve(args, args.out_csv)
    rio.write_pgm(field, out_pgm)
    rio.write_field_csv(field, out_csv)
    settings = {
        "frequency": args.k,
        "optimal": args.optimal,
        "res": args.res,
        "power": args.power,
        "neuron": list(args.neuron),
        "offset": args.offset,
    }
    _write_manifest(args, out_pgm, [args.kernel], [out_pgm, out_csv], settings, None)
    return EXIT_OK


def load_sim_config(path: Path, seed_override: int | None = None) -> SimConfig:
    """Build a SimConfig from a JSON file mirroring its fields.

    The kernel is given inline under ``kernel`` or by path under
    ``kernel_file`` (relative to the config file). ``allocation`` is either
    the string "optimal" or a list of {frequency, amplitude, phase} entries.
    """
    try:
        definition = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedKernelError(f"cannot read simulation config {path}: {exc}") from exc
    if not isinstance(definition, dict):
        raise MalformedKernelError("simulation config must hold a JSON object")
    if "kernel" in definition:
        kernel = rio.kernel_from_dict(definition["kernel"])
    elif "kernel_file" in definition:
        kernel = rio.load_kernel(Path(path).parent / definition["kernel_file"])
    else:
        raise MalformedKernelError("simulation config needs 'kernel' or 'kernel_file'")
    decomp = decompose(kernel)
    power = float(definition.get("power", 1.0))
    allocation = definition.get("allocation", "optimal")
    if allocation == "optimal":
        pop = optimal_tuning_1d(decomp, power)
    elif isinstance(allocation, list):
        from .tuning import AllocationEntry

        alloc = PowerAllocation(
            entries=tuple(
                AllocationEntry(
                    int(e["frequency"]), float(e["amplitude"]), float(e.get("phase", 0.0))
                )
                for e in allocation
            )
        )
        pop = TuningPopulation1D(decomp, alloc)
    else:
        raise MalformedKernelError(
            "allocation must be 'optimal' or a list of {frequency, amplitude, phase}"
        )
    seed = int(definition.get("seed", 0)) if seed_override is None else seed_override
    return SimConfig(
        population=pop,
        delta_theta=float(definition.get("delta_theta", 1e-3)),
        trials=int(definition.get("trials", 100_000)),
        seed=seed,
        mode=definition.get("mode", "known_reference"),
        estimator=definition.get("estimator", "local_linear"),
        theta0=float(definition.get("theta0", 0.0)),
        noise_scale=float(definition.get("noise_scale", 1.0)),
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        config = load_sim_config(args.config, seed_override=args.seed)
        result, estimates = run_displacement_trials(config, with_estimates=True)
    for w in caught:
        _warn(str(w.message))
    out = _resolve(args, args.out)
    rio.write_json(result.to_dict(), out)
    outputs = [out]
    if args.dump_trials is not None:
        dump = _resolve(args, args.dump_trials)
        with open(dump, "w", newline="") as handle:
            handle.write("trial,estimate\n")
            for i, value in enumerate(estimates):
                handle.write(f"{i},{value!r}\n")
        outputs.append(dump)
    _write_manifest(args, out, [args.config], outputs, {"config": str(args.config)}, config.seed)
    print(rio.dumps_json(result.to_dict()))
    return EXIT_OK


_EXIT_CODE_BY_ERROR: tuple[tuple[type[Exception], int], ...] = (
    (MalformedKernelError, EXIT_MALFORMED_INPUT),
    (NotPositiveSemidefiniteError, EXIT_INVALID_COVARIANCE),
    (SingularCovarianceError, EXIT_INVALID_COVARIANCE),
    (NoPairedModeError, EXIT_INFEASIBLE_OPTIMIZATION),
    (ConditionViolatedError, EXIT_INFEASIBLE_OPTIMIZATION),
    (ResolutionOutOfRangeError, EXIT_BAD_PARAMETER),
    (SizeLimitError, EXIT_BAD_PARAMETER),
    (ParameterRangeError, EXIT_BAD_PARAMETER),
    (MultiModePopulationError, EXIT_SIMULATION_FAILURE),
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_BAD_PARAMETER
    try:
        return args.handler(args)
    except Exception as exc:  # noqa: BLE001 - translated to documented exit codes
        for err_type, code in _EXIT_CODE_BY_ERROR:
            if isinstance(exc, err_type):
                print(f"error: {exc}", file=sys.stderr)
                return code
        if args.command == "simulate" and isinstance(exc, (ValueError, KeyError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SIMULATION_FAILURE
        if isinstance(exc, (ValueError, KeyError, OSError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_MALFORMED_INPUT
        raise


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
