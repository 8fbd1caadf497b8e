"""Command-line front end for optosqueeze.

Subcommands:
    point     single operating point report
    sweep     1D/2D sweep over SystemConfig fields to CSV
    figure    dataset behind one of the four result figures
    spectrum  spectrum table of the selected branch
    presets   list the built-in parameter presets

Exit codes: 0 success, 2 configuration error, 3 no stable branch,
4 numeric failure.
"""

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from src.config import DEFAULT_WORKERS, PRESETS, logger
from src.errors import ConfigurationError, OptomechError
from src.params import (
    THERMAL_MODE_ALIASES,
    DetuningConvention,
    ModelOptions,
    SystemConfig,
    ThermalNoiseMode,
    load_config,
    load_preset,
)
from src.spectra import SpectralModel, spectrum_table
from src.sweep import (
    BRANCH_POLICIES,
    METHODS,
    EvaluationOptions,
    FigureId,
    FigureTask,
    SweepAxis,
    SweepSpec,
    csv_text,
    run_figure,
    run_point,
    run_sweep,
    write_csv,
)
from src.type_safety import parse_choice, parse_float, parse_positive_int
from src.validation import SWEEP_QUANTITIES

EXIT_OK = 0
EXIT_NO_STABLE_BRANCH = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sweep_cli",
        description="Mechanical squeezing with linear and quadratic optomechanical coupling",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat KEY=value config file (layered over its preset)")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--thermal-mode", help="exact-coth or flat")
    common.add_argument("--detuning-convention", choices=[c.value for c in DetuningConvention])

    point = subparsers.add_parser("point", parents=[common], help="evaluate one operating point")
    point.add_argument("--method", default="both", choices=METHODS)

    sweep = subparsers.add_parser("sweep", parents=[common], help="run a parameter sweep")
    sweep.add_argument(
        "--axis",
        action="append",
        required=True,
        help="NAME=START:STOP:POINTS[:log|linear] or NAME=V1,V2,...; give once or twice",
    )
    sweep.add_argument(
        "--quantities",
        default="I,normalized_spring,rh_stable",
        help=f"comma-separated subset of {','.join(SWEEP_QUANTITIES)}",
    )
    sweep.add_argument("--branch-policy", default="all", choices=BRANCH_POLICIES)
    sweep.add_argument("--method", default="quadrature", choices=METHODS)
    sweep.add_argument("--workers", default=str(DEFAULT_WORKERS))

    figure = subparsers.add_parser("figure", parents=[common], help="reproduce a result figure dataset")
    figure.add_argument("figure_id", choices=[f.value for f in FigureId])
    figure.add_argument("--method", default="quadrature", choices=METHODS)
    figure.add_argument("--workers", default=str(DEFAULT_WORKERS))

    spectrum = subparsers.add_parser("spectrum", parents=[common], help="export S_xx/S_pp of the selected branch")
    spectrum.add_argument(
        "--window",
        nargs=2,
        default=("0.5", "1.5"),
        metavar=("LOW", "HIGH"),
        help="frequency window in units of omega_m",
    )
    spectrum.add_argument("--points", default="1001")

    subparsers.add_parser("presets", help="list built-in presets")
    return parser


def resolve_inputs(args: argparse.Namespace) -> Tuple[SystemConfig, ModelOptions]:
    """Config file (or default preset) plus model options, with CLI flags taking precedence."""
    if args.config is not None:
        config, options = load_config(args.config)
    else:
        config, options = load_preset(), ModelOptions()

    changes = {}
    if args.thermal_mode is not None:
        changes["thermal_mode"] = ThermalNoiseMode(
            parse_choice(
                args.thermal_mode, [m.value for m in ThermalNoiseMode], "thermal_mode", aliases=THERMAL_MODE_ALIASES
            )
        )
    if args.detuning_convention is not None:
        changes["detuning_convention"] = DetuningConvention(args.detuning_convention)
    if changes:
        options = dataclasses.replace(options, **changes)
    return config, options


def parse_axis(text: str) -> SweepAxis:
    """Parse NAME=START:STOP:POINTS[:scale] or NAME=V1,V2,...

    Examples:
        >>> parse_axis("input_power=1e-6:1e-3:4:log").values[-1]
        0.001
        >>> parse_axis("quadratic_ratio=-0.01,0,0.01").values
        (-0.01, 0.0, 0.01)
    """
    if "=" not in text:
        raise ConfigurationError(f"axis must look like NAME=START:STOP:POINTS, got {text!r}", field="axis")
    name, spec = (part.strip() for part in text.split("=", 1))

    if "," in spec:
        return SweepAxis.from_values(name, [parse_float(v, name) for v in spec.split(",")])

    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ConfigurationError(f"axis range must be START:STOP:POINTS[:scale], got {spec!r}", field=name)
    scale = parse_choice(parts[3], ("linear", "log"), f"{name} scale") if len(parts) == 4 else "linear"
    return SweepAxis.from_range(
        name, parse_float(parts[0], name), parse_float(parts[1], name), parse_positive_int(parts[2], name), scale
    )


def cmd_point(args: argparse.Namespace) -> int:
    config, model_options = resolve_inputs(args)
    report = run_point(config, EvaluationOptions(model=model_options, method=args.method))
    print(report.to_text())
    if args.out is not None:
        write_csv(report.to_frame(), args.out / "point.csv")
    return EXIT_OK if report.has_stable_branch else EXIT_NO_STABLE_BRANCH


def cmd_sweep(args: argparse.Namespace) -> int:
    config, model_options = resolve_inputs(args)
    if len(args.axis) > 2:
        raise ConfigurationError(f"at most two axes, got {len(args.axis)}", field="axis")
    axes = [parse_axis(text) for text in args.axis]

    spec = SweepSpec(
        axis1=axes[0],
        axis2=axes[1] if len(axes) > 1 else None,
        quantities=tuple(q.strip() for q in args.quantities.split(",") if q.strip()),
        base_config=config,
        options=EvaluationOptions(model=model_options, method=args.method),
        branch_policy=args.branch_policy,
    )
    out_path = args.out / "sweep.csv" if args.out is not None else None
    frame = run_sweep(spec, workers=parse_positive_int(args.workers, "workers"), out_path=out_path)
    if out_path is None:
        print(csv_text(frame), end="")
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    config, model_options = resolve_inputs(args)
    task = FigureTask(
        figure=FigureId(args.figure_id),
        base_config=config,
        options=EvaluationOptions(model=model_options, method=args.method),
    )
    frame = run_figure(task, workers=parse_positive_int(args.workers, "workers"), out_dir=args.out)
    if args.out is None:
        print(csv_text(frame), end="")
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace) -> int:
    config, model_options = resolve_inputs(args)
    report = run_point(config, EvaluationOptions(model=model_options, method="closed-form"))
    if not report.has_stable_branch:
        print(report.to_text())
        return EXIT_NO_STABLE_BRANCH

    branch = report.branches[report.selected]
    model = SpectralModel.from_steady_state(
        report.params,
        branch.steady_state,
        thermal_mode=model_options.thermal_mode,
        cutoff_factor=model_options.cutoff_factor,
        report=branch.stability,
    )
    low, high = (parse_float(v, "window") for v in args.window)
    if not 0 <= low < high:
        raise ConfigurationError(f"window must satisfy 0 <= LOW < HIGH, got {low}, {high}", field="window")
    omegas = np.linspace(low, high, parse_positive_int(args.points, "points")) * report.params.omega_m
    frame = spectrum_table(model, omegas)

    if args.out is not None:
        write_csv(frame, args.out / "spectrum.csv")
    else:
        print(csv_text(frame), end="")
    return EXIT_OK


def cmd_presets(args: argparse.Namespace) -> int:
    for name, values in sorted(PRESETS.items()):
        print(f"[{name}]")
        for key, value in values.items():
            print(f"{key} = {value}")
    return EXIT_OK


COMMANDS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
    "spectrum": cmd_spectrum,
    "presets": cmd_presets,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one CLI command and translate failures into exit codes.

    Args:
        argv: Argument list without the program name (defaults to sys.argv)

    Returns:
        Process exit code: 0 success, 2 configuration error, 3 no stable
        branch (the unstable report is still printed), 4 numeric failure
    """
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except OptomechError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
