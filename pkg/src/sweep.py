"""Single-point reports, parameter sweeps and the figure datasets.

Grid points are independent: each one is solved in a worker process and
rows come back in input order. Branch following is done afterwards in
the main process, so the output never depends on the worker count.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import (
    CSV_FLOAT_FORMAT,
    FIGURE_PANEL_RATIOS,
    FIGURE_POWER_POINTS,
    FIGURE_POWER_RANGE_W,
    FIGURE_RATIO_POINTS,
    FIGURE_RATIO_RANGE,
    SQL_VARIANCE,
    logger,
)
from .errors import ConfigurationError, OptomechError
from .params import ModelOptions, SystemConfig, SystemParams, derive_params, load_preset
from .spectra import EffectiveDynamics, SpectralModel, quasiresonant_dynamics
from .stability import StabilityReport, routh_hurwitz
from .steady_state import SteadyState, SteadyStateSolution, find_steady_states, normalized_spring
from .type_safety import parse_choice
from .validation import validate_quantities, validate_sweep_axis
from .variance import VarianceResult, variance_closed_form, variance_quadrature

AXIS_UNITS = {
    "pump_wavelength": "m",
    "mechanical_frequency": "Hz",
    "mechanical_damping": "Hz",
    "cavity_linewidth": "Hz",
    "linear_coupling": "Hz",
    "quadratic_ratio": "",
    "detuning": "rad_s",
    "input_power": "W",
    "bath_temperature": "K",
    "oscillator_mass": "kg",
}

METHODS = ("quadrature", "closed-form", "both")
BRANCH_POLICIES = ("all", "followed")

VARIANCE_QUANTITIES = ("var_x", "var_p", "squeeze_db")


class FigureId(str, Enum):
    SPRING_MAP = "spring-map"
    INTENSITY_STABILITY = "intensity-stability"
    DAMPING_MAP = "damping-map"
    VARIANCE_CURVES = "variance-curves"


@dataclass(frozen=True)
class SweepAxis:
    """A swept SystemConfig field and its grid values, in grid order."""

    name: str
    values: Tuple[float, ...]
    scale: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        validate_sweep_axis(self.name, self.values, self.scale)

    @classmethod
    def from_range(cls, name: str, start: float, stop: float, points: int, scale: str = "linear") -> "SweepAxis":
        if points < 2:
            raise ConfigurationError(f"axis needs at least 2 points, got {points}", field=name)
        if scale == "log":
            if start <= 0 or stop <= 0:
                raise ConfigurationError("log-scaled axis requires positive values", field=name)
            values = np.geomspace(start, stop, points)
        else:
            values = np.linspace(start, stop, points)
        return cls(name, tuple(values), scale)

    @classmethod
    def from_values(cls, name: str, values: Sequence[float]) -> "SweepAxis":
        return cls(name, tuple(values), "linear")

    @property
    def column(self) -> str:
        unit = AXIS_UNITS.get(self.name, "")
        return f"{self.name}_{unit}" if unit else self.name


@dataclass(frozen=True)
class EvaluationOptions:
    model: ModelOptions = field(default_factory=ModelOptions)
    method: str = "quadrature"

    def __post_init__(self):
        object.__setattr__(self, "method", parse_choice(self.method, METHODS, "method"))


@dataclass(frozen=True)
class SweepSpec:
    """One- or two-dimensional sweep over SystemConfig fields.

    axis1 is the outer (slow) index and the continuation direction for
    branch following; axis2, when given, is the inner index.
    """

    axis1: SweepAxis
    quantities: Tuple[str, ...]
    base_config: SystemConfig = field(default_factory=load_preset)
    axis2: Optional[SweepAxis] = None
    options: EvaluationOptions = field(default_factory=EvaluationOptions)
    branch_policy: str = "all"

    def __post_init__(self):
        object.__setattr__(self, "quantities", tuple(validate_quantities(self.quantities)))
        object.__setattr__(
            self, "branch_policy", parse_choice(self.branch_policy, BRANCH_POLICIES, "branch_policy")
        )
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ConfigurationError("both axes sweep the same parameter", field=self.axis2.name)

    @property
    def axes(self) -> Tuple[SweepAxis, ...]:
        return (self.axis1,) if self.axis2 is None else (self.axis1, self.axis2)

    @property
    def grid_size(self) -> int:
        size = len(self.axis1.values)
        return size * len(self.axis2.values) if self.axis2 is not None else size

    def grid(self) -> List[Dict[str, float]]:
        """Grid points as config overrides, axis1 outer."""
        axes = self.axes
        return [dict(zip([a.name for a in axes], point)) for point in product(*[a.values for a in axes])]

    def columns(self) -> List[str]:
        columns = [axis.column for axis in self.axes]
        columns += ["branch_id", "n_branches", "followed", "fold", "rh_stable", "marginal"]
        for quantity in self.quantities:
            if quantity == "rh_stable":
                continue
            columns.extend(QUANTITY_COLUMNS[quantity])
        if _wants_variance(self.quantities):
            columns.append("heisenberg_ok")
            if self.options.method == "both":
                columns += ["var_x_closed_form", "var_p_closed_form"]
        columns.append("error")
        return columns


QUANTITY_COLUMNS = {
    "I": ["I"],
    "normalized_spring": ["normalized_spring"],
    "gamma_eff_ratio": ["gamma_eff_ratio"],
    "omega_eff": ["omega_eff_rad_s"],
    "var_x": ["var_x"],
    "var_p": ["var_p"],
    "squeeze_db": ["squeeze_x_db", "squeeze_p_db"],
}


@dataclass(frozen=True)
class FigureTask:
    """One of the four published result figures as a preset sweep.

    The paper2017 preset is the base unless base_config is given.
    """

    figure: FigureId
    base_config: SystemConfig = field(default_factory=load_preset)
    options: EvaluationOptions = field(default_factory=EvaluationOptions)
    power_points: int = FIGURE_POWER_POINTS
    ratio_points: int = FIGURE_RATIO_POINTS

    def __post_init__(self):
        try:
            object.__setattr__(self, "figure", FigureId(self.figure))
        except ValueError:
            choices = ", ".join(f.value for f in FigureId)
            raise ConfigurationError(f"unknown figure, expected one of {choices}", field=str(self.figure))

    def to_sweep_spec(self) -> SweepSpec:
        power = SweepAxis.from_range("input_power", *FIGURE_POWER_RANGE_W, self.power_points, "log")
        ratio_map = SweepAxis.from_range("quadratic_ratio", *FIGURE_RATIO_RANGE, self.ratio_points, "linear")
        panels = SweepAxis.from_values("quadratic_ratio", FIGURE_PANEL_RATIOS)

        layout = {
            FigureId.SPRING_MAP: (ratio_map, ("I", "normalized_spring")),
            FigureId.INTENSITY_STABILITY: (panels, ("I", "rh_stable")),
            FigureId.DAMPING_MAP: (ratio_map, ("I", "gamma_eff_ratio")),
            FigureId.VARIANCE_CURVES: (panels, ("I", "var_x", "var_p", "squeeze_db")),
        }
        axis2, quantities = layout[self.figure]
        return SweepSpec(
            axis1=power,
            axis2=axis2,
            quantities=quantities,
            base_config=self.base_config,
            options=self.options,
        )


@dataclass(frozen=True)
class BranchReport:
    steady_state: SteadyState
    stability: StabilityReport
    dynamics: EffectiveDynamics
    variances: Tuple[VarianceResult, ...] = ()
    error: str = ""


@dataclass(frozen=True)
class PointReport:
    """Everything known about one operating point.

    selected is the index of the lowest-intensity stable branch (the one
    connected to I = 0), or None when no branch is stable.
    """

    config: SystemConfig
    params: SystemParams
    solution: SteadyStateSolution
    branches: Tuple[BranchReport, ...]
    selected: Optional[int]

    @property
    def has_stable_branch(self) -> bool:
        return self.selected is not None

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for report in self.branches:
            ss, stability = report.steady_state, report.stability
            row = {
                "branch_id": ss.branch_id,
                "selected": ss.branch_id == self.selected,
                "I": ss.intensity,
                "x_s": ss.x_s,
                "omega_m_tilde_rad_s": ss.omega_m_tilde,
                "normalized_spring": normalized_spring(self.params, ss.intensity),
                "Delta_tilde_rad_s": ss.Delta_tilde,
                "G_tilde_rad_s": ss.G_tilde,
                "s1": stability.s1,
                "s2": stability.s2,
                "s3": stability.s3,
                "cond4": stability.cond4,
                "cond5": stability.cond5,
                "rh_stable": stability.rh_stable,
                "eigen_stable": stability.eigen_stable,
                "marginal": stability.marginal,
                "omega_eff_rad_s": report.dynamics.omega_eff,
                "gamma_eff_rad_s": report.dynamics.gamma_eff,
            }
            for result in report.variances:
                suffix = result.method.value.replace("-", "_")
                row[f"var_x_{suffix}"] = result.var_x
                row[f"var_p_{suffix}"] = result.var_p
                row[f"uncertainty_product_{suffix}"] = result.uncertainty_product
                row[f"heisenberg_ok_{suffix}"] = result.heisenberg_ok
            row["error"] = report.error
            rows.append(row)
        return pd.DataFrame(rows)

    def to_text(self) -> str:
        lines = [
            f"input_power_W = {self.config.input_power:.6e}",
            f"quadratic_ratio = {self.config.quadratic_ratio:.6e}",
            f"n_th = {self.params.n_th:.6f}",
            f"branches = {len(self.branches)}",
        ]
        for intensity, omega_m_tilde in self.solution.rejected:
            lines.append(f"rejected root: I = {intensity:.6e} (omega_m_tilde = {omega_m_tilde:.6e} rad/s)")
        for report in self.branches:
            ss, stability = report.steady_state, report.stability
            marker = " [selected]" if ss.branch_id == self.selected else ""
            lines.append(f"branch {ss.branch_id}{marker}:")
            lines.append(f"  I = {ss.intensity:.6e}, x_s = {ss.x_s:.6e}")
            lines.append(
                f"  omega_m_tilde/omega_m = {normalized_spring(self.params, ss.intensity):.6f}, "
                f"Delta_tilde = {ss.Delta_tilde:.6e} rad/s, G_tilde = {ss.G_tilde:.6e} rad/s"
            )
            lines.append(
                f"  s1 = {stability.s1:.6e}, s2 = {stability.s2:.6e}, s3 = {stability.s3:.6e}, "
                f"cond4 = {stability.cond4}, cond5 = {stability.cond5}"
            )
            lines.append(
                f"  rh_stable = {stability.rh_stable}, eigen_stable = {stability.eigen_stable}, "
                f"marginal = {stability.marginal}"
            )
            lines.append(
                f"  Omega_eff = {report.dynamics.omega_eff:.6e} rad/s, "
                f"Gamma_eff/gamma_m = {report.dynamics.gamma_eff / self.params.gamma_m:.6e}"
            )
            for result in report.variances:
                lines.append(
                    f"  {result.method.value}: var_x = {result.var_x:.6e} ({result.squeeze_x_db:.3f} dB), "
                    f"var_p = {result.var_p:.6e} ({result.squeeze_p_db:.3f} dB), "
                    f"product = {result.uncertainty_product:.6f}, heisenberg_ok = {result.heisenberg_ok}"
                )
            if report.error:
                lines.append(f"  error: {report.error}")
        return "\n".join(lines)


def run_point(config: SystemConfig, options: Optional[EvaluationOptions] = None) -> PointReport:
    """Solve, classify and, for the selected branch, compute the variances.

    Never raises for an unstable or spring-inverted point; those are part
    of the report. Configuration errors still raise.
    """
    options = options or EvaluationOptions(method="both")
    params = derive_params(config, options.model.detuning_convention)
    solution = find_steady_states(params)

    analysed = []
    for ss in solution.branches:
        stability = routh_hurwitz(params, ss)
        model = _spectral_model(params, ss, stability, options)
        analysed.append((ss, stability, model, quasiresonant_dynamics(model)))

    selected = next((ss.branch_id for ss, stability, _, _ in analysed if stability.rh_stable), None)

    branches = []
    for ss, stability, model, dynamics in analysed:
        variances: Tuple[VarianceResult, ...] = ()
        error = ""
        if ss.branch_id == selected:
            try:
                variances = _variances(model, options.method, include_printed=True)
            except OptomechError as e:
                logger.error(f"Variance failed on branch {ss.branch_id}: {e}")
                error = str(e)
        branches.append(BranchReport(ss, stability, dynamics, variances, error))

    if selected is None:
        logger.warning(f"No stable branch at P={config.input_power:.6e} W")
    return PointReport(config, params, solution, tuple(branches), selected)


def run_sweep(
    spec: SweepSpec,
    workers: int = 1,
    out_path: Optional[Union[str, Path]] = None,
) -> pd.DataFrame:
    """Evaluate a sweep into a table, one row per grid point per branch.

    Args:
        spec: Sweep definition
        workers: Process count; 1 evaluates in this process
        out_path: Optional CSV destination

    Returns:
        DataFrame with spec.columns(), rows in grid order then branch order
    """
    grid = spec.grid()
    tasks = [(spec, overrides) for overrides in grid]
    logger.info(f"Running sweep over {len(grid)} grid points with {workers} worker(s)")

    if workers > 1 and len(tasks) > 1:
        chunksize = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_evaluate_grid_point, tasks, chunksize=chunksize))
    else:
        results = [_evaluate_grid_point(task) for task in tasks]

    _follow_branches(spec, grid, results)

    rows = [row for point_rows in results for row in point_rows]
    if spec.branch_policy == "followed":
        rows = [row for row in rows if row["followed"] or row["n_branches"] == 0]

    frame = pd.DataFrame(rows, columns=spec.columns())
    frame["branch_id"] = frame["branch_id"].astype("Int64")
    failures = int((frame["error"] != "").sum()) if len(frame) else 0
    if failures:
        logger.warning(f"{failures} sweep row(s) carry errors")

    if out_path is not None:
        write_csv(frame, out_path)
    return frame


def run_figure(
    task: FigureTask,
    workers: int = 1,
    out_dir: Optional[Union[str, Path]] = None,
) -> pd.DataFrame:
    """Build the dataset behind one figure; written to <out_dir>/<figure-id>.csv when out_dir is set."""
    frame = run_sweep(task.to_sweep_spec(), workers=workers)
    if task.figure == FigureId.VARIANCE_CURVES:
        frame.insert(len(frame.columns) - 1, "sql", SQL_VARIANCE)
    if out_dir is not None:
        write_csv(frame, Path(out_dir) / f"{task.figure.value}.csv")
    return frame


def csv_text(frame: pd.DataFrame) -> str:
    """Deterministic CSV: fixed float format, empty cells for missing values."""
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, na_rep="", lineterminator="\n")


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(frame), encoding="utf-8")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _evaluate_grid_point(task: Tuple[SweepSpec, Dict[str, float]]) -> List[Dict[str, Any]]:
    """Rows for one grid point; failures become a single row with the error text."""
    spec, overrides = task
    axis_values = {axis.column: overrides[axis.name] for axis in spec.axes}
    try:
        config = spec.base_config.replace(**overrides)
        params = derive_params(config, spec.options.model.detuning_convention)
        solution = find_steady_states(params)
        if not solution.branches:
            rejected = ", ".join(f"I={i:.6e}" for i, _ in solution.rejected)
            return [_empty_row(axis_values, f"no physical steady state (rejected {rejected})")]
        return [
            _branch_row(spec, params, ss, axis_values, len(solution.branches)) for ss in solution.branches
        ]
    except Exception as e:
        logger.error(f"Sweep point {overrides} failed: {e}")
        return [_empty_row(axis_values, str(e))]


def _branch_row(
    spec: SweepSpec,
    params: SystemParams,
    ss: SteadyState,
    axis_values: Dict[str, float],
    n_branches: int,
) -> Dict[str, Any]:
    row: Dict[str, Any] = dict(axis_values)
    stability = routh_hurwitz(params, ss)
    row.update(
        branch_id=ss.branch_id,
        n_branches=n_branches,
        followed=False,
        fold=False,
        rh_stable=stability.rh_stable,
        marginal=stability.marginal,
        error="",
        _intensity=ss.intensity,
    )

    quantities = spec.quantities
    if "I" in quantities:
        row["I"] = ss.intensity
    if "normalized_spring" in quantities:
        row["normalized_spring"] = normalized_spring(params, ss.intensity)

    model = _spectral_model(params, ss, stability, spec.options)
    if "gamma_eff_ratio" in quantities or "omega_eff" in quantities:
        dynamics = quasiresonant_dynamics(model)
        row["gamma_eff_ratio"] = dynamics.gamma_eff / params.gamma_m
        row["omega_eff_rad_s"] = dynamics.omega_eff

    if _wants_variance(quantities) and stability.rh_stable:
        try:
            results = _variances(model, spec.options.method, include_printed=False)
        except OptomechError as e:
            row["error"] = str(e)
        else:
            primary = results[0]
            row["var_x"], row["var_p"] = primary.var_x, primary.var_p
            row["heisenberg_ok"] = primary.heisenberg_ok
            # no squeezing is claimed where the uncertainty product is unphysical
            if primary.heisenberg_ok:
                row["squeeze_x_db"], row["squeeze_p_db"] = primary.squeeze_x_db, primary.squeeze_p_db
            else:
                row["squeeze_x_db"] = row["squeeze_p_db"] = math.nan
            if len(results) > 1:
                row["var_x_closed_form"], row["var_p_closed_form"] = results[1].var_x, results[1].var_p
    return row


def _empty_row(axis_values: Dict[str, float], error: str) -> Dict[str, Any]:
    row: Dict[str, Any] = dict(axis_values)
    row.update(branch_id=None, n_branches=0, followed=False, fold=False, rh_stable=None, marginal=None, error=error)
    return row


def _spectral_model(
    params: SystemParams, ss: SteadyState, stability: StabilityReport, options: EvaluationOptions
) -> SpectralModel:
    return SpectralModel.from_steady_state(
        params,
        ss,
        thermal_mode=options.model.thermal_mode,
        cutoff_factor=options.model.cutoff_factor,
        report=stability,
    )


def _variances(model: SpectralModel, method: str, include_printed: bool) -> Tuple[VarianceResult, ...]:
    """Variance results in column order: quadrature first, then the closed forms."""
    results: List[VarianceResult] = []
    if method in ("quadrature", "both"):
        results.append(variance_quadrature(model))
    if method in ("closed-form", "both"):
        printed, calibrated = variance_closed_form(model)
        results.append(calibrated)
        if include_printed:
            results.append(printed)
    return tuple(results)


def _wants_variance(quantities: Sequence[str]) -> bool:
    return any(q in VARIANCE_QUANTITIES for q in quantities)


def _follow_branches(spec: SweepSpec, grid: List[Dict[str, float]], results: List[List[Dict[str, Any]]]) -> None:
    """Mark the followed branch and fold rows, continuing along axis1.

    Each fixed value of axis2 is its own continuation line. The line starts
    on the lowest-intensity branch and at every later point takes the
    branch whose intensity is closest in log scale to the previous one. A
    point whose branch count differs from its predecessor is a fold.
    """
    lines: Dict[Any, List[int]] = {}
    for index, overrides in enumerate(grid):
        key = overrides[spec.axis2.name] if spec.axis2 is not None else None
        lines.setdefault(key, []).append(index)

    for indices in lines.values():
        previous_intensity: Optional[float] = None
        previous_count: Optional[int] = None
        for index in indices:
            rows = results[index]
            count = rows[0]["n_branches"]
            if previous_count is not None and count != previous_count:
                for row in rows:
                    row["fold"] = True
            previous_count = count
            if count == 0:
                continue

            intensities = [row["_intensity"] for row in rows]
            if previous_intensity is None:
                choice = 0
            else:
                choice = min(range(len(rows)), key=lambda k: _log_distance(intensities[k], previous_intensity))
            rows[choice]["followed"] = True
            previous_intensity = intensities[choice]


def _log_distance(a: float, b: float) -> float:
    return abs(math.log1p(a) - math.log1p(b))
