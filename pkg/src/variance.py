"""Mechanical quadrature variances and squeezing figures of merit.

Two routes to (dx)^2 and (dp)^2:

- quadrature: (1/2pi) times the integral of S_xx (or (omega/omega_m)^2 S_xx)
  over the whole real line, done as twice the integral over [0, inf)
- closed form: the quasiresonant residue result, both as printed and
  rescaled by the single constant that restores equipartition at zero
  drive

The standard quantum limit (SQL) is 1/2 per quadrature.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad

from .config import (
    HEISENBERG_BOUND,
    HEISENBERG_TOLERANCE,
    QUADRATURE_RELATIVE_TOLERANCE,
    QUADRATURE_SUBDIVISIONS,
    QUASIRESONANT_DAMPING_RATIO,
    RESOLVED_SIDEBAND_RATIO,
    SQL_VARIANCE,
    THREE_DB_VARIANCE,
)
from .errors import NumericError, StabilityError
from .params import SystemParams, ThermalNoiseMode
from .spectra import SpectralModel, characteristic_roots, effective_dynamics, quasiresonant_dynamics, spectrum_xx

logger = logging.getLogger('optosqueeze')

# Knot offsets around each normal mode, in units of its half-width
KNOT_OFFSETS = (0.5, 2.0, 8.0, 32.0, 128.0, 512.0, 2048.0)
QUADRATURE_ABSOLUTE_TOLERANCE = 1e-13


class VarianceMethod(str, Enum):
    QUADRATURE = "quadrature"
    CLOSED_FORM_AS_PRINTED = "closed-form-as-printed"
    CLOSED_FORM_CALIBRATED = "closed-form-calibrated"


@dataclass(frozen=True)
class VarianceResult:
    """Quadrature variances of one branch, in units where the SQL is 1/2.

    cutoff_dependent marks a momentum variance that only converges because
    the exact thermal spectrum was cut off; quasiresonant_valid is False
    when the closed form is used outside its regime.
    """

    var_x: float
    var_p: float
    method: VarianceMethod
    squeeze_x_db: float
    squeeze_p_db: float
    uncertainty_product: float
    branch_id: int = 0
    heisenberg_ok: bool = True
    cutoff_dependent: bool = False
    quasiresonant_valid: bool = True
    thermal_mode: ThermalNoiseMode = ThermalNoiseMode.FLAT_MARKOVIAN


class SqueezingMetrics(NamedTuple):
    squeeze_x_db: float
    squeeze_p_db: float
    beats_3db: Tuple[bool, bool]


def squeeze_db(variance: float) -> float:
    """Squeezing relative to the SQL in dB, -10 log10(var / 0.5).

    Examples:
        >>> squeeze_db(0.5)
        0.0
        >>> round(squeeze_db(0.25), 4)
        3.0103
    """
    if not variance > 0:
        return math.nan
    return 10.0 * math.log10(SQL_VARIANCE / variance)


def squeezing_metrics(result: VarianceResult) -> SqueezingMetrics:
    """dB below the SQL per quadrature and whether each beats the 3 dB limit (var < 0.25)."""
    return SqueezingMetrics(
        squeeze_x_db=squeeze_db(result.var_x),
        squeeze_p_db=squeeze_db(result.var_p),
        beats_3db=(bool(result.var_x < THREE_DB_VARIANCE), bool(result.var_p < THREE_DB_VARIANCE)),
    )


def variance_quadrature(model: SpectralModel) -> VarianceResult:
    """Integrate the position and momentum spectra.

    The positive half-axis is split at knots placed around every zero of
    D(omega), at the quasiresonance and at the cavity detuning; the tail
    beyond the last knot is mapped with omega = Omega tan(theta). With
    exact thermal noise the momentum integral stops at the model cutoff.

    Raises:
        StabilityError: If the operating point is unstable
        NumericError: If a subinterval fails to converge
    """
    _require_stable(model)

    knots, upper = _quadrature_knots(model)
    scale = model.quasiresonance

    def position(omega: float) -> float:
        return spectrum_xx(model, omega)

    def momentum(omega: float) -> float:
        return (omega / model.omega_m) ** 2 * spectrum_xx(model, omega)

    var_x = _integrate(position, knots, upper, tail_scale=scale) / math.pi

    cutoff_dependent = model.thermal_mode == ThermalNoiseMode.EXACT_COTH
    if cutoff_dependent:
        cutoff = model.cutoff
        p_knots = [k for k in knots if k < cutoff]
        var_p = _integrate(momentum, p_knots, cutoff, tail_scale=None) / math.pi
    else:
        var_p = _integrate(momentum, knots, upper, tail_scale=scale) / math.pi

    logger.debug(f"Quadrature variances branch {model.branch_id}: var_x={var_x:.6e} var_p={var_p:.6e}")
    return _result(var_x, var_p, VarianceMethod.QUADRATURE, model, cutoff_dependent=cutoff_dependent)


def closed_form_calibration(params: Union[SystemParams, SpectralModel]) -> float:
    """Constant that maps the printed closed form onto equipartition at zero drive.

    At zero drive Omega_eff = omega_m and Gamma_eff = gamma_m, the printed
    closed form gives (2 n_th + 1)/4 while equipartition requires
    n_th + 1/2, so the constant is 2 for any bath.
    """
    thermal = params.gamma_m * (2.0 * params.n_th + 1.0)
    printed = params.omega_m ** 2 / (4.0 * params.omega_m ** 2 * params.gamma_m) * thermal
    return (params.n_th + 0.5) / printed


def variance_closed_form(model: SpectralModel) -> Tuple[VarianceResult, VarianceResult]:
    """Quasiresonant closed-form variances, (as printed, calibrated).

    Omega_eff and Gamma_eff are frozen at sqrt(omega_m * omega_m_tilde).
    The thermal spectrum is always the flat one here. Results outside
    Gamma_eff << Omega_eff or outside the resolved-sideband regime are
    flagged, not refused.

    Raises:
        StabilityError: If the operating point is unstable
    """
    _require_stable(model)

    omega_q = model.quasiresonance
    dynamics = effective_dynamics(model, omega_q)
    Omega, Gamma = dynamics.omega_eff, dynamics.gamma_eff

    kappa, Delta = model.kappa, model.Delta_tilde
    lorentzians = (kappa ** 2 + (omega_q - Delta) ** 2) * (kappa ** 2 + (omega_q + Delta) ** 2)
    # (Gamma_eff - gamma_m) / (omega_m Delta_tilde) without dividing by Delta_tilde
    back_action = 4.0 * kappa * model.G_tilde ** 2 * model.intensity / lorentzians
    thermal = model.gamma_m * (2.0 * model.n_th + 1.0)
    cavity = kappa ** 2 + Delta ** 2

    var_x = model.omega_m ** 2 / (4.0 * Omega ** 2 * Gamma) * (thermal + back_action * (cavity + Omega ** 2))
    var_p = 1.0 / (4.0 * Gamma) * (thermal + back_action * (cavity + Omega ** 2 - Gamma ** 2))

    valid = bool(
        not dynamics.imaginary
        and Gamma / Omega < QUASIRESONANT_DAMPING_RATIO
        and kappa / model.omega_m <= RESOLVED_SIDEBAND_RATIO
    )
    if not valid:
        logger.warning(
            f"Closed form outside quasiresonant validity (Gamma/Omega={Gamma / Omega:.3g}, "
            f"kappa/omega_m={kappa / model.omega_m:.3g})"
        )

    constant = closed_form_calibration(model)
    printed = _result(var_x, var_p, VarianceMethod.CLOSED_FORM_AS_PRINTED, model, quasiresonant_valid=valid)
    calibrated = _result(
        constant * var_x, constant * var_p, VarianceMethod.CLOSED_FORM_CALIBRATED, model, quasiresonant_valid=valid
    )
    return printed, calibrated


def dimensional_variances(result: VarianceResult, params: SystemParams) -> Tuple[float, float]:
    """Convert to SI: position variance in m^2 and momentum variance in (kg m/s)^2."""
    return result.var_x * params.x_zpf ** 2, result.var_p * params.p_zpf ** 2


def _require_stable(model: SpectralModel) -> None:
    if not model.stable:
        raise StabilityError(
            f"variance undefined: operating point (branch {model.branch_id}, I={model.intensity:.6e}) is unstable"
        )


def _quadrature_knots(model: SpectralModel) -> Tuple[List[float], float]:
    """Sorted positive knots and the start of the mapped tail."""
    centres = []
    knots = set()
    for root in characteristic_roots(model):
        centre, width = abs(root.real), abs(root.imag)
        centres.append(centre)
        for offset in KNOT_OFFSETS:
            knots.add(centre - offset * width)
            knots.add(centre + offset * width)
        knots.add(centre)

    quasiresonant = quasiresonant_dynamics(model).omega_eff
    if np.isfinite(quasiresonant):
        knots.add(float(quasiresonant))
    knots.add(abs(model.Delta_tilde))

    positive = sorted(k for k in knots if np.isfinite(k) and k > 0)
    upper = max(positive[-1], 2.0 * max(centres), 2.0 * model.omega_m)
    return [k for k in positive if k < upper], upper


def _integrate(
    integrand: Callable[[float], float],
    knots: List[float],
    upper: float,
    tail_scale: Optional[float],
) -> float:
    """Integral over [0, upper] piecewise between knots, plus the mapped tail when tail_scale is set."""
    points = [0.0] + list(knots) + [upper]
    pieces: List[tuple] = []

    for a, b in zip(points[:-1], points[1:]):
        if b <= a:
            continue
        pieces.append(_piece(integrand, a, b))

    if tail_scale is not None:
        scale = tail_scale if np.isfinite(tail_scale) and tail_scale > 0 else upper

        def mapped(theta: float) -> float:
            cos = math.cos(theta)
            return integrand(scale * math.tan(theta)) * scale / (cos * cos)

        value, error, _, converged = _piece(mapped, math.atan(upper / scale), math.pi / 2)
        pieces.append((value, error, (upper, math.inf), converged))

    total = sum(p[0] for p in pieces)
    failed = [p for p in pieces if not p[3] and p[1] > 10.0 * QUADRATURE_RELATIVE_TOLERANCE * abs(total)]
    if failed:
        worst = max(failed, key=lambda p: p[1])
        raise NumericError(f"quadrature did not converge (error estimate {worst[1]:.3e})", interval=worst[2])
    return total


def _piece(integrand: Callable[[float], float], a: float, b: float):
    out = quad(
        integrand,
        a,
        b,
        epsabs=QUADRATURE_ABSOLUTE_TOLERANCE,
        epsrel=QUADRATURE_RELATIVE_TOLERANCE,
        limit=QUADRATURE_SUBDIVISIONS,
        full_output=1,
    )
    value, error = out[0], out[1]
    converged = len(out) < 4
    return value, error, (a, b), converged


def _result(
    var_x: float,
    var_p: float,
    method: VarianceMethod,
    model: SpectralModel,
    cutoff_dependent: bool = False,
    quasiresonant_valid: bool = True,
) -> VarianceResult:
    product = var_x * var_p
    heisenberg_ok = bool(product >= HEISENBERG_BOUND * (1.0 - HEISENBERG_TOLERANCE))
    if not heisenberg_ok:
        logger.warning(
            f"Uncertainty product {product:.6f} below 1/4 ({method.value}, branch {model.branch_id}, "
            f"{model.thermal_mode.value} noise)"
        )
        if model.thermal_mode == ThermalNoiseMode.FLAT_MARKOVIAN and model.quasiresonance > 2.0 * model.omega_m:
            logger.warning(
                f"Flat thermal noise is fixed at omega_m but the resonance sits at "
                f"{model.quasiresonance / model.omega_m:.2f} omega_m; use exact-coth noise here"
            )
    return VarianceResult(
        var_x=float(var_x),
        var_p=float(var_p),
        method=method,
        squeeze_x_db=squeeze_db(var_x),
        squeeze_p_db=squeeze_db(var_p),
        uncertainty_product=float(product),
        branch_id=model.branch_id,
        heisenberg_ok=heisenberg_ok,
        cutoff_dependent=cutoff_dependent,
        quasiresonant_valid=quasiresonant_valid,
        thermal_mode=model.thermal_mode,
    )
