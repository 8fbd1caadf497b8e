"""Self-consistent steady states of the driven cavity and mirror.

The coupled mean-field equations are reduced to one scalar equation in the
intracavity photon number I:

    x_s(I)    = -g_l I / (omega_m + 2 g_q I)
    <x^2>(I)  = g_l^2 I^2 / omega_m_tilde^2 + omega_m (1 + 2 n_th) / omega_m_tilde
    I (kappa^2 + Delta_ss(I)^2) = epsilon^2

Every sign change of that equation on an intensity grid is a branch. Roots
where the spring is inverted (omega_m_tilde <= 0) are kept only as
diagnostics.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .config import (
    INTENSITY_GRID_MAX,
    INTENSITY_GRID_MIN,
    INTENSITY_GRID_POINTS,
    NEWTON_STEPS,
    POLE_GRID_POINTS,
    RESIDUAL_TOLERANCE,
    ROOT_RELATIVE_TOLERANCE,
)
from .errors import InvertedSpringError, NoStableSpringError, NumericError
from .params import DetuningConvention, SystemParams

logger = logging.getLogger('optosqueeze')

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class SteadyState:
    """One self-consistent operating point.

    Frequencies are angular (rad/s); everything else is dimensionless.
    Delta_ss is the detuning inside the field equation, Delta_tilde the one
    entering the fluctuation matrix. They differ only through which
    displacement moment multiplies g_q.
    """

    a_s: complex
    intensity: float
    x_s: float
    x2_s: float
    p2_s: float
    omega_m_tilde: float
    Delta_tilde: float
    Delta_ss: float
    G_tilde: float
    X_s: float
    P_s: float
    p_s: float = 0.0
    xpx_s: float = 0.0
    branch_id: int = 0

    @property
    def I(self) -> float:  # noqa: E743
        return self.intensity


@dataclass(frozen=True)
class SteadyStateSolution:
    """Physical branches sorted by intensity plus the discarded roots.

    rejected holds (I, omega_m_tilde) for every self-consistent root whose
    spring is inverted.
    """

    branches: Tuple[SteadyState, ...]
    rejected: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.branches)

    def __iter__(self):
        return iter(self.branches)


def displacement(params: SystemParams, intensity: ArrayLike) -> ArrayLike:
    """Mean displacement x_s = -g_l I / (omega_m + 2 g_q I)."""
    return -params.g_l * intensity / (params.omega_m + 2.0 * params.g_q * intensity)


def _x2_moment(params: SystemParams, intensity: ArrayLike) -> ArrayLike:
    omega_m_tilde = params.omega_m + 2.0 * params.g_q * intensity
    return (params.g_l * intensity / omega_m_tilde) ** 2 + params.omega_m * (1.0 + 2.0 * params.n_th) / omega_m_tilde


def field_detuning(params: SystemParams, intensity: ArrayLike) -> ArrayLike:
    """Detuning Delta_ss(I) seen by the steady-state field equation."""
    x_s = displacement(params, intensity)
    if params.detuning_convention == DetuningConvention.UNIFIED_XS2:
        moment = x_s ** 2
    else:
        moment = _x2_moment(params, intensity)
    return params.Delta + params.g_l * x_s + params.g_q * moment


def fluctuation_detuning(params: SystemParams, x_s: float, x2_s: float) -> float:
    """Detuning Delta_tilde of the linearized dynamics."""
    if params.detuning_convention == DetuningConvention.UNIFIED_X2S:
        moment = x2_s
    else:
        moment = x_s ** 2
    return params.Delta + params.g_l * x_s + params.g_q * moment


def intensity_residual(params: SystemParams, intensity: ArrayLike) -> ArrayLike:
    """Relative residual I (kappa^2 + Delta_ss^2) / epsilon^2 - 1.

    Zero exactly at self-consistent intensities. Works on scalars and
    numpy arrays; at the spring pole the value is not finite.
    """
    detuning = field_detuning(params, intensity)
    return intensity * (params.kappa ** 2 + detuning ** 2) / params.epsilon ** 2 - 1.0


def intensity_grid(params: SystemParams) -> np.ndarray:
    """Search grid: 0, a geometric sweep and, for g_q < 0, points packed around the pole."""
    grid = [np.zeros(1), np.geomspace(INTENSITY_GRID_MIN, INTENSITY_GRID_MAX, INTENSITY_GRID_POINTS)]
    if params.g_q < 0:
        pole = -params.omega_m / (2.0 * params.g_q)
        offsets = np.geomspace(1e-12, 0.5, POLE_GRID_POINTS)
        grid.append(pole * (1.0 - offsets))
        grid.append(pole * (1.0 + offsets))
    return np.unique(np.concatenate(grid))


def bilinear_steady_state(params: SystemParams, intensity: float, x_s: float) -> Tuple[float, float, float]:
    """Steady-state second moments (<x^2>, <p^2>, <xp+px>).

    Args:
        params: System parameters
        intensity: Photon number I
        x_s: Mean displacement (not needed by the moments; kept so callers
            pass the pair they solved for)

    Raises:
        InvertedSpringError: If omega_m + 2 g_q I <= 0

    Examples:
        >>> from src.params import derive_params, load_preset
        >>> params = derive_params(load_preset())
        >>> x2, p2, xpx = bilinear_steady_state(params, 0.0, 0.0)
        >>> abs(x2 - p2) < 1e-12, p2 == 1 + 2 * params.n_th, xpx
        (True, True, 0.0)
    """
    omega_m_tilde = params.omega_m + 2.0 * params.g_q * intensity
    if not omega_m_tilde > 0:
        raise InvertedSpringError(
            f"effective spring omega_m + 2 g_q I = {omega_m_tilde:.6e} rad/s is not positive at I={intensity:.6e}"
        )
    p2_s = 1.0 + 2.0 * params.n_th
    x2_s = (params.g_l * intensity / omega_m_tilde) ** 2 + params.omega_m * p2_s / omega_m_tilde
    return float(x2_s), p2_s, 0.0


def normalized_spring(params: SystemParams, intensity: ArrayLike) -> ArrayLike:
    """Light-modified spring constant relative to the bare one, 1 + 2 g_q I / omega_m."""
    return 1.0 + 2.0 * params.g_q * intensity / params.omega_m


def find_steady_states(params: SystemParams) -> SteadyStateSolution:
    """Locate every self-consistent root and split physical from rejected ones.

    Never raises for a missing physical root; see solve_steady_state.
    """
    if params.epsilon == 0:
        return SteadyStateSolution(branches=(_build_state(params, 0.0, 0),))

    roots = _bracket_roots(params)
    if not roots:
        raise NumericError(
            f"no self-consistent intensity below {INTENSITY_GRID_MAX:.1e}; drive too strong for the search grid"
        )

    branches: List[SteadyState] = []
    rejected: List[Tuple[float, float]] = []
    for intensity in roots:
        omega_m_tilde = params.omega_m + 2.0 * params.g_q * intensity
        if omega_m_tilde > 0:
            branches.append(_build_state(params, intensity, len(branches)))
        else:
            rejected.append((intensity, omega_m_tilde))

    if rejected:
        logger.warning(f"Rejected {len(rejected)} steady-state root(s) with inverted spring")
    logger.debug(f"Steady states at P={params.power:.3e} W: {[b.intensity for b in branches]}")

    return SteadyStateSolution(branches=tuple(branches), rejected=tuple(rejected))


def solve_steady_state(params: SystemParams) -> List[SteadyState]:
    """Every physical steady-state branch, sorted by intensity.

    Raises:
        NoStableSpringError: If every root has an inverted spring
        NumericError: If a root cannot be polished to the residual tolerance
    """
    solution = find_steady_states(params)
    if not solution.branches:
        raise NoStableSpringError(
            f"no steady state with omega_m_tilde > 0 at P={params.power:.6e} W",
            rejected=solution.rejected,
        )
    return list(solution.branches)


def _bracket_roots(params: SystemParams) -> List[float]:
    grid = intensity_grid(params)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        values = intensity_residual(params, grid)

    def residual(intensity: float) -> float:
        return float(intensity_residual(params, intensity))

    roots: List[float] = []
    for i in range(len(grid) - 1):
        lo, hi = values[i], values[i + 1]
        if not (np.isfinite(lo) and np.isfinite(hi)):
            continue
        if lo == 0.0:
            roots.append(float(grid[i]))
            continue
        if lo * hi > 0 or hi == 0.0:
            continue
        root = brentq(residual, grid[i], grid[i + 1], xtol=1e-300, rtol=ROOT_RELATIVE_TOLERANCE)
        roots.append(_polish(residual, root, grid[i], grid[i + 1]))

    if np.isfinite(values[-1]) and values[-1] == 0.0:
        roots.append(float(grid[-1]))

    for root in roots:
        error = abs(residual(root))
        if not error < RESIDUAL_TOLERANCE:
            raise NumericError(f"steady-state residual {error:.3e} at I={root:.6e} exceeds {RESIDUAL_TOLERANCE:.0e}")
    return roots


def _polish(residual, root: float, lo: float, hi: float) -> float:
    """A few damped Newton steps inside the bracket; keeps the best point."""
    best, best_error = root, abs(residual(root))
    current = root
    for _ in range(NEWTON_STEPS):
        if best_error == 0.0:
            break
        h = max(abs(current), 1e-300) * 1e-7
        slope = (residual(current + h) - residual(current - h)) / (2.0 * h)
        if slope == 0 or not math.isfinite(slope):
            break
        step = -residual(current) / slope
        for _ in range(8):
            candidate = current + step
            if lo <= candidate <= hi and abs(residual(candidate)) < best_error:
                break
            step *= 0.5
        else:
            break
        current = candidate
        best, best_error = current, abs(residual(current))
    return best


def _build_state(params: SystemParams, intensity: float, branch_id: int) -> SteadyState:
    x_s = float(displacement(params, intensity))
    x2_s, p2_s, xpx_s = bilinear_steady_state(params, intensity, x_s)
    if params.detuning_convention == DetuningConvention.UNIFIED_XS2:
        Delta_ss = params.Delta + params.g_l * x_s + params.g_q * x_s ** 2
    else:
        Delta_ss = params.Delta + params.g_l * x_s + params.g_q * x2_s
    a_s = params.epsilon / complex(params.kappa, Delta_ss)

    return SteadyState(
        a_s=a_s,
        intensity=float(intensity),
        x_s=x_s,
        x2_s=x2_s,
        p2_s=p2_s,
        xpx_s=xpx_s,
        omega_m_tilde=params.omega_m + 2.0 * params.g_q * intensity,
        Delta_tilde=fluctuation_detuning(params, x_s, x2_s),
        Delta_ss=Delta_ss,
        G_tilde=params.g_l + 2.0 * params.g_q * x_s,
        X_s=math.sqrt(2.0) * a_s.real,
        P_s=math.sqrt(2.0) * a_s.imag,
        branch_id=branch_id,
    )
