"""Linear stability of the fluctuation dynamics.

Fluctuations u = (dx, dp, dX, dP) obey du/dt = M u + noise. The operating
point is stable when every eigenvalue of M has a negative real part. That
verdict is decided twice: by the Routh-Hurwitz inequalities on the
characteristic polynomial

    lambda^4 + (2 kappa + gamma_m) lambda^3 + s1 lambda^2 + s2 lambda + s3

and by a dense eigenvalue solve. All quantities are in rad/s powers.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, eigvals, matrix_balance

from .config import MARGINAL_TOLERANCE
from .errors import NumericError
from .params import SystemParams
from .steady_state import SteadyState

logger = logging.getLogger('optosqueeze')


@dataclass(frozen=True, eq=False)
class DriftMatrix:
    """4x4 real drift matrix over (dx, dp, dX, dP)."""

    entries: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.entries))


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """Routh-Hurwitz quantities and the independent eigenvalue verdict.

    marginal is set when any inequality holds or fails within the relative
    tolerance MARGINAL_TOLERANCE; the two verdicts may then differ.
    """

    s1: float
    s2: float
    s3: float
    cond4: bool
    cond5: bool
    rh_stable: bool
    eigen_stable: bool
    eigenvalues: Tuple[complex, ...]
    marginal: bool = False

    @property
    def stable(self) -> bool:
        return self.rh_stable

    @property
    def agrees(self) -> bool:
        return self.rh_stable == self.eigen_stable


def drift_matrix(params: SystemParams, ss: SteadyState) -> DriftMatrix:
    """Build M from a steady state.

    Examples:
        >>> from src.params import derive_params, load_preset
        >>> from src.steady_state import solve_steady_state
        >>> params = derive_params(load_preset().replace(input_power=0.0))
        >>> m = drift_matrix(params, solve_steady_state(params)[0])
        >>> m.entries[0].tolist() == [0.0, params.omega_m, 0.0, 0.0]
        True
    """
    omega_m = params.omega_m
    G, X, P = ss.G_tilde, ss.X_s, ss.P_s
    D, kappa = ss.Delta_tilde, params.kappa
    entries = np.array(
        [
            [0.0, omega_m, 0.0, 0.0],
            [-ss.omega_m_tilde, -params.gamma_m, -G * X, -G * P],
            [G * P, 0.0, -kappa, D],
            [-G * X, 0.0, -D, -kappa],
        ],
        dtype=float,
    )
    return DriftMatrix(entries)


def characteristic_coefficients(params: SystemParams, ss: SteadyState) -> np.ndarray:
    """Coefficients (1, 2 kappa + gamma_m, s1, s2, s3) of det(lambda - M), highest power first."""
    s1, s2, s3 = _composites(params, ss)
    return np.array([1.0, 2.0 * params.kappa + params.gamma_m, s1, s2, s3])


def eigen_stable(matrix: Union[DriftMatrix, np.ndarray]) -> Tuple[bool, Tuple[complex, ...]]:
    """Eigenvalue verdict: True iff every eigenvalue has a negative real part.

    Eigenvalues are returned sorted by real part (then imaginary part).

    Raises:
        NumericError: If the eigen-solver fails on both the raw and the
            balanced matrix

    Examples:
        >>> eigen_stable(np.diag([-1.0, -2.0, -3.0, -4.0]))[0]
        True
    """
    entries = np.asarray(matrix, dtype=float)
    try:
        values = eigvals(entries)
    except (LinAlgError, ValueError) as e:
        logger.warning(f"Eigen-solver failed ({e}); retrying on the balanced matrix")
        try:
            balanced, _ = matrix_balance(entries)
            values = eigvals(balanced)
        except (LinAlgError, ValueError) as retry_error:
            raise NumericError(f"eigenvalue computation failed: {retry_error}")

    ordered = tuple(complex(v) for v in sorted(values, key=lambda v: (v.real, v.imag)))
    return all(v.real < 0 for v in ordered), ordered


def routh_hurwitz(params: SystemParams, ss: SteadyState) -> StabilityReport:
    """Evaluate the five Routh-Hurwitz conditions and cross-check with eigenvalues.

    cond5 is s1 s2 a1 > s2^2 + a1^2 s3 with a1 = 2 kappa + gamma_m, all in
    rad/s units.
    """
    a1 = 2.0 * params.kappa + params.gamma_m
    s1, s2, s3 = _composites(params, ss)

    cond4 = a1 * s1 > s2
    lhs5, rhs5 = s1 * s2 * a1, s2 ** 2 + a1 ** 2 * s3
    cond5 = lhs5 > rhs5
    rh_stable = bool(s1 > 0 and s2 > 0 and s3 > 0 and cond4 and cond5)

    loading = _loading_terms(params, ss)
    marginal = (
        _near(s1, loading[0])
        or _near(s2, loading[1])
        or _near(s3, loading[2])
        or _near(a1 * s1 - s2, max(abs(a1 * s1), abs(s2)))
        or _near(lhs5 - rhs5, max(abs(lhs5), abs(s2 ** 2), abs(a1 ** 2 * s3)))
    )

    stable, eigenvalues = eigen_stable(drift_matrix(params, ss))

    if marginal:
        logger.warning(f"Marginal stability at I={ss.intensity:.6e}: s=({s1:.3e}, {s2:.3e}, {s3:.3e})")
    elif stable != rh_stable:
        logger.error(
            f"Routh-Hurwitz ({rh_stable}) and eigenvalue ({stable}) verdicts disagree at I={ss.intensity:.6e}"
        )

    return StabilityReport(
        s1=s1,
        s2=s2,
        s3=s3,
        cond4=bool(cond4),
        cond5=bool(cond5),
        rh_stable=rh_stable,
        eigen_stable=stable,
        eigenvalues=eigenvalues,
        marginal=bool(marginal),
    )


def _composites(params: SystemParams, ss: SteadyState) -> Tuple[float, float, float]:
    kappa, gamma_m, omega_m = params.kappa, params.gamma_m, params.omega_m
    cavity = kappa ** 2 + ss.Delta_tilde ** 2
    spring = ss.omega_m_tilde * omega_m
    s1 = cavity + 2.0 * kappa * gamma_m + spring
    s2 = cavity * gamma_m + 2.0 * kappa * spring
    s3 = cavity * spring - ss.Delta_tilde * omega_m * ss.G_tilde ** 2 * (ss.X_s ** 2 + ss.P_s ** 2)
    return s1, s2, s3


def _loading_terms(params: SystemParams, ss: SteadyState) -> Tuple[float, float, float]:
    """Magnitude scale of each composite, for the relative marginal test."""
    kappa, gamma_m, omega_m = params.kappa, params.gamma_m, params.omega_m
    cavity = kappa ** 2 + ss.Delta_tilde ** 2
    spring = abs(ss.omega_m_tilde * omega_m)
    back_action = abs(ss.Delta_tilde * omega_m * ss.G_tilde ** 2 * (ss.X_s ** 2 + ss.P_s ** 2))
    return (
        cavity + 2.0 * kappa * gamma_m + spring,
        cavity * gamma_m + 2.0 * kappa * spring,
        max(cavity * spring, back_action),
    )


def _near(value: float, scale: float) -> bool:
    return abs(value) <= MARGINAL_TOLERANCE * scale
