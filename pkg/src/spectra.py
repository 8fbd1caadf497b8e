"""Frequency-domain fluctuation spectra of the mechanical oscillator.

All functions accept a scalar angular frequency or a numpy array and
return the same shape. Formulas use plain arithmetic so a scalar call
stays on Python floats, which keeps adaptive quadrature fast.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd
from numpy.polynomial import Polynomial

from .config import DEFAULT_CUTOFF_FACTOR, HBAR, K_B
from .errors import PoleError
from .params import SystemParams, ThermalNoiseMode
from .stability import StabilityReport, routh_hurwitz
from .steady_state import SteadyState

logger = logging.getLogger('optosqueeze')

Frequency = Union[float, np.ndarray]

SPECTRUM_COLUMNS = [
    "omega_rad_s",
    "s_xx",
    "s_pp",
    "s_th",
    "s_rp",
    "re_chi",
    "im_chi",
    "omega_eff",
    "gamma_eff",
]


@dataclass(frozen=True)
class SpectralModel:
    """Steady-state context and bath constants needed by the spectra.

    Built from one physical SteadyState branch. stable carries the
    Routh-Hurwitz verdict of that branch.
    """

    omega_m: float
    omega_m_tilde: float
    gamma_m: float
    kappa: float
    Delta_tilde: float
    G_tilde: float
    intensity: float
    a_s: complex
    X_s: float
    P_s: float
    n_th: float
    temperature: float
    thermal_mode: ThermalNoiseMode = ThermalNoiseMode.FLAT_MARKOVIAN
    cutoff_factor: float = DEFAULT_CUTOFF_FACTOR
    stable: bool = True
    branch_id: int = 0

    @classmethod
    def from_steady_state(
        cls,
        params: SystemParams,
        ss: SteadyState,
        thermal_mode: ThermalNoiseMode = ThermalNoiseMode.FLAT_MARKOVIAN,
        cutoff_factor: float = DEFAULT_CUTOFF_FACTOR,
        report: Optional[StabilityReport] = None,
    ) -> "SpectralModel":
        if report is None:
            report = routh_hurwitz(params, ss)
        return cls(
            omega_m=params.omega_m,
            omega_m_tilde=ss.omega_m_tilde,
            gamma_m=params.gamma_m,
            kappa=params.kappa,
            Delta_tilde=ss.Delta_tilde,
            G_tilde=ss.G_tilde,
            intensity=ss.intensity,
            a_s=ss.a_s,
            X_s=ss.X_s,
            P_s=ss.P_s,
            n_th=params.n_th,
            temperature=params.temperature,
            thermal_mode=ThermalNoiseMode(thermal_mode),
            cutoff_factor=cutoff_factor,
            stable=report.rh_stable,
            branch_id=ss.branch_id,
        )

    @property
    def quasiresonance(self) -> float:
        """Light-modified resonance sqrt(omega_m * omega_m_tilde) in rad/s."""
        return math.sqrt(self.omega_m * self.omega_m_tilde)

    @property
    def cutoff(self) -> float:
        return self.cutoff_factor * self.omega_m

    @property
    def back_action(self) -> float:
        """2 G~^2 I Delta~ omega_m, the optical term of the susceptibility."""
        return 2.0 * self.G_tilde ** 2 * self.intensity * self.Delta_tilde * self.omega_m


class EffectiveDynamics(NamedTuple):
    omega_eff: Frequency
    gamma_eff: Frequency
    imaginary: bool = False


@dataclass(frozen=True)
class SpectrumPoint:
    omega: float
    chi_eff: complex
    s_th: float
    s_rp: float
    s_xx: float
    s_pp: float
    omega_eff: float
    gamma_eff: float


def transfer_coefficients(model: SpectralModel, omega: Frequency) -> Tuple:
    """Coefficients (D, X_a, X_adag, X_xi) of the solved fluctuation equations.

    D is the characteristic function whose zeros are the normal modes;
    X_adag(omega) is the complex conjugate of X_a(-omega).
    """
    kappa, Delta = model.kappa, model.Delta_tilde
    cavity = (kappa - 1j * omega) ** 2 + Delta ** 2
    mechanics = omega ** 2 + 1j * model.gamma_m * omega - model.omega_m * model.omega_m_tilde
    D = cavity * mechanics + model.back_action

    scale = math.sqrt(2.0 * kappa) * model.omega_m * model.G_tilde
    X_a = scale * model.a_s.conjugate() * (kappa - 1j * omega - 1j * Delta)
    X_adag = scale * model.a_s * (kappa - 1j * omega + 1j * Delta)
    X_xi = model.omega_m * cavity
    return D, X_a, X_adag, X_xi


def chi_eff(model: SpectralModel, omega: Frequency) -> Union[complex, np.ndarray]:
    """Effective mechanical susceptibility including the optical spring and damping.

    Raises:
        PoleError: If omega sits exactly on a real pole
    """
    cavity = (model.kappa - 1j * omega) ** 2 + model.Delta_tilde ** 2
    inverse = (
        model.omega_m * model.omega_m_tilde - omega ** 2 - 1j * model.gamma_m * omega
    ) - model.back_action / cavity
    if np.any(inverse == 0):
        raise PoleError(f"susceptibility evaluated on a real pole (omega={omega})")
    return model.omega_m / inverse


def bare_susceptibility(omega_m: float, gamma_m: float, omega: Frequency) -> Union[complex, np.ndarray]:
    """Brownian-oscillator susceptibility omega_m / (omega_m^2 - omega^2 - i gamma_m omega)."""
    return omega_m / (omega_m ** 2 - omega ** 2 - 1j * gamma_m * omega)


def thermal_spectrum(model: SpectralModel, omega: Frequency) -> Frequency:
    """Thermal force spectrum in the model's noise mode.

    The exact form (omega gamma_m / omega_m) coth(hbar omega / 2 k_B T) is
    replaced at omega = 0 by its limit 2 gamma_m k_B T / (hbar omega_m).
    """
    if model.thermal_mode == ThermalNoiseMode.FLAT_MARKOVIAN:
        flat = model.gamma_m * (2.0 * model.n_th + 1.0)
        return flat if np.ndim(omega) == 0 else np.full(np.shape(omega), flat)

    limit = 2.0 * model.gamma_m * K_B * model.temperature / (HBAR * model.omega_m)
    if np.ndim(omega) == 0:
        if omega == 0:
            return limit
        return omega * model.gamma_m / model.omega_m / math.tanh(HBAR * omega / (2.0 * K_B * model.temperature))

    omega = np.asarray(omega, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = omega * model.gamma_m / model.omega_m / np.tanh(HBAR * omega / (2.0 * K_B * model.temperature))
    return np.where(omega == 0, limit, exact)


def radiation_pressure_spectrum(model: SpectralModel, omega: Frequency) -> Frequency:
    kappa, Delta = model.kappa, model.Delta_tilde
    lorentzians = (kappa ** 2 + (omega - Delta) ** 2) * (kappa ** 2 + (omega + Delta) ** 2)
    return 2.0 * model.G_tilde ** 2 * model.intensity * kappa * (kappa ** 2 + omega ** 2 + Delta ** 2) / lorentzians


def noise_spectra(model: SpectralModel, omega: Frequency) -> Tuple[Frequency, Frequency]:
    """Thermal and radiation-pressure noise densities (s_th, s_rp)."""
    return thermal_spectrum(model, omega), radiation_pressure_spectrum(model, omega)


def effective_dynamics(model: SpectralModel, omega: Frequency) -> EffectiveDynamics:
    """Optical-spring frequency Omega_eff(omega) and damping Gamma_eff(omega).

    A negative spring bracket gives NaN for Omega_eff and imaginary=True;
    it is logged rather than raised so sweep maps stay complete.
    """
    kappa, Delta = model.kappa, model.Delta_tilde
    lorentzians = (kappa ** 2 + (omega - Delta) ** 2) * (kappa ** 2 + (omega + Delta) ** 2)
    bracket = model.omega_m * model.omega_m_tilde - model.back_action * (kappa ** 2 - omega ** 2 + Delta ** 2) / lorentzians
    gamma_eff = model.gamma_m + 2.0 * kappa * model.back_action / lorentzians

    imaginary = bool(np.any(bracket < 0))
    if imaginary:
        logger.warning("Optical spring bracket is negative: effective frequency is imaginary")
    if np.ndim(bracket) == 0:
        omega_eff = math.sqrt(bracket) if bracket >= 0 else math.nan
    else:
        omega_eff = np.sqrt(np.where(bracket >= 0, bracket, np.nan))
    return EffectiveDynamics(omega_eff, gamma_eff, imaginary)


def quasiresonant_dynamics(model: SpectralModel) -> EffectiveDynamics:
    """Effective dynamics at the quasiresonance sqrt(omega_m * omega_m_tilde)."""
    return effective_dynamics(model, model.quasiresonance)


def spectrum_xx(model: SpectralModel, omega: Frequency) -> Frequency:
    """Symmetrized position spectrum |chi_eff|^2 (s_th + s_rp)."""
    chi = chi_eff(model, omega)
    s_th, s_rp = noise_spectra(model, omega)
    return (chi.real ** 2 + chi.imag ** 2) * (s_th + s_rp)


def spectrum_pp(model: SpectralModel, omega: Frequency) -> Frequency:
    """Momentum spectrum (omega / omega_m)^2 S_xx."""
    return (omega / model.omega_m) ** 2 * spectrum_xx(model, omega)


def characteristic_roots(model: SpectralModel) -> np.ndarray:
    """The four zeros of D(omega), sorted by imaginary then real part.

    D is expanded as a polynomial in nu = omega / omega_m so the
    coefficients stay of order one.
    """
    w = model.omega_m
    kappa, Delta = model.kappa / w, model.Delta_tilde / w
    cavity = Polynomial([kappa ** 2 + Delta ** 2, -2j * kappa, -1.0])
    mechanics = Polynomial([-model.omega_m_tilde / w, 1j * model.gamma_m / w, 1.0])
    D = cavity * mechanics + model.back_action / w ** 4
    roots = D.roots() * w
    return np.array(sorted(roots, key=lambda r: (r.imag, r.real)))


def spectrum_point(model: SpectralModel, omega: float) -> SpectrumPoint:
    chi = chi_eff(model, omega)
    s_th, s_rp = noise_spectra(model, omega)
    s_xx = (chi.real ** 2 + chi.imag ** 2) * (s_th + s_rp)
    dynamics = effective_dynamics(model, omega)
    return SpectrumPoint(
        omega=float(omega),
        chi_eff=complex(chi),
        s_th=float(s_th),
        s_rp=float(s_rp),
        s_xx=float(s_xx),
        s_pp=float((omega / model.omega_m) ** 2 * s_xx),
        omega_eff=float(dynamics.omega_eff),
        gamma_eff=float(dynamics.gamma_eff),
    )


def spectrum_table(model: SpectralModel, omegas) -> pd.DataFrame:
    """Spectrum export table with one row per frequency, in rad/s."""
    omegas = np.asarray(omegas, dtype=float)
    chi = chi_eff(model, omegas)
    s_th, s_rp = noise_spectra(model, omegas)
    s_xx = np.abs(chi) ** 2 * (s_th + s_rp)
    dynamics = effective_dynamics(model, omegas)
    return pd.DataFrame(
        {
            "omega_rad_s": omegas,
            "s_xx": s_xx,
            "s_pp": (omegas / model.omega_m) ** 2 * s_xx,
            "s_th": s_th,
            "s_rp": s_rp,
            "re_chi": chi.real,
            "im_chi": chi.imag,
            "omega_eff": dynamics.omega_eff,
            "gamma_eff": dynamics.gamma_eff,
        },
        columns=SPECTRUM_COLUMNS,
    )
