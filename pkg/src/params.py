"""Experimental parameters and the derived angular-frequency parameter set.

Users describe the system the way experiments are tabulated (frequencies
divided by 2pi, power in watts, wavelength in metres). Everything
downstream works in rad/s with dimensionless quadratures; this module is
the only place where that conversion happens.
"""

import dataclasses
import io
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from dotenv.parser import parse_stream

from .config import (
    DEFAULT_CUTOFF_FACTOR,
    DEFAULT_PRESET,
    HBAR,
    K_B,
    MAX_SUPPORTED_QUADRATIC_RATIO,
    MAX_THERMAL_PHOTONS,
    PRESETS,
    SPEED_OF_LIGHT,
    TWO_PI,
    logger,
)
from .errors import ConfigurationError
from .type_safety import (
    DETUNING_SYMBOL,
    parse_choice,
    parse_detuning,
    parse_float,
    validate_non_negative,
    validate_positive_number,
)
from .validation import SYSTEM_CONFIG_FIELDS, validate_config_mapping

_POSITIVE_FIELDS = (
    "pump_wavelength",
    "mechanical_frequency",
    "mechanical_damping",
    "cavity_linewidth",
    "linear_coupling",
    "bath_temperature",
    "oscillator_mass",
)


class DetuningConvention(str, Enum):
    """Which displacement moment shifts the cavity detuning.

    AS_PRINTED: field equation uses g_q <x^2>, fluctuation matrix uses g_q x_s^2.
    UNIFIED_XS2: both use g_q x_s^2.
    UNIFIED_X2S: both use g_q <x^2>.
    """

    AS_PRINTED = "as-printed"
    UNIFIED_XS2 = "unified-xs2"
    UNIFIED_X2S = "unified-x2s"


class ThermalNoiseMode(str, Enum):
    """Thermal force spectrum: full quantum coth form or its flat high-T limit."""

    EXACT_COTH = "exact-coth"
    FLAT_MARKOVIAN = "flat-markovian"


THERMAL_MODE_ALIASES = {"flat": ThermalNoiseMode.FLAT_MARKOVIAN.value, "coth": ThermalNoiseMode.EXACT_COTH.value}


@dataclass(frozen=True)
class SystemConfig:
    """User-facing experimental parameters.

    Units: pump_wavelength m; mechanical_frequency, mechanical_damping,
    cavity_linewidth, linear_coupling in Hz (ordinary frequency, i.e. the
    angular value divided by 2pi); quadratic_ratio g_q/g_l dimensionless;
    detuning rad/s or the symbol "omega_m"; input_power W;
    bath_temperature K; oscillator_mass kg.
    """

    pump_wavelength: float
    mechanical_frequency: float
    mechanical_damping: float
    cavity_linewidth: float
    linear_coupling: float
    quadratic_ratio: float
    detuning: Union[float, str]
    input_power: float
    bath_temperature: float
    oscillator_mass: float

    def __post_init__(self):
        # frozen dataclass: coerce in place so string inputs end up as floats
        for name in _POSITIVE_FIELDS:
            object.__setattr__(self, name, validate_positive_number(parse_float(getattr(self, name), name), name))
        object.__setattr__(
            self, "input_power", validate_non_negative(parse_float(self.input_power, "input_power"), "input_power")
        )
        object.__setattr__(self, "quadratic_ratio", parse_float(self.quadratic_ratio, "quadratic_ratio"))
        object.__setattr__(self, "detuning", parse_detuning(self.detuning))

        if abs(self.quadratic_ratio) > MAX_SUPPORTED_QUADRATIC_RATIO:
            logger.warning(
                f"|g_q/g_l| = {abs(self.quadratic_ratio):.3g} exceeds {MAX_SUPPORTED_QUADRATIC_RATIO}; "
                "results leave the residual-QOC regime"
            )

    @classmethod
    def from_mapping(
        cls,
        data: Mapping[str, Any],
        lines: Optional[Mapping[str, int]] = None,
    ) -> "SystemConfig":
        """Build a config from a flat mapping layered over a preset.

        The preset named by the "preset" key (default paper2017) supplies
        every field not present in the mapping. Model options in the
        mapping are ignored here; see ModelOptions.from_mapping.
        """
        validate_config_mapping(data, lines)
        preset = str(data.get("preset", DEFAULT_PRESET)).strip()
        values: Dict[str, Any] = dict(_preset_values(preset, line=_line(lines, "preset")))

        for name in SYSTEM_CONFIG_FIELDS:
            if name not in data:
                continue
            line = _line(lines, name)
            if name == "detuning":
                values[name] = parse_detuning(data[name], line=line)
            else:
                values[name] = parse_float(data[name], name, line=line)
                if name in _POSITIVE_FIELDS:
                    validate_positive_number(values[name], name, line=line)
                elif name == "input_power":
                    validate_non_negative(values[name], name, line=line)

        return cls(**values)

    def replace(self, **changes: Any) -> "SystemConfig":
        """Return a copy with some fields changed (validated again)."""
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ModelOptions:
    """Model switches that are not physical parameters."""

    detuning_convention: DetuningConvention = DetuningConvention.AS_PRINTED
    thermal_mode: ThermalNoiseMode = ThermalNoiseMode.FLAT_MARKOVIAN
    cutoff_factor: float = DEFAULT_CUTOFF_FACTOR

    @classmethod
    def from_mapping(
        cls,
        data: Mapping[str, Any],
        lines: Optional[Mapping[str, int]] = None,
    ) -> "ModelOptions":
        kwargs: Dict[str, Any] = {}
        if "detuning_convention" in data:
            kwargs["detuning_convention"] = DetuningConvention(parse_choice(
                data["detuning_convention"],
                [c.value for c in DetuningConvention],
                "detuning_convention",
                line=_line(lines, "detuning_convention"),
            ))
        if "thermal_mode" in data:
            kwargs["thermal_mode"] = ThermalNoiseMode(parse_choice(
                data["thermal_mode"],
                [m.value for m in ThermalNoiseMode],
                "thermal_mode",
                aliases=THERMAL_MODE_ALIASES,
                line=_line(lines, "thermal_mode"),
            ))
        if "cutoff_factor" in data:
            factor = parse_float(data["cutoff_factor"], "cutoff_factor", line=_line(lines, "cutoff_factor"))
            kwargs["cutoff_factor"] = validate_positive_number(factor, "cutoff_factor")
        return cls(**kwargs)


@dataclass(frozen=True)
class SystemParams:
    """Internal parameter set: angular frequencies in rad/s.

    epsilon is the drive amplitude sqrt(2 kappa P / (hbar omega_p)); n_th and
    n_a are Bose-Einstein occupations of the mechanical mode and of the
    cavity mode at the bath temperature.
    """

    omega_m: float
    gamma_m: float
    kappa: float
    g_l: float
    g_q: float
    Delta: float
    omega_p: float
    omega_c: float
    epsilon: float
    n_th: float
    n_a: float
    mass: float
    temperature: float
    power: float = 0.0
    detuning_convention: DetuningConvention = DetuningConvention.AS_PRINTED

    @property
    def x_zpf(self) -> float:
        """Position scale (m) of the dimensionless quadrature x."""
        return math.sqrt(HBAR / (self.mass * self.omega_m))

    @property
    def p_zpf(self) -> float:
        """Momentum scale (kg m/s) of the dimensionless quadrature p."""
        return math.sqrt(HBAR * self.mass * self.omega_m)

    def to_config_frequencies(self) -> Dict[str, float]:
        """Convert back to the ordinary frequencies a SystemConfig carries."""
        return {
            "mechanical_frequency": self.omega_m / TWO_PI,
            "mechanical_damping": self.gamma_m / TWO_PI,
            "cavity_linewidth": self.kappa / TWO_PI,
            "linear_coupling": self.g_l / TWO_PI,
            "quadratic_ratio": self.g_q / self.g_l,
        }

    def with_power(self, power: float) -> "SystemParams":
        """Same system at another input power (zero allowed)."""
        power = validate_non_negative(float(power), "input_power")
        return dataclasses.replace(self, power=power, epsilon=drive_amplitude(self.kappa, power, self.omega_p))


def bose_einstein(energy_ratio: float) -> float:
    """Mean occupation 1/(exp(x) - 1) for x = hbar*omega/(k_B*T) > 0.

    Written as exp(-x)/(1 - exp(-x)) so optical frequencies underflow to
    0.0 instead of overflowing.

    Examples:
        >>> bose_einstein(1e7)
        0.0
    """
    return math.exp(-energy_ratio) / -math.expm1(-energy_ratio)


def drive_amplitude(kappa: float, power: float, omega_p: float) -> float:
    """Pump amplitude epsilon = sqrt(2 kappa P / (hbar omega_p)) in rad/s."""
    return math.sqrt(2.0 * kappa * power / (HBAR * omega_p))


def derive_params(
    config: SystemConfig,
    detuning_convention: DetuningConvention = DetuningConvention.AS_PRINTED,
) -> SystemParams:
    """Convert a SystemConfig into the internal angular-frequency set.

    Args:
        config: User-facing parameters
        detuning_convention: Detuning bookkeeping carried along for the solver

    Returns:
        SystemParams with every derived field populated

    Raises:
        ConfigurationError: If the cavity would hold thermal photons, which
            the noise model neglects

    Examples:
        >>> params = derive_params(load_preset("paper2017").replace(input_power=0.0))
        >>> params.epsilon
        0.0
    """
    omega_m = TWO_PI * config.mechanical_frequency
    gamma_m = TWO_PI * config.mechanical_damping
    kappa = TWO_PI * config.cavity_linewidth
    g_l = TWO_PI * config.linear_coupling
    g_q = config.quadratic_ratio * g_l

    detuning = parse_detuning(config.detuning)
    Delta = omega_m if detuning == DETUNING_SYMBOL else float(detuning)

    omega_p = TWO_PI * SPEED_OF_LIGHT / config.pump_wavelength
    omega_c = omega_p + Delta
    epsilon = drive_amplitude(kappa, config.input_power, omega_p)

    n_th = bose_einstein(HBAR * omega_m / (K_B * config.bath_temperature))
    n_a = bose_einstein(HBAR * omega_c / (K_B * config.bath_temperature))
    if not n_a < MAX_THERMAL_PHOTONS:
        raise ConfigurationError(
            f"thermal photon number {n_a:.3e} is not negligible; the model assumes n_a = 0",
            field="bath_temperature",
        )

    logger.debug(
        f"Derived params: omega_m={omega_m:.6e} kappa={kappa:.6e} epsilon={epsilon:.6e} n_th={n_th:.6f}"
    )

    return SystemParams(
        omega_m=omega_m,
        gamma_m=gamma_m,
        kappa=kappa,
        g_l=g_l,
        g_q=g_q,
        Delta=Delta,
        omega_p=omega_p,
        omega_c=omega_c,
        epsilon=epsilon,
        n_th=n_th,
        n_a=n_a,
        mass=config.oscillator_mass,
        temperature=config.bath_temperature,
        power=config.input_power,
        detuning_convention=detuning_convention,
    )


def spring_constants(params: SystemParams, intensity: float) -> Tuple[float, float]:
    """Bare and light-modified spring constants K = m w_m^2, K~ = m w_m w~_m (N/m)."""
    omega_m_tilde = params.omega_m + 2.0 * params.g_q * intensity
    return params.mass * params.omega_m ** 2, params.mass * params.omega_m * omega_m_tilde


def loc_from_cavity_gradient(dwc_dx: float, mass: float, omega_m: float) -> float:
    """Linear coupling g_l = (d omega_c/dx) * sqrt(hbar/(m omega_m)) in rad/s.

    Args:
        dwc_dx: Cavity frequency pull per unit displacement (rad/s per m)
        mass: Effective oscillator mass (kg)
        omega_m: Mechanical angular frequency (rad/s)
    """
    return dwc_dx * math.sqrt(HBAR / (mass * omega_m))


def qoc_from_cavity_curvature(d2wc_dx2: float, mass: float, omega_m: float) -> float:
    """Quadratic coupling g_q = (d^2 omega_c/dx^2) * hbar/(2 m omega_m) in rad/s."""
    return d2wc_dx2 * HBAR / (2.0 * mass * omega_m)


def load_preset(name: str = DEFAULT_PRESET) -> SystemConfig:
    """Return the named preset as a SystemConfig.

    Examples:
        >>> load_preset("paper2017").mechanical_frequency
        10000000.0
    """
    return SystemConfig(**_preset_values(name))


def load_config(path: Union[str, Path]) -> Tuple[SystemConfig, ModelOptions]:
    """Parse a flat KEY=value config file.

    The grammar is the dotenv one: comments start with '#', values may be
    quoted, an optional 'export ' prefix is accepted. Fields not given are
    taken from the preset named by the 'preset' key (default paper2017).

    Raises:
        ConfigurationError: Unreadable file, malformed line, unknown key,
            duplicate key, or invalid value, with the line number
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}")

    data: Dict[str, str] = {}
    lines: Dict[str, int] = {}

    for binding in parse_stream(io.StringIO(text)):
        line = binding.original.line
        if binding.error:
            raise ConfigurationError(
                f"cannot parse statement {binding.original.string.strip()!r}", line=line
            )
        if binding.key is None:
            continue
        if binding.value is None:
            raise ConfigurationError("missing '=' and value", field=binding.key, line=line)
        if binding.key in data:
            raise ConfigurationError(
                f"duplicate key (first set on line {lines[binding.key]})", field=binding.key, line=line
            )
        data[binding.key] = binding.value
        lines[binding.key] = line

    logger.info(f"Loaded config {path} ({len(data)} keys)")
    return SystemConfig.from_mapping(data, lines), ModelOptions.from_mapping(data, lines)


def _preset_values(name: str, line: Optional[int] = None) -> Dict[str, Any]:
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}, available: {', '.join(sorted(PRESETS))}", field="preset", line=line
        )
    return dict(PRESETS[name])


def _line(lines: Optional[Mapping[str, int]], key: str) -> Optional[int]:
    return lines.get(key) if lines else None
