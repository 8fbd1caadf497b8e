"""Input validation for configuration mappings and sweep definitions."""

from typing import Any, Iterable, List, Mapping, Optional, Sequence
import logging

from .errors import ConfigurationError

logger = logging.getLogger('optosqueeze')

SYSTEM_CONFIG_FIELDS = (
    "pump_wavelength",
    "mechanical_frequency",
    "mechanical_damping",
    "cavity_linewidth",
    "linear_coupling",
    "quadratic_ratio",
    "detuning",
    "input_power",
    "bath_temperature",
    "oscillator_mass",
)

MODEL_OPTION_KEYS = ("preset", "detuning_convention", "thermal_mode", "cutoff_factor")

SWEEP_QUANTITIES = (
    "I",
    "normalized_spring",
    "rh_stable",
    "gamma_eff_ratio",
    "var_x",
    "var_p",
    "squeeze_db",
    "omega_eff",
)

AXIS_SCALES = ("linear", "log")


def validate_config_mapping(
    data: Mapping[str, Any],
    lines: Optional[Mapping[str, int]] = None,
) -> bool:
    """Validate the key set of a flat config mapping.

    Every key must be a SystemConfig field or a model option. Keys are
    matched case-sensitively, the way they are documented.

    Args:
        data: Parsed key-value mapping
        lines: Optional key -> line number map for diagnostics

    Returns:
        True if the mapping is valid

    Raises:
        ConfigurationError: On the first unknown key, naming key and line

    Examples:
        >>> validate_config_mapping({"input_power": "1e-4"})
        True
        >>> validate_config_mapping({"input_pwr": "1e-4"})
        Traceback (most recent call last):
        ...
        src.errors.ConfigurationError: [field 'input_pwr'] unknown configuration key
    """
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"config must be a key-value mapping, got {type(data).__name__}")

    allowed = set(SYSTEM_CONFIG_FIELDS) | set(MODEL_OPTION_KEYS)
    for key in data:
        if key not in allowed:
            line = lines.get(key) if lines else None
            logger.error(f"Unknown configuration key: {key}")
            raise ConfigurationError("unknown configuration key", field=key, line=line)

    return True


def validate_sweep_axis(name: str, values: Sequence[float], scale: str = "linear") -> bool:
    """Validate one sweep axis.

    Rules:
        - name must be a numeric SystemConfig field
        - at least two points, no repeated values
        - log axes need strictly positive values

    Raises:
        ConfigurationError: With the axis name as the field
    """
    if name not in SYSTEM_CONFIG_FIELDS:
        raise ConfigurationError("swept parameter is not a SystemConfig field", field=name)

    if scale not in AXIS_SCALES:
        raise ConfigurationError(f"axis scale must be one of {', '.join(AXIS_SCALES)}", field=name)

    if len(values) < 2:
        raise ConfigurationError(f"axis needs at least 2 points, got {len(values)}", field=name)

    if len(set(values)) != len(values):
        raise ConfigurationError("axis range is degenerate (repeated values)", field=name)

    if scale == "log" and min(values) <= 0:
        raise ConfigurationError("log-scaled axis requires positive values", field=name)

    return True


def validate_quantities(quantities: Iterable[str]) -> List[str]:
    """Validate and de-duplicate requested sweep quantities, keeping order.

    Examples:
        >>> validate_quantities(["I", "var_x", "I"])
        ['I', 'var_x']
    """
    result: List[str] = []
    for quantity in quantities:
        if quantity not in SWEEP_QUANTITIES:
            raise ConfigurationError(
                f"unknown quantity, expected one of {', '.join(SWEEP_QUANTITIES)}",
                field=quantity,
            )
        if quantity not in result:
            result.append(quantity)

    if not result:
        raise ConfigurationError("at least one quantity is required", field="quantities")

    return result
