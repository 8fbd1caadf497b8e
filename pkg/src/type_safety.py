"""Type safety utilities for configuration values.

This module provides strict conversion functions and validators for values
that arrive as text (config files, CLI flags) or as loosely typed Python
objects. Unlike lenient parsers, every failure raises ConfigurationError
naming the offending field so the CLI can report it.
"""

import math
from typing import Any, Iterable, Mapping, Optional, Union

from .errors import ConfigurationError

DETUNING_SYMBOL = "omega_m"


def parse_float(value: Any, name: str = "value", line: Optional[int] = None) -> float:
    """Convert a config value to a finite float.

    Args:
        value: Raw value (number or string, optionally with whitespace)
        name: Field name for error messages
        line: Config file line for error messages

    Returns:
        Float value

    Raises:
        ConfigurationError: If the value is boolean, non-numeric, NaN or infinite

    Examples:
        >>> parse_float("1e-3", "bath_temperature")
        0.001
        >>> parse_float(5, "oscillator_mass")
        5.0
        >>> parse_float("fast", "input_power")
        Traceback (most recent call last):
        ...
        src.errors.ConfigurationError: [field 'input_power'] expected a number, got 'fast'
    """
    if isinstance(value, bool):
        raise ConfigurationError(f"expected a number, got {value!r}", field=name, line=line)

    if isinstance(value, (int, float)):
        result = float(value)
    elif isinstance(value, str):
        try:
            result = float(value.strip())
        except ValueError:
            raise ConfigurationError(f"expected a number, got {value!r}", field=name, line=line)
    else:
        raise ConfigurationError(
            f"expected a number, got {type(value).__name__}", field=name, line=line
        )

    if not math.isfinite(result):
        raise ConfigurationError(f"must be finite, got {result}", field=name, line=line)
    return result


def validate_positive_number(value: float, name: str = "value", line: Optional[int] = None) -> float:
    """Validate that a number is strictly positive.

    Examples:
        >>> validate_positive_number(10.0)
        10.0
        >>> validate_positive_number(0.0, "oscillator_mass")
        Traceback (most recent call last):
        ...
        src.errors.ConfigurationError: [field 'oscillator_mass'] must be positive, got 0.0
    """
    if not value > 0:
        raise ConfigurationError(f"must be positive, got {value}", field=name, line=line)
    return value


def validate_non_negative(value: float, name: str = "value", line: Optional[int] = None) -> float:
    """Validate that a number is zero or positive.

    Examples:
        >>> validate_non_negative(0.0, "input_power")
        0.0
    """
    if not value >= 0:
        raise ConfigurationError(f"must be non-negative, got {value}", field=name, line=line)
    return value


def parse_choice(
    value: Any,
    choices: Iterable[str],
    name: str = "value",
    aliases: Optional[Mapping[str, str]] = None,
    line: Optional[int] = None,
) -> str:
    """Normalise a string option against a fixed set of choices.

    Args:
        value: Raw option value
        choices: Accepted canonical values
        name: Field name for error messages
        aliases: Optional alternative spellings mapped to canonical values
        line: Config file line for error messages

    Returns:
        Canonical choice

    Examples:
        >>> parse_choice(" Flat ", ["exact-coth", "flat-markovian"], aliases={"flat": "flat-markovian"})
        'flat-markovian'
    """
    choices = list(choices)
    text = str(value).strip().lower()
    if aliases and text in aliases:
        text = aliases[text]
    if text not in choices:
        raise ConfigurationError(
            f"expected one of {', '.join(choices)}, got {value!r}", field=name, line=line
        )
    return text


def parse_detuning(value: Any, line: Optional[int] = None) -> Union[float, str]:
    """Parse the detuning field: an angular frequency or the symbol omega_m.

    Examples:
        >>> parse_detuning("omega_m")
        'omega_m'
        >>> parse_detuning("6.2e7")
        62000000.0
    """
    if isinstance(value, str) and value.strip().lower() in (DETUNING_SYMBOL, "w_m", "resonant-sideband"):
        return DETUNING_SYMBOL
    return parse_float(value, "detuning", line=line)


def parse_positive_int(value: Any, name: str = "value") -> int:
    """Parse an integer count that must be at least one.

    Examples:
        >>> parse_positive_int("4", "workers")
        4
    """
    number = parse_float(value, name)
    if number != int(number) or number < 1:
        raise ConfigurationError(f"must be a positive integer, got {value!r}", field=name)
    return int(number)
