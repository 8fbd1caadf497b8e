"""Tests for src/type_safety.py.

Tests cover the strict converters used for config files and CLI flags:
- parse_float()
- validate_positive_number()
- validate_non_negative()
- parse_choice()
- parse_detuning()
- parse_positive_int()

Test patterns:
- Converters: valid inputs return the value, invalid inputs raise
  ConfigurationError naming the field
- Line numbers are carried into the error when given
"""

import math

import pytest

from src.errors import ConfigurationError
from src.type_safety import (
    DETUNING_SYMBOL,
    parse_choice,
    parse_detuning,
    parse_float,
    parse_positive_int,
    validate_non_negative,
    validate_positive_number,
)


@pytest.mark.unit
class TestParseFloat:
    """Tests for parse_float()."""

    @pytest.mark.parametrize("value,expected", [
        ("1e-3", 1e-3),
        (" 215 ", 215.0),
        ("-0.01", -0.01),
        (5, 5.0),
        (2.5, 2.5),
        ("0", 0.0),
    ])
    def test_valid(self, value, expected):
        assert parse_float(value, "x") == expected

    @pytest.mark.parametrize("value", ["fast", "", "1e-3 W", None, [1.0], True])
    def test_invalid(self, value):
        with pytest.raises(ConfigurationError) as exc_info:
            parse_float(value, "input_power")
        assert exc_info.value.field == "input_power"

    @pytest.mark.parametrize("value", ["nan", "inf", float("-inf"), math.nan])
    def test_non_finite(self, value):
        with pytest.raises(ConfigurationError, match="finite"):
            parse_float(value, "detuning")

    def test_line_number_in_message(self):
        with pytest.raises(ConfigurationError) as exc_info:
            parse_float("abc", "cavity_linewidth", line=7)
        assert exc_info.value.line == 7
        assert str(exc_info.value).startswith("[line 7, field 'cavity_linewidth']")


@pytest.mark.unit
class TestSignValidators:
    """Tests for validate_positive_number() and validate_non_negative()."""

    @pytest.mark.parametrize("value", [1e-12, 1.0, 1e9])
    def test_positive_accepts(self, value):
        assert validate_positive_number(value, "oscillator_mass") == value

    @pytest.mark.parametrize("value", [0.0, -1.0, math.nan])
    def test_positive_rejects(self, value):
        with pytest.raises(ConfigurationError, match="must be positive"):
            validate_positive_number(value, "oscillator_mass")

    @pytest.mark.parametrize("value", [0.0, 1e-4])
    def test_non_negative_accepts(self, value):
        assert validate_non_negative(value, "input_power") == value

    @pytest.mark.parametrize("value", [-1e-9, math.nan])
    def test_non_negative_rejects(self, value):
        with pytest.raises(ConfigurationError, match="non-negative"):
            validate_non_negative(value, "input_power")


@pytest.mark.unit
class TestParseChoice:
    """Tests for parse_choice()."""

    CHOICES = ["exact-coth", "flat-markovian"]
    ALIASES = {"flat": "flat-markovian", "coth": "exact-coth"}

    @pytest.mark.parametrize("value,expected", [
        ("exact-coth", "exact-coth"),
        ("FLAT-MARKOVIAN", "flat-markovian"),
        (" flat ", "flat-markovian"),
        ("coth", "exact-coth"),
    ])
    def test_valid(self, value, expected):
        assert parse_choice(value, self.CHOICES, "thermal_mode", aliases=self.ALIASES) == expected

    def test_invalid_lists_choices(self):
        with pytest.raises(ConfigurationError, match="exact-coth, flat-markovian"):
            parse_choice("warm", self.CHOICES, "thermal_mode", aliases=self.ALIASES)

    def test_alias_needs_mapping(self):
        with pytest.raises(ConfigurationError):
            parse_choice("flat", self.CHOICES, "thermal_mode")


@pytest.mark.unit
class TestParseDetuning:
    """Tests for parse_detuning()."""

    @pytest.mark.parametrize("value", ["omega_m", "OMEGA_M", " w_m ", "resonant-sideband"])
    def test_symbol(self, value):
        assert parse_detuning(value) == DETUNING_SYMBOL

    @pytest.mark.parametrize("value,expected", [("6.2e7", 6.2e7), (-1e6, -1e6), (0, 0.0)])
    def test_numeric(self, value, expected):
        assert parse_detuning(value) == expected

    def test_invalid(self):
        with pytest.raises(ConfigurationError) as exc_info:
            parse_detuning("omega_c", line=3)
        assert exc_info.value.field == "detuning"
        assert exc_info.value.line == 3


@pytest.mark.unit
class TestParsePositiveInt:
    """Tests for parse_positive_int()."""

    @pytest.mark.parametrize("value,expected", [("4", 4), (1, 1), ("200", 200), (8.0, 8)])
    def test_valid(self, value, expected):
        assert parse_positive_int(value, "workers") == expected

    @pytest.mark.parametrize("value", ["0", "-2", "1.5", "many"])
    def test_invalid(self, value):
        with pytest.raises(ConfigurationError) as exc_info:
            parse_positive_int(value, "points")
        assert exc_info.value.field == "points"
