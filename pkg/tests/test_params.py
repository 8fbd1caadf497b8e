"""Unit tests for src/params.py: presets, unit conversion and config files."""

import math
from pathlib import Path

import pytest

from src.config import HBAR, K_B, SPEED_OF_LIGHT
from src.errors import ConfigurationError
from src.params import (
    DetuningConvention,
    ModelOptions,
    SystemConfig,
    ThermalNoiseMode,
    bose_einstein,
    derive_params,
    drive_amplitude,
    load_config,
    load_preset,
    loc_from_cavity_gradient,
    qoc_from_cavity_curvature,
    spring_constants,
)


class TestPresets:
    """Tests for load_preset."""

    @pytest.mark.unit
    def test_paper_preset_values(self, paper_config):
        assert paper_config.pump_wavelength == 810e-9
        assert paper_config.mechanical_frequency == 10e6
        assert paper_config.mechanical_damping == 100.0
        assert paper_config.cavity_linewidth == 1e6
        assert paper_config.linear_coupling == 215.0
        assert paper_config.quadratic_ratio == 1e-2
        assert paper_config.detuning == "omega_m"
        assert paper_config.input_power == 100e-6
        assert paper_config.bath_temperature == 1e-3
        assert paper_config.oscillator_mass == 5e-12

    @pytest.mark.unit
    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError, match="unknown preset"):
            load_preset("nonexistent")


class TestSystemConfig:
    """Tests for SystemConfig validation."""

    @pytest.mark.unit
    def test_string_values_are_coerced(self, paper_config):
        config = paper_config.replace(input_power="2e-4", detuning="6.2e7")
        assert config.input_power == 2e-4
        assert config.detuning == 6.2e7

    @pytest.mark.unit
    @pytest.mark.parametrize(
        "field_name,value",
        [
            ("oscillator_mass", 0.0),
            ("mechanical_frequency", -1.0),
            ("cavity_linewidth", float("nan")),
            ("bath_temperature", "cold"),
            ("input_power", -1e-6),
        ],
    )
    def test_invalid_values(self, paper_config, field_name, value):
        with pytest.raises(ConfigurationError) as exc_info:
            paper_config.replace(**{field_name: value})
        assert exc_info.value.field == field_name

    @pytest.mark.unit
    def test_large_quadratic_ratio_warns(self, paper_config, caplog):
        with caplog.at_level("WARNING", logger="optosqueeze"):
            paper_config.replace(quadratic_ratio=2.0)
        assert "exceeds" in caplog.text

    @pytest.mark.unit
    def test_from_mapping_layers_over_preset(self):
        config = SystemConfig.from_mapping({"input_power": "5e-4", "quadratic_ratio": "-0.01"})
        assert config.input_power == 5e-4
        assert config.quadratic_ratio == -0.01
        assert config.mechanical_frequency == 10e6

    @pytest.mark.unit
    def test_from_mapping_rejects_unknown_key(self):
        with pytest.raises(ConfigurationError, match="unknown configuration key"):
            SystemConfig.from_mapping({"input_pwr": "1e-4"}, lines={"input_pwr": 4})


class TestDeriveParams:
    """Tests for the conversion to angular frequencies."""

    @pytest.mark.unit
    def test_angular_frequencies(self, paper_params):
        two_pi = 2.0 * math.pi
        assert paper_params.omega_m == pytest.approx(two_pi * 10e6, rel=1e-15)
        assert paper_params.gamma_m == pytest.approx(two_pi * 100.0, rel=1e-15)
        assert paper_params.kappa == pytest.approx(two_pi * 1e6, rel=1e-15)
        assert paper_params.g_l == pytest.approx(two_pi * 215.0, rel=1e-15)
        assert paper_params.g_q == pytest.approx(1e-2 * two_pi * 215.0, rel=1e-15)

    @pytest.mark.unit
    def test_symbolic_detuning_is_omega_m(self, paper_params):
        assert paper_params.Delta == paper_params.omega_m
        assert paper_params.omega_c == paper_params.omega_p + paper_params.Delta

    @pytest.mark.unit
    def test_numeric_detuning(self, params_at):
        assert params_at(detuning=3.0e7).Delta == 3.0e7

    @pytest.mark.unit
    def test_drive_amplitude(self, paper_params):
        omega_p = 2.0 * math.pi * SPEED_OF_LIGHT / 810e-9
        expected = math.sqrt(2.0 * paper_params.kappa * 100e-6 / (HBAR * omega_p))
        assert paper_params.omega_p == pytest.approx(omega_p, rel=1e-15)
        assert paper_params.epsilon == pytest.approx(expected, rel=1e-12)

    @pytest.mark.unit
    def test_zero_power_zero_drive(self, undriven_params):
        assert undriven_params.epsilon == 0.0

    @pytest.mark.unit
    def test_thermal_occupations(self, paper_params):
        x = HBAR * paper_params.omega_m / (K_B * 1e-3)
        assert paper_params.n_th == pytest.approx(1.0 / math.expm1(x), rel=1e-12)
        assert paper_params.n_th == pytest.approx(1.62, abs=0.05)
        assert paper_params.n_a < 1e-10

    @pytest.mark.unit
    def test_hot_cavity_rejected(self, paper_config):
        with pytest.raises(ConfigurationError, match="thermal photon number"):
            derive_params(paper_config.replace(bath_temperature=1e5))

    @pytest.mark.unit
    def test_round_trip_to_config(self, paper_config, paper_params):
        frequencies = paper_params.to_config_frequencies()
        for name, value in frequencies.items():
            assert value == pytest.approx(getattr(paper_config, name), rel=1e-12)

    @pytest.mark.unit
    def test_convention_carried(self, paper_config):
        params = derive_params(paper_config, DetuningConvention.UNIFIED_XS2)
        assert params.detuning_convention == DetuningConvention.UNIFIED_XS2

    @pytest.mark.unit
    def test_with_power(self, paper_params):
        doubled = paper_params.with_power(200e-6)
        assert doubled.power == 200e-6
        assert doubled.epsilon == pytest.approx(math.sqrt(2.0) * paper_params.epsilon, rel=1e-12)


class TestHelpers:
    """Tests for the small physics helpers."""

    @pytest.mark.unit
    def test_bose_einstein_optical_limit(self):
        assert bose_einstein(1e6) == 0.0

    @pytest.mark.unit
    @pytest.mark.parametrize("x", [0.01, 0.48, 1.0, 5.0])
    def test_bose_einstein_matches_definition(self, x):
        assert bose_einstein(x) == pytest.approx(1.0 / (math.exp(x) - 1.0), rel=1e-12)

    @pytest.mark.unit
    def test_drive_amplitude_zero_power(self):
        assert drive_amplitude(1e6, 0.0, 1e15) == 0.0

    @pytest.mark.unit
    def test_zero_point_scales(self, paper_params):
        assert paper_params.x_zpf == pytest.approx(math.sqrt(HBAR / (5e-12 * paper_params.omega_m)), rel=1e-12)
        assert paper_params.x_zpf * paper_params.p_zpf == pytest.approx(HBAR, rel=1e-12)

    @pytest.mark.unit
    def test_spring_constants(self, paper_params):
        bare, modified = spring_constants(paper_params, 0.0)
        assert bare == pytest.approx(5e-12 * paper_params.omega_m ** 2, rel=1e-12)
        assert modified == pytest.approx(bare, rel=1e-14)

        intensity = 1.0e6
        bare, modified = spring_constants(paper_params, intensity)
        ratio = 1.0 + 2.0 * paper_params.g_q * intensity / paper_params.omega_m
        assert modified / bare == pytest.approx(ratio, rel=1e-12)

    @pytest.mark.unit
    def test_couplings_from_cavity_derivatives(self, paper_params):
        mass, omega_m = paper_params.mass, paper_params.omega_m
        gradient = paper_params.g_l / math.sqrt(HBAR / (mass * omega_m))
        assert loc_from_cavity_gradient(gradient, mass, omega_m) == pytest.approx(paper_params.g_l, rel=1e-12)

        curvature = paper_params.g_q * 2.0 * mass * omega_m / HBAR
        assert qoc_from_cavity_curvature(curvature, mass, omega_m) == pytest.approx(paper_params.g_q, rel=1e-12)


class TestLoadConfig:
    """Tests for flat KEY=value config files."""

    @pytest.mark.unit
    def test_full_file(self, write_config):
        path = write_config(
            "# paper values with a different power\n"
            "preset=paper2017\n"
            "input_power = 2.5e-4\n"
            "export quadratic_ratio='-0.01'\n"
            "detuning=omega_m  # resonant sideband\n"
            "thermal_mode=flat\n"
            "cutoff_factor=500\n"
        )
        config, options = load_config(path)
        assert config.input_power == 2.5e-4
        assert config.quadratic_ratio == -0.01
        assert config.detuning == "omega_m"
        assert options.thermal_mode == ThermalNoiseMode.FLAT_MARKOVIAN
        assert options.cutoff_factor == 500.0

    @pytest.mark.unit
    def test_defaults_when_empty(self, write_config):
        config, options = load_config(write_config("# nothing here\n"))
        assert config == load_preset()
        assert options == ModelOptions()

    @pytest.mark.unit
    def test_unknown_key_reports_line(self, write_config):
        path = write_config("input_power=1e-4\n\ninput_pwr=2e-4\n")
        with pytest.raises(ConfigurationError) as exc_info:
            load_config(path)
        assert exc_info.value.line == 3
        assert exc_info.value.field == "input_pwr"
        assert "line 3" in str(exc_info.value)

    @pytest.mark.unit
    def test_non_numeric_value_reports_line(self, write_config):
        path = write_config("# header\ninput_power=lots\n")
        with pytest.raises(ConfigurationError) as exc_info:
            load_config(path)
        assert exc_info.value.line == 2
        assert exc_info.value.field == "input_power"

    @pytest.mark.unit
    def test_duplicate_key(self, write_config):
        path = write_config("input_power=1e-4\ninput_power=2e-4\n")
        with pytest.raises(ConfigurationError, match="duplicate key"):
            load_config(path)

    @pytest.mark.unit
    def test_key_without_value(self, write_config):
        with pytest.raises(ConfigurationError, match="missing"):
            load_config(write_config("input_power\n"))

    @pytest.mark.unit
    def test_bad_choice(self, write_config):
        with pytest.raises(ConfigurationError) as exc_info:
            load_config(write_config("thermal_mode=lukewarm\n"))
        assert exc_info.value.field == "thermal_mode"

    @pytest.mark.unit
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="cannot read"):
            load_config(tmp_path / "absent.env")

    @pytest.mark.unit
    def test_shipped_config_matches_preset(self):
        path = Path(__file__).resolve().parent.parent / "configs" / "paper2017.env"
        config, options = load_config(path)
        assert config == load_preset("paper2017")
        assert options == ModelOptions()
