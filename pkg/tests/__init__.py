"""
Test suite for the optosqueeze project.

This package contains tests for all modules including:
- Parameter conversion and config parsing tests
- Steady-state solver tests
- Stability (Routh-Hurwitz and eigenvalue) tests
- Spectra tests
- Variance and squeezing tests
- Sweep and CLI tests
- Validation and type safety tests
"""
