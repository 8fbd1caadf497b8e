import os
import logging

from dotenv import load_dotenv
from scipy import constants

load_dotenv()

# Logging Configuration
# File logging is optional, console logging is always on
handlers = []
try:
    handlers.append(logging.FileHandler(os.getenv("OPTOSQUEEZE_LOG_FILE", "optosqueeze.log")))
except (OSError, PermissionError):
    pass
handlers.append(logging.StreamHandler())

logging.basicConfig(
    level=os.getenv("OPTOSQUEEZE_LOG_LEVEL", "INFO").upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=handlers
)
logger = logging.getLogger('optosqueeze')

# Physical constants (CODATA, exact or to >= 10 significant digits)
HBAR = constants.hbar
K_B = constants.k
SPEED_OF_LIGHT = constants.c
TWO_PI = 2.0 * constants.pi

# Standard quantum limit of a dimensionless quadrature and the 3 dB threshold
SQL_VARIANCE = 0.5
THREE_DB_VARIANCE = 0.25
HEISENBERG_BOUND = 0.25
HEISENBERG_TOLERANCE = 1e-6

# Thermal photon number must vanish at optical frequencies
MAX_THERMAL_PHOTONS = 1e-10

# |g_q / g_l| above this is outside the residual-QOC regime
MAX_SUPPORTED_QUADRATIC_RATIO = 1.0

# Steady-state root search
INTENSITY_GRID_MIN = 1e-6
INTENSITY_GRID_MAX = 1e12
INTENSITY_GRID_POINTS = 4000
POLE_GRID_POINTS = 400
ROOT_RELATIVE_TOLERANCE = 1e-12
NEWTON_STEPS = 3
RESIDUAL_TOLERANCE = 1e-10

# Stability
MARGINAL_TOLERANCE = 1e-9

# Spectra and variances
DEFAULT_CUTOFF_FACTOR = 1e3  # omega_cut = factor * omega_m for exact-coth integrals
QUADRATURE_RELATIVE_TOLERANCE = 1e-8
QUADRATURE_SUBDIVISIONS = 200
QUASIRESONANT_DAMPING_RATIO = 0.1  # Gamma_eff / Omega_eff must stay below this
RESOLVED_SIDEBAND_RATIO = 1.0  # kappa / omega_m must stay below this

# Sweep and figure defaults
FIGURE_POWER_RANGE_W = (1e-6, 1e-2)
FIGURE_POWER_POINTS = 200
FIGURE_RATIO_RANGE = (-1e-2, 1e-2)
FIGURE_RATIO_POINTS = 101
FIGURE_PANEL_RATIOS = (-1e-2, 0.0, 1e-2)
CSV_FLOAT_FORMAT = "%.12e"
DEFAULT_WORKERS = int(os.getenv("OPTOSQUEEZE_WORKERS", "0")) or (os.cpu_count() or 1)

# Named parameter presets, values exactly as a config file would carry them
PRESETS = {
    "paper2017": {
        "pump_wavelength": 810e-9,          # m
        "mechanical_frequency": 10e6,       # Hz (omega_m / 2pi)
        "mechanical_damping": 100.0,        # Hz (gamma_m / 2pi)
        "cavity_linewidth": 1e6,            # Hz (kappa / 2pi)
        "linear_coupling": 215.0,           # Hz (g_l / 2pi)
        "quadratic_ratio": 1e-2,            # g_q / g_l
        "detuning": "omega_m",              # rad/s or the symbol omega_m
        "input_power": 100e-6,              # W
        "bath_temperature": 1e-3,           # K
        "oscillator_mass": 5e-12,           # kg
    },
}
DEFAULT_PRESET = "paper2017"
