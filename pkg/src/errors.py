"""Exception hierarchy shared by the physics modules and the CLI."""

from typing import Optional, Sequence, Tuple


class OptomechError(Exception):
    """Base exception for optosqueeze errors."""

    exit_code = 1


class ConfigurationError(OptomechError):
    """Invalid or unparsable configuration input.

    Args:
        message: Human readable diagnostic
        field: Offending configuration field, when known
        line: 1-based line number in the config file, when known
    """

    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(f"{prefix}{message}")


class InvertedSpringError(OptomechError):
    """Effective spring omega_m + 2 g_q I is not positive."""

    exit_code = 3


class NoStableSpringError(OptomechError):
    """No self-consistent root with a confining spring was found.

    Attributes:
        rejected: (intensity, omega_m_tilde) pairs of the discarded roots
    """

    exit_code = 3

    def __init__(self, message: str, rejected: Sequence[Tuple[float, float]] = ()):
        self.rejected = list(rejected)
        if self.rejected:
            listing = ", ".join(f"I={i:.6e} (omega_m_tilde={w:.6e})" for i, w in self.rejected)
            message = f"{message}; rejected roots: {listing}"
        super().__init__(message)


class StabilityError(OptomechError):
    """Quantity requested at a dynamically unstable operating point."""

    exit_code = 3


class PoleError(OptomechError):
    """Susceptibility evaluated exactly on a real pole."""

    exit_code = 4


class NumericError(OptomechError):
    """Eigen-solver or quadrature failure.

    Attributes:
        interval: Worst (lower, upper) subinterval of a failed quadrature
    """

    exit_code = 4

    def __init__(self, message: str, interval: Optional[Tuple[float, float]] = None):
        self.interval = interval
        if interval is not None:
            message = f"{message} (worst subinterval [{interval[0]:.6e}, {interval[1]:.6e}])"
        super().__init__(message)
