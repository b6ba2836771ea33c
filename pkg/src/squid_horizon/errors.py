"""Exception types raised by the package.

Everything derives from SquidHorizonError so callers can catch the whole
family with one clause; the ValueError/RuntimeError mixins keep the types
usable with generic handlers.
"""


class SquidHorizonError(Exception):
    """Base class for all package-specific errors."""


class FluxOutOfRange(SquidHorizonError, ValueError):
    """External flux magnitude at or beyond half a flux quantum."""


class OverCritical(SquidHorizonError, ValueError):
    """Bias current magnitude exceeds the effective critical current."""


class NonFinite(SquidHorizonError, FloatingPointError):
    """An integration produced NaN or infinity."""


class CourantViolation(SquidHorizonError, ValueError):
    """Requested time step violates the stability bound."""


class BandLimit(SquidHorizonError, ValueError):
    """Drive frequency at or above the lattice passband edge."""


class NoPacket(SquidHorizonError, RuntimeError):
    """Trajectory energy is not localised enough to define a packet."""


class NoRoot(SquidHorizonError, RuntimeError):
    """Bracketing search found no sign change in the allowed interval."""


class NoHorizon(SquidHorizonError, RuntimeError):
    """Velocity profile has no horizon crossing."""


class OutOfBand(SquidHorizonError, ValueError):
    """Wavenumber outside the first Brillouin zone."""


class OutOfRange(SquidHorizonError, ValueError):
    """Requested position lies outside the sampled profile."""


class FitFailure(SquidHorizonError, RuntimeError):
    """Phase fit residual too large to trust the extracted wavenumber."""


class ConfigError(SquidHorizonError, ValueError):
    """Run configuration is structurally invalid."""


class ParseError(ConfigError):
    """Configuration file is not valid JSON."""


class UnknownKey(ConfigError):
    """Configuration contains a key the schema does not define."""
