"""Exception types shared across the toolkit.

Config problems and numerical failures are kept distinct so the command-line
front end can map them to different exit codes.
"""


class ConfigError(ValueError):
    """Bad configuration: unknown key, unparsable value, or out-of-range parameter."""


class DataFormatError(ValueError):
    """A data file does not match its declared column schema."""


class IntegrationError(RuntimeError):
    """The master-equation integrator failed or violated a conservation check."""


class TruncationError(RuntimeError):
    """Probability reached the top of a truncated Fock space; results untrustworthy."""


class FitError(RuntimeError):
    """A fit failed to bracket or refine a minimum."""
