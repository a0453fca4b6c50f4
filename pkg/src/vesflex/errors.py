"""Exception types shared across the package.

The CLI maps these onto exit codes: bad or inconsistent input data is an
InputError (exit 2), while a well-posed problem with no feasible answer is
an InfeasibleError (exit 1).
"""


class VesflexError(Exception):
    """Base class for all package errors."""


class InputError(VesflexError):
    """Malformed, inconsistent, or out-of-range input data."""


class ShapeError(InputError):
    """Array lengths or sampling grids that do not line up."""


class PowerRangeError(InputError):
    """A demand trajectory outside the physical range [0, p_rated]."""


class ChannelMissingError(InputError):
    """QoS bounds reference a signal channel that was not supplied."""


class InfeasibleError(VesflexError):
    """No trajectory satisfies the stated constraints."""


class SolverError(VesflexError):
    """Internal optimizer failure (iteration limit, numerical breakdown)."""
