"""Exception hierarchy shared by every module.

Each class carries an ``exit_code`` so the command-line front end can map
failures to process status without a lookup table.
"""


class DpaError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InvalidDimensionError(DpaError, ValueError):
    exit_code = 2


class ContractError(DpaError, ValueError):
    """An input violated a documented precondition (e.g. non-Hermitian)."""

    exit_code = 2


class ConfigError(DpaError, ValueError):
    exit_code = 2


class TruncationError(DpaError):
    """The Fock cutoff is too small for the requested accuracy.

    ``required_cutoff`` is an estimate of the per-mode cutoff that would
    satisfy the tolerance, when one can be computed.
    """

    exit_code = 4

    def __init__(self, message, required_cutoff=None, tail_mass=None):
        super().__init__(message)
        self.required_cutoff = required_cutoff
        self.tail_mass = tail_mass


class RegionError(TruncationError):
    """A phase-space point lies outside the region where a truncated
    displacement is trustworthy."""


class WitnessUndefinedError(DpaError):
    exit_code = 3


class ConvergenceError(DpaError):
    """Quadrature refinement hit its cap without meeting the tolerance."""

    exit_code = 3

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)
