"""Exception hierarchy for holosim."""

from typing import Optional


class HolosimError(Exception):
    """Base class for every error raised by holosim."""


class DomainError(HolosimError, ValueError):
    """A parameter, index or dimension lies outside its allowed domain."""


class UnsupportedDegreeError(DomainError):
    """Requested moment order is beyond the supported envelope."""


class ContractViolation(HolosimError):
    """An input or intermediate result broke a documented contract."""


class InsensitiveConfigurationError(HolosimError):
    """The signal coefficient vanishes, so the covariance cannot be estimated."""


class TruncationError(HolosimError):
    """The Fock truncation leaks more probability weight than allowed."""

    def __init__(self, message: str, required_cutoff: Optional[int] = None):
        if required_cutoff is not None:
            message = f"{message} (use cutoff >= {required_cutoff})"
        super().__init__(message)
        self.required_cutoff = required_cutoff


class ConfigError(HolosimError):
    """Bad run configuration: unknown key, unparsable value or degenerate grid."""
