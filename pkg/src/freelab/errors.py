"""Exception types shared by all modules."""


class FreelabError(Exception):
    """Base class for library errors."""


class DomainError(FreelabError, ValueError):
    """Input lies outside the set where the requested quantity is defined."""


class ConfigError(FreelabError, ValueError):
    """Malformed specification or run configuration."""


class NumericalError(FreelabError, RuntimeError):
    """A numerical procedure failed to reach its tolerance."""


class DivergentMomentError(DomainError):
    """The requested moment is infinite."""
