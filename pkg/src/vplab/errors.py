"""Exception types shared across the package."""


class VplabError(Exception):
    """Base of every error raised deliberately by this package."""


class ResolutionError(VplabError, ValueError):
    """Grid too coarse for the requested mollification radius."""


class DomainError(VplabError, ValueError):
    """Parameter outside the domain where an operation is defined."""


class NormalizationError(VplabError, ValueError):
    """A density does not carry the expected mass."""


class ParameterMismatchError(VplabError, ValueError):
    """Two objects that must share (eps, r, d) do not."""


class SupportError(VplabError, RuntimeError):
    """Phase-space density reached the edge of the velocity box."""


class CFLError(VplabError, ValueError):
    """Time step too large for the transport or oscillation scale."""


class SizeError(VplabError, ValueError):
    """Problem too large for the exact transport solver."""


class AdmissibilityError(VplabError, ValueError):
    """(N, eps, r) combination outside the admissible regime."""


class NonFiniteStateError(VplabError, FloatingPointError):
    """Particle state became NaN or infinite."""
