"""Exception hierarchy shared across the library.

The CLI maps these onto process exit codes: config errors exit 2,
numerical failures exit 3, invariant violations exit 4.
"""


class AtomCavityError(Exception):
    """Base class for all library errors."""


class DomainError(AtomCavityError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ParameterError(AtomCavityError, ValueError):
    """Inconsistent or invalid model parameters."""


class NodeError(DomainError):
    """Operation undefined at a node of the mode function (cos x = 0)."""


class IntegrationError(AtomCavityError, RuntimeError):
    """Numerical integration failed."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class StepSizeUnderflowError(IntegrationError):
    """Adaptive step size shrank below the representable limit."""


class NonFiniteStateError(IntegrationError):
    """State vector left the finite floating-point range."""


class InvariantViolationError(AtomCavityError, RuntimeError):
    """A tracked conserved quantity drifted beyond its tolerance."""


class ConfigError(AtomCavityError, ValueError):
    """Run configuration failed validation."""


class CorrelationFitError(AtomCavityError, RuntimeError):
    """Spectrum is not Lorentzian-like; no correlation time extracted."""

    def __init__(self, message, tau_c=None, fit_residual=None):
        super().__init__(message)
        self.tau_c = tau_c
        self.fit_residual = fit_residual


class TruncationError(AtomCavityError, RuntimeError):
    """Fock-space truncation left too much probability in the tail."""
