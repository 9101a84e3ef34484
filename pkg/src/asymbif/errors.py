"""Exception hierarchy for the toolkit.

Every error raised by the library derives from ``AsymbifError`` so callers
can fence off numerical-hypothesis failures from programming errors.
"""


class AsymbifError(Exception):
    """Base class for all toolkit errors."""


class InvalidSpecError(AsymbifError):
    """A domain object was constructed from inconsistent data."""


class InvalidPotentialError(InvalidSpecError):
    """A potential sample is non-finite or otherwise unusable."""


class EvaluationError(AsymbifError):
    """A pointwise nonlinearity evaluation produced a non-finite value."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class DomainError(AsymbifError):
    """An operation was called outside its admissible parameter region."""


class NotFredholmError(DomainError):
    """The probe value lies inside the declared essential-spectrum surrogate."""


class EmptyKernelBandError(DomainError):
    """No eigenvalue falls inside the requested spectral band."""


class BandTooWideError(DomainError):
    """The band reaches into the essential-spectrum surrogate."""


class NearSingularError(AsymbifError):
    """A shifted restricted inverse was requested too close to an eigenvalue."""


class ContractionInfeasibleError(AsymbifError):
    """The Lipschitz bound is too large for the chosen invariant splitting."""

    def __init__(self, lipschitz: float, w_inverse_bound: float):
        super().__init__(
            "contraction infeasible: lipschitz * w_inverse_bound = "
            f"{lipschitz} * {w_inverse_bound} = {lipschitz * w_inverse_bound} >= 1"
        )
        self.lipschitz = lipschitz
        self.w_inverse_bound = w_inverse_bound


class ContractionViolationError(AsymbifError):
    """Measured per-iteration contraction exceeded the certified factor."""


class MaxIterationsError(AsymbifError):
    """Fixed-point iteration failed to meet its tolerance within the budget."""


class DegenerateProbeError(DomainError):
    """A two-point probe was called with coincident points."""


class DegenerateLinearizationError(DomainError):
    """The spectral parameter coincides with a kernel-band eigenvalue."""


class NoConvergenceError(AsymbifError):
    """Newton iteration did not converge within the iteration budget."""


class SingularBorderedSystemError(AsymbifError):
    """The bordered Newton matrix is numerically singular."""


class ScanUnsupportedError(DomainError):
    """The zero-exclusion scan requires a one-dimensional kernel band."""


class ScenarioError(AsymbifError):
    """A scenario file failed schema validation or name resolution."""
