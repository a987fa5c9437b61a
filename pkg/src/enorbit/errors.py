"""Exception types shared across the package."""


class EnorbitError(Exception):
    """Base class for all errors raised by enorbit."""


class InvalidParameter(EnorbitError):
    """A constructor argument violates its documented range."""


class GridTooCoarse(EnorbitError):
    """Sample grid has fewer nodes than the anti-aliasing floor requires."""


class DegenerateLoop(EnorbitError):
    """Loop is (numerically) the zero loop and the operation needs a nonzero one."""


class RootNotBracketed(EnorbitError):
    """The scaling equation g(a*u) = h has no root along this direction.

    On the expansion side this signals that the energy level sits at or
    above the asymptotic ceiling of g along the ray through u.
    """


class NonMonotoneScaling(EnorbitError):
    """Sign change detected in d/da g(a*u); the scaling map is not monotone here."""

    def __init__(self, message, a=None):
        super().__init__(message)
        self.a = a


class VanishingConstraintGradient(EnorbitError):
    """Constraint gradient too small relative to the objective gradient to project."""


class StallError(EnorbitError):
    """Line search could not find descent at machine-level step size."""


class NoConvergedStart(EnorbitError):
    """Every start of a multi-start run failed to converge.

    ``outcomes`` holds one entry per start: (start_index, seed, reason string).
    """

    def __init__(self, message, outcomes):
        super().__init__(message)
        self.outcomes = outcomes


class NonpositiveForce(EnorbitError):
    """The force integral is not positive, so no period can be recovered."""


class IntegratorBlowup(EnorbitError):
    """Check integration left the trust region (|q| beyond the blowup radius)."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(EnorbitError):
    """Bad or inconsistent run configuration; message names the offending key."""
