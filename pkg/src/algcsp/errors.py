"""Exception types shared across the package."""


class AlgebraError(ValueError):
    """Malformed algebra, term or subset."""


class SizeBoundError(AlgebraError):
    """Input exceeds the bound an exhaustive routine accepts."""


class InstanceError(ValueError):
    """Malformed or unsupported CSP instance."""


class NonAffineRelationError(InstanceError):
    """A relation is not a coset of a subspace over the prime field."""


class WitnessError(RuntimeError):
    """A constructed witness failed re-verification.

    Raised instead of returning an unverified answer; the CLI maps it to
    exit status 3.
    """
