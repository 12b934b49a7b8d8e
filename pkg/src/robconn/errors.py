"""Exception types shared across the package."""


class RobconnError(Exception):
    pass


class InvalidGraphError(RobconnError, ValueError):
    pass


class NotSymmetricError(RobconnError, ValueError):
    pass


class DisconnectedError(RobconnError):
    """The graph Laplacian has lambda_2 at (or below) tolerance."""


class OutOfDomainError(RobconnError, ValueError):
    pass


class NotNeighborsError(RobconnError, KeyError):
    pass


class OutsideDomainError(RobconnError, ValueError):
    """An agent position is not strictly inside the spherical domain."""


class PreconditionViolated(RobconnError, ValueError):
    pass


class DimensionMismatch(RobconnError, ValueError):
    pass


class ConfigInvalid(RobconnError, ValueError):
    pass


class NumericalBlowup(RobconnError, FloatingPointError):
    pass
