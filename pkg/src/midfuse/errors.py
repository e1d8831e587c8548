"""Exception types raised across the package."""


class MidfuseError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(MidfuseError, ValueError):
    pass


class NotPositiveDefinite(MidfuseError, ValueError):
    pass


class SingularMatrix(MidfuseError, ValueError):
    pass


class TooFewPoints(MidfuseError, ValueError):
    pass


class InvalidDimension(MidfuseError, ValueError):
    pass


class NoInherentViews(MidfuseError, ValueError):
    pass


class TooManyViews(MidfuseError, ValueError):
    pass


class DegenerateFeature(MidfuseError, ValueError):
    """A feature is constant, so its correlation with others is undefined."""


class IndexOutOfRange(MidfuseError, IndexError):
    pass


class IllPosedCoupling(MidfuseError, ValueError):
    """Coupling matrix is not strictly diagonally dominant."""


class PartitionMismatch(MidfuseError, ValueError):
    pass


class LengthMismatch(MidfuseError, ValueError):
    pass


class DegenerateGraph(MidfuseError, ValueError):
    """Some node of the affinity graph has zero degree."""


class SingleCluster(MidfuseError, ValueError):
    pass


class ClassTooSmall(MidfuseError, ValueError):
    pass


class ConfigError(MidfuseError, ValueError):
    pass
