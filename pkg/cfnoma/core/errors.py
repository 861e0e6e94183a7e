from typing import Sequence


class CfNomaError(Exception):
    """Base class of every error raised by cfnoma."""


class InvalidInputError(CfNomaError, ValueError):
    """Arguments outside an operation's domain."""


class InvalidConfigError(InvalidInputError):
    """A SystemConfig that cannot be used for the requested computation (e.g. K <= pilot length)."""


class InvalidClusteringError(InvalidInputError):
    """A clustering that does not partition the UEs exactly once."""


class EmptyClusterError(CfNomaError):
    """
    Raised when a centroid update meets clusters without members.

    Members:
    - clusters: indices of the empty clusters
    """
    def __init__(self, clusters: Sequence[int]):
        self.clusters = list(clusters)
        super().__init__(f"empty clusters: {self.clusters}")


class InvalidPointError(CfNomaError):
    """An expansion point that violates the convexified constraint set."""


class InitializationError(CfNomaError):
    """The first inner-approximation subproblem could not be solved."""


class ConfigParseError(CfNomaError):
    """
    A scenario file could not be read or validated.

    Members:
    - key_path: dotted path of the offending key, empty when the whole document is at fault
    """
    def __init__(self, message: str, key_path: str = ""):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)
