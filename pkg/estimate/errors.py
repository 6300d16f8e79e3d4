"""
Error types shared by every module of the copula break test.

All library failures derive from CopulaBreakError so the CLI can map them to
a single exit code; validators in validate/ never raise, they return
(is_valid, errors) instead.
"""


class CopulaBreakError(ValueError):
    """Base class for every library error"""


class SampleError(CopulaBreakError):
    """Observation matrix is not usable (shape, size or non-finite values)"""


class BreakSpecError(CopulaBreakError):
    """Break indices are not strictly increasing interior indices"""


class EmptySegmentError(CopulaBreakError):
    def __init__(self, message: str = "empty segment"):
        super().__init__(message)


class EmptyWindowError(CopulaBreakError):
    def __init__(self, message: str = "empty window"):
        super().__init__(message)


class DomainError(CopulaBreakError):
    def __init__(self, message: str = "domain"):
        super().__init__(message)


class BandwidthError(CopulaBreakError):
    def __init__(self, message: str = "bandwidth exceeds series length"):
        super().__init__(message)


class NoReplicatesError(CopulaBreakError):
    def __init__(self, message: str = "no replicates"):
        super().__init__(message)


class CopulaParameterError(CopulaBreakError):
    """Kendall's tau or copula parameter outside the family's range"""


class ScenarioError(CopulaBreakError):
    """Simulation scenario cannot be generated as described"""


class GridError(CopulaBreakError):
    """Grid file is missing, malformed or semantically invalid"""


class ReplicateError(CopulaBreakError):
    """A Monte Carlo replicate failed; carries the replicate index"""

    def __init__(self, replicate: int, cause: Exception):
        self.replicate = replicate
        self.cause = cause
        super().__init__(f"replicate {replicate}: {cause}")


class SegmentWarning(UserWarning):
    """A break segment is too short for the asymptotics to be meaningful"""
