"""
Error hierarchy for the lab
Command modules map these onto process exit codes
"""


class LabError(Exception):
    """Base class for every error raised by cocycle-lab"""

    exit_code = 1


class ConfigurationError(LabError, ValueError):
    """Invalid spec, parameter or dimension mismatch"""

    exit_code = 2


class UnsupportedOperationError(LabError):
    """Operation not defined for the given system type"""

    exit_code = 2


class ResourceLimitError(LabError):
    """Horizon bound exceeded or an unbounded carry chain"""

    exit_code = 3


class SearchExhaustedError(LabError):
    """Brute-force search ran out of budget without a match"""

    exit_code = 1


class InsufficientDataError(LabError):
    """Too few horizons or samples for a monitor to say anything"""

    exit_code = 1
