"""Exception hierarchy"""

from typing import List, Optional


class MarketError(Exception):
    """Base class for all errors raised by the toolkit"""


class InvalidMarket(MarketError):
    """Market failed validation"""

    def __init__(self, violations: List):
        self.violations = list(violations)
        codes = ", ".join(sorted({v.code for v in self.violations}))
        super().__init__(f"Invalid market ({len(self.violations)} violations: {codes})")


class DimensionMismatch(MarketError):
    """A vector length disagrees with the market's good counts"""


class NotPermissible(MarketError):
    """Coalition breaks the spouse-inclusion rule for committed couples"""


class MalformedCoalition(MarketError):
    """Rematching is not a valid pairing on the coalition members"""


class PathLimitRequired(MarketError):
    """Path enumeration needs a length cap for this market size"""


class TooLarge(MarketError):
    """Brute-force routine asked to run beyond its size guard"""


class PriceNonPositive(MarketError):
    """Perturbation produced a non-positive price"""


class BackendUnavailable(MarketError):
    """No installed solver backend can handle the program"""


class MarketFileError(MarketError):
    """Market file could not be parsed"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class SolverFailure(MarketError):
    """Solver stopped without a usable answer (error, time or iteration limit)"""
