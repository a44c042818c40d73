"""
Error types for the rough-wall toolkit
Input problems subclass ValueError so callers can catch them generically
"""
from typing import Optional


class RoughSlipError(Exception):
    """Base class for every error raised by the toolkit"""


class ConfigError(RoughSlipError, ValueError):
    """Invalid study configuration; the message lists every failing location"""

    def __init__(self, message: str, locations: Optional[list] = None):
        super().__init__(message)
        self.locations = locations or []


class InputError(RoughSlipError, ValueError):
    pass


class ContractError(RoughSlipError, ValueError):
    """A documented precondition of an operation does not hold"""


class DomainMembershipError(RoughSlipError, ValueError):
    """A point lies below the rough wall"""


class DecayViolationError(RoughSlipError, ValueError):
    """Source or profile does not decay fast enough away from the wall"""

    def __init__(self, message: str, tail_ratio: float = float("nan")):
        super().__init__(message)
        self.tail_ratio = tail_ratio


class CompatibilityError(RoughSlipError, ValueError):
    """Neumann data violate the solvability condition"""

    def __init__(self, message: str, mismatch: float):
        super().__init__(f"{message} (mismatch {mismatch:.3e})")
        self.mismatch = mismatch


class ArityError(RoughSlipError, ValueError):
    """Not enough inputs (wall-jet orders, sweep points, ...)"""


class ResolutionError(RoughSlipError, ValueError):
    """Grid does not resolve the layer it is asked to measure"""


class GridMismatchError(RoughSlipError, ValueError):
    pass


class DependencyError(RoughSlipError):
    """A cascade order was requested before the orders it depends on"""


class InternalConsistencyError(RoughSlipError):
    """A structural identity of the construction failed numerically"""


class CFLViolationError(RoughSlipError):
    def __init__(self, message: str, cfl: float):
        super().__init__(f"{message} (CFL {cfl:.3f})")
        self.cfl = cfl


class SolverConvergenceError(RoughSlipError):
    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(f"{message} after {iterations} iterations (residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class StorageError(RoughSlipError):
    pass
