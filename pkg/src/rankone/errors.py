"""Exception hierarchy shared by every module of the toolkit."""


class RankOneError(Exception):
    """Base class for all toolkit errors."""


class ContractError(RankOneError, ValueError):
    """Input violates a documented precondition (shapes, zero vectors, bad ranges)."""


class GenericityError(ContractError):
    """A coefficient vanishes where the assignment theory needs it nonzero."""


class ConditioningError(RankOneError, ArithmeticError):
    """A linear system or design is too ill-conditioned to trust."""


class PoleCollisionError(ContractError):
    """Evaluation point coincides with a pole of the characteristic function."""


class NearEigenvalueError(RankOneError, ArithmeticError):
    """The characteristic function (nearly) vanishes, so the resolvent does not exist."""


class NotAnEigenvalueError(ContractError):
    """A point passed as an eigenvalue of B is not one."""


class OrderUndeterminedError(RankOneError, ArithmeticError):
    """Zero-order test hit its cap without finding a nonvanishing derivative."""


class OracleError(RankOneError, RuntimeError):
    """Dense eigensolver failed or its result could not be trusted."""


class InsufficientTruncationError(RankOneError, ValueError):
    """The index window is too small for the requested localization bound."""


class ConsistencyError(RankOneError):
    """Theory-side and oracle-side answers disagree beyond tolerance (usually conditioning)."""
