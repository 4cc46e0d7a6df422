"""
패키지 전체에서 쓰는 예외 타입
"""


class BellSimError(Exception):
    "bellsim 예외의 공통 부모"
    pass


class ValidationError(BellSimError, ValueError):
    "Raised when an object violates one of its type invariants."

    def __init__(self, message: str, invariant: str = "unspecified"):
        super().__init__(message)
        self.invariant = invariant


class DimensionMismatchError(ValidationError):
    "Raised when tensor factor dimensions do not line up."

    def __init__(self, message: str):
        super().__init__(message, invariant="dimension")


class SolverError(BellSimError, RuntimeError):
    "Raised when an LP or optimizer fails outright (never silently)."
    pass
