"""Exception hierarchy for the hede package."""


class HedeError(Exception):
    """Base class for all recoverable estimation failures."""


class ConstantColumn(HedeError, ValueError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"genotype column {column} is monomorphic (zero variance)")


class TooFewSamples(HedeError, ValueError):
    pass


class DimensionMismatch(HedeError, ValueError):
    pass


class NotConverged(HedeError, RuntimeError):
    """Raised by iterative solvers; ``result`` holds the last iterate."""

    def __init__(self, message, result=None, diagnostics=None):
        super().__init__(message)
        self.result = result
        self.diagnostics = diagnostics or {}


class DegenerateDf(HedeError, ArithmeticError):
    def __init__(self, n, df):
        self.n = n
        self.df = df
        super().__init__(f"n - df = {n - df:.6g} is below the floor for n = {n}")


class EmptyGrid(HedeError, ValueError):
    """No tuning parameter passed the degrees-of-freedom filter."""

    def __init__(self, message, df_range_lasso=None, df_range_ridge=None):
        super().__init__(message)
        self.df_range_lasso = df_range_lasso
        self.df_range_ridge = df_range_ridge


class DegenerateResponse(HedeError, ValueError):
    pass


class NoBracket(HedeError, ValueError):
    pass


class NoNonzeros(HedeError, ValueError):
    pass


class SingularBlock(HedeError, ArithmeticError):
    pass


class NonFiniteInput(HedeError, ValueError):
    """The response or design contains NaN or infinite values."""
