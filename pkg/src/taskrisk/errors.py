"""Exception hierarchy and warning categories.

Two error families map onto the CLI exit codes: ``ValidationError`` (bad
input, bad configuration, bad parameters; exit code 2) and
``NumericalError`` (singular matrices, failed convergence, undefined
statistics; exit code 3).
"""


class TaskRiskError(Exception):
    """Base class for all package errors."""


class ValidationError(TaskRiskError):
    """Invalid input data, configuration, or call parameters."""


class InputFormatError(ValidationError):
    """Malformed file structure (missing header, wrong columns)."""


class InputValidationError(ValidationError):
    """One or more data rows failed field validation.

    ``problems`` is a list of ``(line_number, message)`` pairs.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = "; ".join(f"line {ln}: {msg}" for ln, msg in self.problems)
        super().__init__(f"{len(self.problems)} invalid row(s): {lines}")


class DuplicateKeyError(ValidationError):
    """A key that must be unique appeared more than once."""


class EmptyCorpusError(ValidationError):
    """No occupation survived matrix construction."""


class DegenerateColumnError(ValidationError):
    """A column is constant and cannot be standardized."""


class ParameterError(ValidationError):
    """A call parameter is outside its documented domain."""


class ConfigError(ValidationError):
    """Pipeline configuration document is invalid."""


class MissingInputError(ValidationError):
    """A configured input path does not exist."""


class UndefinedSilhouetteError(ParameterError):
    """Silhouette requested with fewer than two non-empty clusters."""


class EmptyGroupError(ValidationError):
    """A trend comparison group has no usable occupations."""


class NumericalError(TaskRiskError):
    """Numeric failure during computation."""


class SingularMatrixError(NumericalError):
    """Matrix is singular or not positive definite where required."""


class ConvergenceError(NumericalError):
    """An iterative routine hit its iteration limit."""


class UndefinedKMOError(NumericalError):
    """KMO is 0/0 because all off-diagonal correlations vanish."""


class HeywoodWarning(UserWarning):
    """A communality exceeded 1 and was clamped."""


class ConditioningWarning(UserWarning):
    """A matrix is close to singular; results may be inaccurate."""


class TieWarning(UserWarning):
    """A deterministic tie-break was applied at a quantile cutoff."""
