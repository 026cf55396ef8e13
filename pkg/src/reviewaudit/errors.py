"""Exception types raised across the toolkit.

Every failure a caller can act on is a distinct class so reports can carry
structured per-section errors instead of silently propagating NaNs.
"""

from __future__ import annotations


class ReviewAuditError(Exception):
    """Base class for all toolkit errors."""


class DatasetValidationError(ReviewAuditError):
    """Input records violate a dataset invariant."""


class DuplicateRecordError(DatasetValidationError):
    def __init__(self, key: tuple[str, str, str]):
        self.key = key
        super().__init__(
            f"duplicate record for (product={key[0]!r}, reviewer={key[1]!r}, "
            f"question={key[2]!r})"
        )


class IncompleteCellError(DatasetValidationError):
    """Strict policy rejected a (product, question) cell with missing ratings."""

    def __init__(self, cells: list[tuple[str, str]]):
        self.cells = cells
        shown = ", ".join(f"({p}, {q})" for p, q in cells[:5])
        more = f" and {len(cells) - 5} more" if len(cells) > 5 else ""
        super().__init__(f"incomplete (product, question) cells under strict policy: {shown}{more}")


class UnknownQuestionError(ReviewAuditError):
    def __init__(self, question: str):
        self.question = question
        super().__init__(f"question {question!r} not present in dataset")


class EmptyMatrixError(ReviewAuditError):
    """No subject has a complete set of ratings for the requested question."""


class NoCompleteProductsError(ReviewAuditError):
    """Agreement rate needs at least one product rated on every question."""


class KappaUndefinedError(ReviewAuditError):
    """All ratings fall in one category, so chance agreement is 1 and kappa
    has a zero denominator."""


class DegenerateTableError(ReviewAuditError):
    """Contingency table has a zero margin or fewer than two rows/columns."""


class DegenerateSampleError(ReviewAuditError):
    """Sample has no variance where the test statistic needs one."""


class ConvergenceError(ReviewAuditError):
    """An iterative numerical routine hit its iteration cap."""

    def __init__(self, what: str, iterations: int):
        self.what = what
        self.iterations = iterations
        super().__init__(f"{what} did not converge within {iterations} iterations")


class SeparationError(ReviewAuditError):
    """Labels are (quasi-)separable, so the logistic MLE does not exist."""

    def __init__(self, max_coefficient: float, bound: float):
        self.max_coefficient = max_coefficient
        self.bound = bound
        super().__init__(
            f"separation detected: coefficient magnitude {max_coefficient:.3g} "
            f"exceeded bound {bound:g}"
        )


class RankDeficiencyError(ReviewAuditError):
    def __init__(self, column_index: int, column_name: str):
        self.column_index = column_index
        self.column_name = column_name
        super().__init__(
            f"design matrix is rank deficient at column {column_index} ({column_name!r})"
        )


class NonBinaryTargetError(ReviewAuditError):
    def __init__(self, labels: tuple[str, ...]):
        self.labels = labels
        super().__init__(
            f"target must have exactly 2 distinct labels, found {len(labels)}: {list(labels)}"
        )


class MissingGroundTruthError(ReviewAuditError):
    def __init__(self, product_id: str):
        self.product_id = product_id
        super().__init__(f"no ground-truth classification for product {product_id!r}")


class PanelError(ReviewAuditError):
    """A difference-in-differences panel is structurally unusable."""


class ConfigError(ReviewAuditError):
    """Simulation configuration violates its invariants."""


class CsvFormatError(ReviewAuditError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        super().__init__(message)
