"""Domain errors. All are ValueError subclasses so callers may catch them broadly."""
from typing import List, NamedTuple


class RowIssue(NamedTuple):
    """A single ingestion problem, tied to its 1-based line number in the source."""
    row: int
    message: str

    def __str__(self) -> str:
        return f"row {self.row}: {self.message}"


class DatasetSchemaError(ValueError):
    """The input lacks required columns or cannot be read as CSV at all."""


class DatasetParseError(ValueError):
    """One or more data rows are invalid (raised at the first issue in strict mode)."""

    def __init__(self, issues: List[RowIssue]):
        self.issues = list(issues)
        first = self.issues[0] if self.issues else "no details"
        more = f" (+{len(self.issues) - 1} more)" if len(self.issues) > 1 else ""
        super().__init__(f"Invalid match data at {first}{more}")


class PeriodSpecError(ValueError):
    """A season-period layout overlaps, is empty, or does not cover the data."""


class NoSolutionError(ValueError):
    """A requested target probability cannot be reached by any share in [0, 1]."""
