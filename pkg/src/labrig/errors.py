"""Exception types shared across the harness."""

from __future__ import annotations


class LabrigError(Exception):
    """Base class for all harness errors."""


class ValidationError(LabrigError):
    """Invalid input data. `field` names the offending field when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ConflictError(LabrigError):
    """Refused because the operation would clobber existing state."""


class GrammarError(LabrigError):
    """A structured-text parse failure with a machine-readable code.

    `offset` is the byte offset into the input at which the problem was
    detected.
    """

    def __init__(self, code: str, message: str, offset: int):
        super().__init__(f"{code} at offset {offset}: {message}")
        self.code = code
        self.offset = offset


class ReportError(LabrigError):
    """Report or checklist artifact failed validation.

    `locations` holds one human-readable string per offending spot,
    e.g. ``report.tex:12: E001 missing Hypothesis``.
    """

    def __init__(self, locations: list[str]):
        super().__init__("; ".join(locations))
        self.locations = list(locations)


class LedgerError(LabrigError):
    """Experiment history is unreadable or internally inconsistent."""


class GuardrailRefused(LabrigError):
    """An action was blocked by one or more guardrail violations."""

    def __init__(self, violations):
        details = "; ".join(v.detail for v in violations)
        super().__init__(f"refused by guardrails: {details}")
        self.violations = list(violations)


class SupervisorError(LabrigError):
    """Process supervision failure (spawn, wait, or log access)."""


class SchedulerError(LabrigError):
    """Dispatch or allocation failure."""
