"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ValidationError -> 1 (bad data or
bad request), SchemaError -> 2 (malformed/missing files, broken wiring).
"""


class EdusentError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(EdusentError):
    """A domain precondition was violated (values, labels, shapes)."""


class SchemaError(EdusentError):
    """An input file is missing, malformed, or wired to the wrong model."""
