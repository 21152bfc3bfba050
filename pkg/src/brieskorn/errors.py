"""Exception types shared across the package."""

from __future__ import annotations


class BrieskornError(Exception):
    """Base class for all package errors."""


class ParseError(BrieskornError):
    """Raised on malformed polynomial expressions; carries the offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InputError(BrieskornError):
    """Invalid mathematical input (violated precondition, bad domain data)."""


class InconclusiveError(BrieskornError):
    """A bounded computation did not stabilize within its configured caps.

    This is never a silent wrong answer: callers must either raise the caps
    or report the inconclusive outcome (CLI exit code 2).
    """

    def __init__(self, message: str, **context):
        if context:
            detail = ", ".join(f"{k}={v}" for k, v in sorted(context.items()))
            message = f"{message} [{detail}]"
        super().__init__(message)
        self.context = context
