"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ValidationError -> 2, I/O errors
(OSError, malformed JSON) -> 3, InvariantError -> 4.
"""


class TopicBenchError(Exception):
    pass


class ValidationError(TopicBenchError, ValueError):
    """Bad input data or arguments (file contents, flags, schemas)."""


class InvariantError(TopicBenchError, RuntimeError):
    """An internal consistency check failed; indicates a bug."""
