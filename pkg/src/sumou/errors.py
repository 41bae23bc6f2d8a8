"""Error types shared across the package.

Invalid arguments raise the builtin ``ValueError``; the classes below mark
failures that are not the caller's fault.
"""


class ResourceLimitError(RuntimeError):
    """Requested computation exceeds a built-in size or memory cap."""


class NumericFailureError(RuntimeError):
    """A numerical routine failed to converge; message carries diagnostics."""
