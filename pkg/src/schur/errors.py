"""Error types shared across the package.

The CLI maps these onto its exit-code contract, so library code should
raise the most specific one that applies.
"""


class SchurError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(SchurError):
    """Vectors/subspaces with incompatible moduli, lengths or ambients."""


class ValidationError(SchurError):
    """Structurally malformed presentation or parameter."""


class NotSpecialError(ValidationError):
    """Operation requires a special group (G' = Z(G) = W) and got something else."""


class UnsupportedShapeError(SchurError):
    """Input outside the supported shape (e.g. recognition with k >= 2)."""


class BudgetExceededError(SchurError):
    """Requested computation exceeds the documented desk-scale budget."""


class CapExceededError(BudgetExceededError):
    """Group order exceeds the homology-oracle cap."""


class ParseError(SchurError):
    """Unreadable input file or catalog descriptor."""
