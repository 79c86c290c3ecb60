"""Exception hierarchy shared across the package."""


class SurfcutError(Exception):
    """Base class for all errors raised by this package."""


class NonMonotoneMapping(SurfcutError):
    """Column positions are not strictly increasing."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"positions not strictly increasing at index {index}")


class NonFiniteValue(SurfcutError):
    """A value that must be finite is NaN or infinite."""


class IndexOutOfRange(SurfcutError):
    """Level index outside the valid range for a column."""


class NegativeDataCost(SurfcutError):
    """Data costs must be shifted nonnegative before graph assembly."""


class CapacityOverflow(SurfcutError):
    """Scaled capacities exceed the safe integer range; lower the scale."""


class Infeasible(SurfcutError):
    """No labeling satisfies the separation constraints (every cut is infinite)."""


class InternalInconsistency(SurfcutError):
    """A solver invariant was violated; indicates a bug, not bad input."""


class LabelOutOfRange(SurfcutError):
    """Surface label outside [0, Z-1]."""


class SearchSpaceTooLarge(SurfcutError):
    """Brute-force enumeration guard tripped."""


class ProbabilityOutOfRange(SurfcutError):
    """Probability volume contains values outside [0, 1]."""


class ColumnSetMismatch(SurfcutError):
    """Two per-column surfaces do not cover the same columns."""


class EmptySurface(SurfcutError):
    """Surface point set is empty."""


class DimMismatch(SurfcutError):
    """Array dimensions do not agree."""


class ZeroReferenceArea(SurfcutError):
    """Reference area is zero; relative area difference undefined."""


class EmptyContour(SurfcutError):
    """Contour point list is empty."""


class SurfacesOutOfOrder(SurfcutError):
    """Phantom surfaces must be strictly ordered bottom to top."""


class FactorExceedsDim(SurfcutError):
    """Downsampling factor larger than the corresponding dimension."""


class UnstableStep(SurfcutError):
    """User-forced diffusion time step violates the stability bound."""


class ConfigInvalid(SurfcutError):
    """Pipeline configuration is malformed or incomplete."""
