"""Exception hierarchy shared across the package."""


class EstimationError(Exception):
    """Base class for all multiphase errors."""


class NotHermitianError(EstimationError):
    """Matrix violates the Hermitian symmetry tolerance."""


class NotSquareError(EstimationError):
    """Operation requires a square matrix."""


class NotUnitaryError(EstimationError):
    """Matrix violates the unitarity tolerance."""


class DimensionMismatchError(EstimationError):
    """Operand shapes are incompatible."""


class ComplexGramError(EstimationError):
    """Pairwise inner products have imaginary parts beyond tolerance.

    Raised by the real-coefficient Gram-Schmidt when the input span does
    not admit real expansion coefficients; downstream this signals a
    weak-commutativity failure.
    """


class SizeOverflowError(EstimationError):
    """Requested basis exceeds the configured dimension cap."""


class BasisMismatchError(EstimationError):
    """States or projectors refer to different Fock bases."""


class IncompleteSetError(EstimationError):
    """A complete projector set is required."""


class LimitNonConvergentError(EstimationError):
    """Richardson extrapolation steps disagree beyond the policy tolerance."""


class StepTooLargeError(EstimationError):
    """Finite-difference step too coarse for the probability landscape."""


class WeakCommutativityError(EstimationError):
    """No projective measurement can saturate: Im(Omega) is too large."""

    def __init__(self, residual, message=None):
        self.residual = float(residual)
        super().__init__(message or f"weak commutativity violated: max |Im Omega| = {residual:.3e}")


class MixInfeasibleError(EstimationError):
    """Mixing rotation cannot keep all probe overlaps above threshold."""


class InternalInconsistencyError(EstimationError):
    """Theory and numerics disagree; never swallowed."""
