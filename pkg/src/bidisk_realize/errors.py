"""Exception hierarchy.

Every error raised by the library derives from :class:`BidiskError`.
Errors about unusable input also derive from :class:`InputError`, which the
CLI maps to its input-error exit code.
"""


class BidiskError(Exception):
    """Base class for all library errors."""


class InputError(BidiskError, ValueError):
    """Malformed or out-of-contract input."""


class DenominatorZero(InputError):
    pass


class DenominatorZeroAtOrigin(DenominatorZero):
    pass


class DegenerateSlice(BidiskError):
    """A slice of the denominator vanishes identically (common factor)."""


class FloatInput(InputError):
    """An exact-only routine received float-tagged coefficients."""


class ExactRequired(InputError):
    """A degenerate float input needs exact coefficients to proceed."""


class NotHermitian(InputError):
    pass


class NotPSD(InputError):
    pass


class NotPSDOnCircle(NotPSD):
    pass


class RankDeficient(InputError):
    pass


class SingularDeterminant(InputError):
    pass


class NoConvergence(BidiskError):
    """An iterative or extraction procedure failed; ``diagnostics`` has details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class MismatchedGram(InputError):
    pass


class NotIsoInner(InputError):
    pass


NotIsoInnerOnCircle = NotIsoInner


class NotInner(InputError):
    pass


class NotSquare(InputError):
    pass


class NotContraction(InputError):
    pass


NotContractiveOnCircle = NotContraction


class NotStrictContraction(NotContraction):
    pass


class NotStrictlyPositive(InputError):
    pass


class CesaroOrderExhausted(NoConvergence):
    pass


class DegreeExceeded(InputError):
    pass


class RemainderNonzero(BidiskError):
    """A kernel that should be divisible by ``1 - conj(w) z`` is not."""


class SliceUnstable(BidiskError):
    pass


class ClearingFailed(BidiskError):
    """A rational expression expected to be polynomial did not clear."""


class InconsistentData(BidiskError):
    pass


class DimensionMismatch(InputError):
    pass


class StageError(BidiskError):
    """Wraps a failure inside the two-variable pipeline with its step number."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause
