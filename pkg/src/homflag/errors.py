"""Exception hierarchy for the toolkit.

Every exception carries enough context (offending indices, residuals) to
diagnose the failure without re-running the computation.
"""


class HomflagError(Exception):
    """Base class for all toolkit errors."""


# ---------------------------------------------------------------------------
# Lie algebra construction
# ---------------------------------------------------------------------------

class JacobiViolation(HomflagError):
    def __init__(self, triple, residual):
        self.triple = triple
        self.residual = residual
        super().__init__(
            f"Jacobi identity fails on basis triple {triple}: residual {residual:.3e}"
        )


class NonInvariantInnerProduct(HomflagError):
    def __init__(self, triple, residual):
        self.triple = triple
        self.residual = residual
        super().__init__(
            f"inner product not ad-invariant on triple {triple}: residual {residual:.3e}"
        )


class NonPositiveInnerProduct(HomflagError):
    def __init__(self, min_eigenvalue):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"inner product not positive definite: min eigenvalue {min_eigenvalue:.3e}"
        )


class DimensionMismatch(HomflagError):
    pass


class NotASubalgebra(HomflagError):
    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"span not closed under bracket: residual {residual:.3e}")


class ReductivityViolation(HomflagError):
    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"[h, m] leaks out of m: residual {residual:.3e}")


class NotMaximalTorus(HomflagError):
    pass


class NonInvariantSubspace(HomflagError):
    pass


# ---------------------------------------------------------------------------
# Root systems
# ---------------------------------------------------------------------------

class UnsupportedType(HomflagError):
    pass


class InvalidRank(HomflagError):
    pass


# ---------------------------------------------------------------------------
# Minkowski norms
# ---------------------------------------------------------------------------

class ZeroVector(HomflagError):
    pass


class NotStronglyConvex(HomflagError):
    def __init__(self, message="fundamental tensor not positive definite"):
        super().__init__(message)


class StepTooLarge(HomflagError):
    pass


class NotAdInvariant(HomflagError):
    def __init__(self, residual, threshold):
        self.residual = residual
        self.threshold = threshold
        super().__init__(
            f"norm is not Ad(H)-invariant: residual {residual:.3e} >= {threshold:.1e}"
        )


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

class SingularGram(HomflagError):
    def __init__(self, message="Gram matrix g(u) is not positive definite"):
        super().__init__(message)


class NotAdmissible(HomflagError):
    def __init__(self, residual, threshold):
        self.residual = residual
        self.threshold = threshold
        super().__init__(
            f"pole fails the admissibility condition: residual {residual:.3e} >= {threshold:.1e}"
        )


class NotCommuting(HomflagError):
    def __init__(self, residual, threshold):
        self.residual = residual
        self.threshold = threshold
        super().__init__(
            f"pair does not commute: |[u,v]| = {residual:.3e} >= {threshold:.1e}"
        )


class DegenerateFlag(HomflagError):
    pass


# ---------------------------------------------------------------------------
# Scanner / CLI
# ---------------------------------------------------------------------------

class NumericalStall(HomflagError):
    pass


class AssertPositiveFailed(HomflagError):
    def __init__(self, verdict, min_curvature):
        self.verdict = verdict
        self.min_curvature = min_curvature
        super().__init__(
            f"positivity assertion failed: verdict={verdict}, min K={min_curvature:.6e}"
        )


class ConfigError(HomflagError):
    pass
