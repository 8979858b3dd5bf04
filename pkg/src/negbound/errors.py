"""Exception hierarchy.

Errors derived from :class:`NoiseError` mean the moment data at the order being
processed cannot support a bound. The pipeline catches them and retries at a
lower order; everything else propagates.
"""


class NegboundError(Exception):
    """Base class for all package errors."""


class InputError(NegboundError, ValueError):
    """Structurally invalid input (bad dimensions, gaps in orders, schema)."""


class EigensolverError(NegboundError):
    """Dense eigendecomposition did not converge."""


class NoiseError(NegboundError):
    """Moment data inconsistent at this order; caller should degrade."""


class DegenerateBackstep(NoiseError):
    """No determinant constraint can lift the zeroth moment into feasibility."""


class DegeneratePolynomial(NoiseError):
    """Characteristic determinant vanishes identically."""


class ComplexRoots(NoiseError):
    pass


class RootOutOfRange(NoiseError):
    pass


class VandermondeConditioning(NoiseError):
    """Roots too close together to determine the weights."""


class InconsistentWeights(NoiseError):
    """A solved weight is negative beyond tolerance."""


class AmbiguousKernel(NoiseError):
    """Singular recovery found no (or more than one) null direction."""


class PrecheckFailed(NoiseError):
    """Shifted pre-check is infeasible and the pipeline runs in enforce mode."""


class NoFeasibleOrder(NegboundError):
    """Every order from ``max_order`` down to 3 failed."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
