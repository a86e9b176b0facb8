"""Exception hierarchy.

Three broad families matter to callers (and to the CLI exit codes):
input/parse problems, structural validation problems, and numerical
failures.  Everything derives from :class:`CoverTimeError`.
"""


class CoverTimeError(Exception):
    """Base class for all errors raised by this package."""


class InputFormatError(CoverTimeError):
    """A file or option string could not be parsed."""


class ValidationError(CoverTimeError):
    """Structurally invalid input (bad graph, bad parameters)."""


class SelfLoopError(ValidationError):
    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(f"self-loop at vertex {vertex}")


class ConductanceError(ValidationError):
    def __init__(self, u, v, value):
        self.u, self.v, self.value = u, v, value
        super().__init__(f"non-positive conductance {value!r} on edge ({u}, {v})")


class DisconnectedError(ValidationError):
    def __init__(self, component_count):
        self.component_count = component_count
        super().__init__(
            f"graph is not connected ({component_count} components)"
        )


class GlueSetError(ValidationError):
    """Quotient glue set is empty or covers all vertices."""


class ReductionSizeError(ValidationError):
    """Star-mesh reduction needs at least 3 vertices."""


class GeneratorParamError(ValidationError):
    """Bad parameters for a graph family generator."""


class MetricError(ValidationError):
    """Distance table fails the finite-metric axioms."""


class MetricTooLargeError(ValidationError):
    """Exact gamma2 enumeration is limited to small point sets."""


class NumericalError(CoverTimeError):
    """A numerical procedure failed or exhausted its retry budget."""


class FactorizationError(NumericalError):
    def __init__(self, message, condition_estimate=None):
        self.condition_estimate = condition_estimate
        if condition_estimate is not None:
            message = f"{message} (condition estimate {condition_estimate:.3e})"
        super().__init__(message)


class SketchValidationError(NumericalError):
    def __init__(self, worst_ratio, attempts, k):
        self.worst_ratio = worst_ratio
        self.attempts = attempts
        self.k = k
        super().__init__(
            f"sketch validation failed after {attempts} attempts "
            f"(k={k}, worst pair ratio {worst_ratio:.4f})"
        )


class StepBudgetError(NumericalError):
    def __init__(self, budget):
        self.budget = budget
        super().__init__(
            f"random-walk step budget of {budget:.3g} jumps exceeded; "
            "the stopping rule may be unattainable"
        )
