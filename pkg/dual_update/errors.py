"""
Exceptions raised by the dual-update package.

Value-shaped failures subclass ``ValueError`` as well as ``DualUpdateError``,
so ``except ValueError`` keeps catching bad inputs. Numerical breakdowns
subclass ``ArithmeticError``.
"""


class DualUpdateError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(DualUpdateError, ValueError):
    """Operand shapes do not fit together."""


class DimensionTooLarge(DualUpdateError, ValueError):
    """A site or composite dimension exceeds the configured cap."""


class NotHermitian(DualUpdateError, ValueError):
    """A matrix expected to be Hermitian is not, within HERM_TOL."""


class NotAState(DualUpdateError, ValueError):
    """A vector or matrix fails the pure/density state invariants."""


class UnknownOutcome(DualUpdateError, ValueError):
    """The requested outcome is not an eigenvalue of the observable."""


class ZeroProbabilityOutcome(DualUpdateError, ValueError):
    """Conditioning on an outcome (or event) of probability zero."""

    def __init__(self, outcome: float, probability: float):
        self.outcome = outcome
        self.probability = probability
        super().__init__(
            f"zero-probability outcome {outcome!r} (p={probability:.3e})"
        )


class SiteMismatch(DualUpdateError, ValueError):
    """Invalid site index, or an operator that does not fit the site."""


class NotPure(DualUpdateError, ValueError):
    """A pure-state operation was called on a density operator."""


class NotCompatible(DualUpdateError, ValueError):
    """Observables do not commute, so no joint distribution exists."""


class InvalidProbabilitySpace(DualUpdateError, ValueError):
    """Weights are negative, do not sum to one, or atoms are malformed."""


class PartialRandomVariable(DualUpdateError, ValueError):
    """A random variable has no value on some atom."""


class NotSiteStructured(DualUpdateError, ValueError):
    """A product-space operation was called on an unstructured space."""


class EmptySubensemble(DualUpdateError, ValueError):
    """A sample filter selected no records."""


class SignalingBehavior(DualUpdateError, ValueError):
    """Site marginals of a behavior depend on the other site's setting."""


class OutcomeArity(DualUpdateError, ValueError):
    """An observable does not have exactly two spectral clusters."""


class IterationFailure(DualUpdateError, ArithmeticError):
    """The eigen-solver failed to converge."""


class FeasibilityDisagreement(DualUpdateError, ArithmeticError):
    """The LP feasibility search and the CHSH criterion disagree."""


class ScenarioSyntaxError(DualUpdateError, SyntaxError):
    """A scenario or behavior file could not be parsed.

    Attributes:
        line (int): 1-based line number of the offending text.
        column (int): 1-based column number of the offending text.
    """

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")
