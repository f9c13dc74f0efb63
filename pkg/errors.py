"""
Exceptions raised by the nilmanifold toolkit.

Every error is a ValueError so callers that only care about "bad input"
can catch one type; the CLI maps all of them to exit code 2.
"""

from typing import Any, Optional, Sequence


class NilError(ValueError):
    """Base class for all toolkit errors"""


class SpecParseError(NilError):
    """A group-spec file or polynomial string could not be parsed"""


class DescriptorParseError(NilError):
    """An integer-set descriptor could not be parsed"""


class DegreeTooHigh(NilError):
    def __init__(self, index: int, degree: int, bound: int):
        self.index = index
        self.degree = degree
        self.bound = bound
        super().__init__(f"structure polynomial P_{index} has degree {degree} > {bound}")


class IdentityAxiomViolated(NilError):
    def __init__(self, index: int, witness: Optional[Sequence[Any]] = None):
        self.index = index
        self.witness = tuple(witness) if witness is not None else None
        super().__init__(
            f"structure polynomial P_{index} does not vanish on a zero block"
            + (f" (witness {[str(w) for w in self.witness]})" if self.witness else "")
        )


class DimensionMismatch(NilError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} coordinates, got {got}")


class EmptyOrbit(NilError):
    """min_pair_distance was asked about an orbit with no points"""


class SetsNotDisjoint(NilError):
    def __init__(self, common: Sequence[int]):
        self.common = tuple(sorted(common))
        shown = ", ".join(str(c) for c in self.common[:8])
        super().__init__(f"sets are not disjoint (common elements: {shown})")


class RootIsolationFailed(NilError):
    def __init__(self, endpoint: Any):
        self.endpoint = endpoint
        super().__init__(f"interval endpoint {endpoint} is a root; perturb the endpoints")


class AllPointsBoundary(NilError):
    """Every grid point fell inside the boundary guard"""


class GridTooCoarse(NilError):
    """The parameter grid has no admissible point"""


class TooShort(NilError):
    def __init__(self, length: int, needed: int = 2):
        self.length = length
        self.needed = needed
        super().__init__(f"need at least {needed} elements, got {length}")


class NonPositiveElement(NilError):
    """Ratios and logarithms of a set need every element > 0"""

    def __init__(self, value: int):
        self.value = value
        super().__init__(f"set elements must be positive for this measure, got {value}")


class WitnessInvalid(NilError):
    def __init__(self, shift: int, value: Any, eps: Any):
        self.shift = shift
        self.value = value
        self.eps = eps
        super().__init__(f"||{shift} * alpha|| = {value} is below eps = {eps}")


class HypothesisViolated(NilError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class RationalParseError(NilError):
    def __init__(self, text: str):
        self.text = text
        super().__init__(f"not a rational number: {text!r}")
