"""Exception hierarchy shared by all discgeom modules."""


class DiscgeomError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DiscgeomError):
    """Input bytes do not parse as the declared mesh format."""


class TopologyError(DiscgeomError):
    """Surface is not a valid oriented disc or sphere 2-manifold."""


class DegenerateError(DiscgeomError):
    """Zero-length edge, zero-area triangle, or broken triangle inequality."""


class CutError(DiscgeomError):
    """A proposed cut curve is not simple or does not separate."""


class SideError(DiscgeomError):
    """The requested side of a cut is ambiguous."""


class Unreachable(DiscgeomError):
    """No path exists between the requested endpoints under the given mask."""


class BudgetError(DiscgeomError):
    """A configured resource cap (vertices, moves, depth) was exceeded."""


class SeedError(DiscgeomError):
    """No level-set seed curve with the required area property was found."""


class ShellingError(DiscgeomError):
    """No shelling prefix produced a single simple boundary curve."""


class ResolutionError(DiscgeomError):
    """Generator parameters force degenerate triangles at this resolution."""


class MalformedHomotopy(DiscgeomError):
    """A homotopy violates its structural invariants."""


class HomotopyError(DiscgeomError):
    """Internal failure while assembling a move sequence.

    Carries the partial homotopy built so far in ``.partial`` when available.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NotFanable(HomotopyError):
    """A fan homotopy exceeded its length contract; subdivide further."""


class RecursionBudget(HomotopyError):
    """Contraction recursion exceeded its depth or move budget."""


class NoWitness(DiscgeomError):
    """Witness search exhausted its candidates.

    ``.best`` holds the best non-qualifying candidate (or None) so callers
    can report how close the search came.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
