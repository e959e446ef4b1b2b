"""Exception hierarchy shared by all modules."""


class TreesosError(Exception):
    """Base class for every error raised by this package."""


class GraphInvariantError(TreesosError):
    """A graph object violates symmetry, loop-freeness or its cached edge count."""


class PreconditionError(TreesosError):
    """An operation was called outside the hypotheses it requires."""

    def __init__(self, name, lhs=None, rhs=None):
        self.name = name
        self.lhs = lhs
        self.rhs = rhs
        detail = name if lhs is None else f"{name} (lhs={lhs}, rhs={rhs})"
        super().__init__(detail)


class ContractViolation(TreesosError):
    """An internal step failed although its hypotheses were verified.

    Under a correct implementation this is unreachable; reaching it is a bug.
    """


class EmbeddingFailure(TreesosError):
    """A constructive embedder could not place some tree vertex."""

    def __init__(self, message, stage=None, step=None):
        self.stage = stage
        self.step = step
        super().__init__(message)


class BudgetExhausted(TreesosError):
    """Backtracking search ran out of node expansions before deciding."""

    def __init__(self, expansions):
        self.expansions = expansions
        super().__init__(f"search budget of {expansions} expansions exhausted")


class LoopStarvation(EmbeddingFailure):
    """The cluster-guided loop broke one of its invariants or ran dry.

    ``invariant`` names the broken condition and ``state`` is a small dump
    of the loop state at that step.
    """

    def __init__(self, invariant, step, message, state=None):
        self.invariant = invariant
        self.state = state or {}
        super().__init__(f"{invariant} at step {step}: {message}", "linear-degree", step)


class RefinementError(TreesosError):
    """Partition refinement could not meet its enforced bounds."""


class StructureError(TreesosError):
    """A structural certificate could not be built or failed verification."""


class PathShortfall(TreesosError):
    """Fewer connecting paths exist than were requested."""

    def __init__(self, found, want, paths):
        self.found = found
        self.want = want
        self.paths = paths
        super().__init__(f"found {found} internally disjoint paths, wanted {want}")


class FormatError(TreesosError, ValueError):
    """Malformed graph6, edge-list, tree or partition text."""
