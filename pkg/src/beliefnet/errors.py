"""Exception types shared across the package."""


class BeliefNetError(Exception):
    """Base class for all errors raised by this package."""


class FrameError(BeliefNetError):
    """Invalid frame, variable, value label, or assignment."""


class ScopeError(BeliefNetError):
    """Scope containment or compatibility violated."""


class GraphError(BeliefNetError):
    """Invalid directed graph structure or node set."""


class MassError(BeliefNetError):
    """Invalid mass function construction or argument."""


class CapacityError(BeliefNetError):
    """Operation exceeds the dense subset-lattice cap."""


class ConflictError(BeliefNetError):
    """Combination normalizer vanished (total conflict)."""


class ImpossibleEventError(ConflictError):
    """Conditioning event has zero plausibility or rejects every record."""


class NoSolutionError(BeliefNetError):
    """No conditional factor reproduces the joint within tolerance."""


class GenerationError(BeliefNetError):
    """Random network generation could not avoid total conflict."""


class FormatError(BeliefNetError):
    """Malformed input file, row, or expression."""
