"""Exception hierarchy shared by all bellext modules."""


class BellextError(Exception):
    """Base class for every error raised by this package."""


class UnknownVariable(BellextError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class IncompleteMoments(BellextError, ValueError):
    pass


class NotRealizable(BellextError, ValueError):
    """Moment data that no probability measure can reproduce."""


class InvalidMoments(BellextError, ValueError):
    pass


class InvalidDistribution(BellextError, ValueError):
    pass


class NonHermitian(BellextError, ValueError):
    pass


class DimensionMismatch(BellextError, ValueError):
    pass


class NonCommutingContext(BellextError, ValueError):
    pass


class InvalidObservable(BellextError, ValueError):
    pass


class MarginalMismatch(BellextError, ValueError):
    """Two distributions disagree on their common variables.

    ``atom`` is the overlap assignment with the largest discrepancy and
    ``edge`` (when raised from tree extension) identifies the offending edge.
    """

    def __init__(self, message: str, atom=None, discrepancy: float = 0.0, edge=None):
        super().__init__(message)
        self.atom = atom
        self.discrepancy = discrepancy
        self.edge = edge


class NotATree(BellextError, ValueError):
    pass


class DegenerateParameters(BellextError, ValueError):
    pass


class VerificationError(BellextError, AssertionError):
    """A computed model failed to reproduce a required moment."""
