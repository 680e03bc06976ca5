"""Exception types raised by the laboratory."""


class ErgolabError(Exception):
    """Base class for all library errors."""


class DepthExhausted(ErgolabError):
    """A truncated boundary word lost too much of its stored prefix."""


class Overflow(ErgolabError):
    """The odometer reached the all-ones pattern at the stored depth."""


class NotReduced(ErgolabError, ValueError):
    pass


class DegenerateTuple(ErgolabError, ValueError):
    """Two of the points handed to a cross-ratio coincide."""


class PingPongFailed(ErgolabError):
    pass


class ArcCollision(ErgolabError):
    """Images of disjoint arcs overlap at the working resolution."""


class SearchExhausted(ErgolabError):
    pass


class HorizonExceeded(ErgolabError):
    pass


class ContractionViolated(ErgolabError, AssertionError):
    """A Markov application increased the oscillation of a test function."""
