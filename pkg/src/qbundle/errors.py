class QBundleError(ValueError):
    """Base class for all domain errors raised by qbundle."""


class ChartUndefined(QBundleError):
    """The point lies on the hyperplane excluded from the requested chart."""


class OverlapUndefined(QBundleError):
    """The point is not in the overlap of the two charts."""


class LoopLeavesChart(QBundleError):
    """A transport loop leaves the domain of its chart."""


class WrongDimension(QBundleError):
    pass


class InvalidAtlas(QBundleError):
    """An atlas failed validation; the message names the violated invariant."""


class InvalidModulus(QBundleError):
    pass
