"""Exception hierarchy shared by every module of the package."""


class RobogatherError(Exception):
    """Base class for all errors raised by robogather."""


class GraphError(RobogatherError, ValueError):
    """A port-graph description violates the model."""


class PortGap(GraphError):
    pass


class AsymmetricEdge(GraphError):
    pass


class Disconnected(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class MultiEdge(GraphError):
    pass


class GraphParseError(GraphError):
    pass


class UnsupportedSize(RobogatherError, ValueError):
    pass


class ScopeTooLarge(RobogatherError, ValueError):
    """An exhaustive computation was requested beyond its supported scope."""


class SimulationError(RobogatherError):
    pass


class RoundLimitExceeded(SimulationError):
    """Some robot was still running when the round cap was reached."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class IllegalMove(SimulationError):
    pass


class BudgetExceeded(SimulationError):
    """Map construction did not finish inside its declared round budget."""


class IncompleteMap(RobogatherError, ValueError):
    pass


class FewerThanTwoRobots(RobogatherError, ValueError):
    pass
