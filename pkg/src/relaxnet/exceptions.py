class DomainError(ValueError):
    """A state or argument lies outside the admissible traffic domain."""


class CouplingError(ValueError):
    """A junction coupling rule produced an infeasible node state."""


class SimulationError(RuntimeError):
    """Fatal failure while advancing a network simulation."""


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate."""
