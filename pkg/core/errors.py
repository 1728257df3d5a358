# core/errors.py - Exception hierarchy shared by every package


class SimulationError(Exception):
    """Base class for all simulator errors"""


class OffLattice(SimulationError, ValueError):
    """A global parameter value is not on its discrete lattice"""

    def __init__(self, component: str, value):
        self.component = component
        self.value = value
        super().__init__(f"{component}={value} is not on the {component} lattice")


class KExceedsFleet(SimulationError, ValueError):
    """K asks for more participants than the fleet has"""

    def __init__(self, k: int, fleet_size: int):
        self.k = k
        self.fleet_size = fleet_size
        super().__init__(f"K={k} exceeds fleet size {fleet_size}")


class InvalidShape(SimulationError, ValueError):
    pass


class TooManyDevices(SimulationError, ValueError):
    pass


class DegenerateConcentration(SimulationError, ValueError):
    pass


class EmptyDataset(SimulationError, ValueError):
    pass


class DimensionMismatch(SimulationError, ValueError):
    pass


class UnknownTier(SimulationError, KeyError):
    pass


class MissingDevice(SimulationError, KeyError):
    pass


class NoConvergingPoint(SimulationError):
    pass


class NotConverged(SimulationError):
    pass


class ScenarioMismatch(SimulationError):
    pass


class ConfigParse(SimulationError):
    """The config document could not be read or parsed"""


class ScenarioInvalid(SimulationError):
    """The config parsed but describes an impossible scenario"""
