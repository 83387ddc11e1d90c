"""Urban-air-mobility network design with reserve capacity.

Evaluates per-disruption-scenario network throughput via linear programming
and selects optimal backup vertiport locations and capacities, with metrics
and file / CLI tooling for batch studies.
"""

__version__ = "0.1.0"

from .errors import (
    FileFormatError,
    SimplexStalledError,
    SolverError,
    ValidationError,
    VertiflowError,
)
from .network import (
    DemandSet,
    DisruptionModel,
    IndicatorMatrices,
    Link,
    Node,
    RiskNetwork,
    Scenario,
    build_incidence,
    enumerate_scenarios,
    validate_network,
)

__all__ = [
    "DemandSet",
    "DisruptionModel",
    "IndicatorMatrices",
    "Link",
    "Node",
    "RiskNetwork",
    "Scenario",
    "build_incidence",
    "enumerate_scenarios",
    "validate_network",
    "FileFormatError",
    "SimplexStalledError",
    "SolverError",
    "ValidationError",
    "VertiflowError",
]
