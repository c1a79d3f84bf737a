"""Mixed-criticality mapping with graceful degradation and BDD-based reliability analysis."""

from .bdd import BddManager, ReliabilityPolynomial
from .errors import DegradeLabError
from .experiment import ScenarioConfig, SweepRow, run_sweep, summarize
from .failsim import FailSimConfig, oracle_check, simulate_failures
from .mapping import EcuPolicy, RedundancyMode, map_application, map_fixed, map_system
from .platform import SlotTable, build_topology, reference_platform, shortest_route
from .reliability import degradation_limits, mttf
from .slots import SlotStrategy, degrade
from .structfn import build_all
from .workload import Application, Task, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "Application", "BddManager", "DegradeLabError", "EcuPolicy", "FailSimConfig",
    "RedundancyMode", "ReliabilityPolynomial", "ScenarioConfig", "SlotStrategy", "SlotTable",
    "SweepRow", "Task", "build_all", "build_topology", "degradation_limits", "degrade",
    "generate_synthetic", "map_application", "map_fixed", "map_system", "mttf",
    "oracle_check", "reference_platform", "run_sweep", "shortest_route", "simulate_failures",
    "summarize",
]
