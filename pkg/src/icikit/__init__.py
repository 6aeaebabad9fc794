"""icikit: rapid design-space exploration for inter-chiplet interconnects.

Analytical latency and throughput proxies over a declarative design model,
generators for chiplets/placements/topologies/routing/traffic, area-power-cost
reports, a cycle-level flit simulator as the accuracy oracle, and a sweep
driver with Pareto-front extraction.
"""

from .model import DesignBundle, IcikitError, load_design, save_design
from .validate import ValidationFailure, Violation, validate

__version__ = "0.1.0"

__all__ = ["DesignBundle", "IcikitError", "ValidationFailure", "Violation",
           "load_design", "save_design", "validate", "__version__"]
