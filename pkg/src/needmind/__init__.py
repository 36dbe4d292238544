"""Need-driven agents with a small conscious workspace fed by competing processors."""

from needmind.engine import Engine, Trace, TraceEvent, run
from needmind.needs import Need, NeedHierarchy, SatisfactionState, WeightParams, all_weights, weight
from needmind.scenario import ScenarioConfig, load_scenario, parse_scenario

__all__ = [
    "Engine",
    "Need",
    "NeedHierarchy",
    "SatisfactionState",
    "ScenarioConfig",
    "Trace",
    "TraceEvent",
    "WeightParams",
    "all_weights",
    "load_scenario",
    "parse_scenario",
    "run",
    "weight",
]
