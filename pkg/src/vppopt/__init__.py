"""Market scheduling for heterogeneous renewable virtual power plants.

Day-ahead commitment plus sequential intraday re-optimization of a
portfolio of dispatchable and non-dispatchable renewables, solar thermal
units with storage, and flexible demands, connected to the main grid
through one or more coupling points.
"""

from vppopt.scenario import (
    DemandAsset,
    DemandProfile,
    Diagnostic,
    DresAsset,
    ForecastSet,
    IdmSession,
    Line,
    MarketCalendar,
    NdresAsset,
    Network,
    Scenario,
    ScenarioError,
    ScenarioValidationError,
    StuAsset,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
)

__all__ = [
    "DemandAsset",
    "DemandProfile",
    "Diagnostic",
    "DresAsset",
    "ForecastSet",
    "IdmSession",
    "Line",
    "MarketCalendar",
    "NdresAsset",
    "Network",
    "Scenario",
    "ScenarioError",
    "ScenarioValidationError",
    "StuAsset",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "validate_scenario",
]

__version__ = "0.1.0"
