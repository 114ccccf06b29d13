from .engine import ScenarioResult, SimEngine, run_scenario
from .pilot import PilotInput, ScriptedPilot
from .scenario import (
    BoxConfig,
    PilotConfig,
    PilotScript,
    ScenarioConfig,
    TargetConfig,
    load_scenario,
    scenario_from_dict,
)
from .world import (
    BoxState,
    SimulationDiverged,
    TelemetryFrame,
    TELEMETRY_FIELDS,
    WorldState,
    telemetry_array,
    telemetry_header,
    write_telemetry_csv,
)
