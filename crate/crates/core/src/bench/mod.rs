//! Synthetic worlds, simulated missions and the benchmark scenarios.

mod mission;
mod scenario;
mod world;

pub use mission::{reveal, run_mission, run_mission_with, sample_trace, Mission, MissionParams};
pub use scenario::{
    path_clearance, pick_endpoints, runtime_rows, scenario_compression, scenario_multi_goal, scenario_single_goal,
    world_index, write_csv, CompressionRow, GoalRun, ModeSummary, MultiGoalOutcome, PlanningSetup, RuntimeRow,
    ScenarioOptions, SingleGoalRow, ALL_MODES, ENDPOINT_SEPARATION, TIMING_NOTE,
};
pub use world::{free_components, generate_world, two_route_world, World, WorldError, WorldKind, WorldSpec};
