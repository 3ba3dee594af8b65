//! Multi-goal comparison on a cave: one start, several goals, every planner.
//! Prints the summary as CSV on stdout.

use spheremap::bench::{
    generate_world, pick_endpoints, scenario_multi_goal, write_csv, PlanningSetup, ScenarioOptions, WorldKind, WorldSpec,
    TIMING_NOTE,
};
use spheremap::map::BuildParams;
use spheremap::planner::RrtParams;
use std::time::Duration;

fn main() {
    let world = generate_world(&WorldSpec::new(WorldKind::PerforatedCave, 60.0, 0.25, 7)).expect("valid spec");
    let setup = PlanningSetup::new(world.grid, BuildParams::default(), 2).expect("valid parameters");
    let points = pick_endpoints(&setup.map, 6, 1.5, 7);
    let (start, goals) = points.split_first().expect("at least one endpoint");

    let options = ScenarioOptions {
        rrt: RrtParams { timeout: Duration::from_secs(2), ..RrtParams::default() },
        ..ScenarioOptions::default()
    };
    let outcome = scenario_multi_goal(&setup, start, goals, &options);
    for run in outcome.runs.iter().filter(|r| r.result.is_err()) {
        eprintln!("{} found no path to goal {}", run.mode.as_str(), run.goal);
    }
    write_csv(std::io::stdout().lock(), TIMING_NOTE, &outcome.summary).expect("write csv");
}
