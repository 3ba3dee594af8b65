//! Plans one query with every planner on a room grid and prints a table of
//! time, length, risk, cost and true clearance.

use spheremap::bench::{generate_world, pick_endpoints, scenario_single_goal, PlanningSetup, ScenarioOptions, WorldKind, WorldSpec};
use spheremap::map::BuildParams;

fn main() {
    let world = generate_world(&WorldSpec::new(WorldKind::RoomGrid, 60.0, 0.25, 4)).expect("valid spec");
    let setup = PlanningSetup::new(world.grid, BuildParams::default(), 2).expect("valid parameters");
    println!(
        "map: {} spheres, {} segments, built in {:.2} s",
        setup.map.graph().len(),
        setup.map.segments().len(),
        setup.build_time.as_secs_f64()
    );

    let ends = pick_endpoints(&setup.map, 2, 1.5, 0);
    let (start, goal) = (ends[0], ends[1]);
    println!("from {:.1?} to {:.1?}\n", start.as_slice(), goal.as_slice());
    println!("{:<12} {:>9} {:>8} {:>8} {:>8} {:>10}", "mode", "time ms", "length", "risk", "cost", "clearance");
    for (row, _) in scenario_single_goal(&setup, &start, &goal, &ScenarioOptions::default()) {
        if row.found {
            println!(
                "{:<12} {:>9.2} {:>8.2} {:>8.2} {:>8.2} {:>10.3}",
                row.mode, row.time_ms, row.length, row.risk, row.cost, row.min_clearance
            );
        } else {
            println!("{:<12} no path", row.mode);
        }
    }
}
