//! A narrow shortcut against a wide detour. Raising the risk weight moves the
//! optimal sphere-graph path from the shortcut to the detour.

use spheremap::bench::two_route_world;
use spheremap::map::{BuildParams, SphereMap};
use spheremap::planner::{astar_sphere_graph, PlannerParams};

fn main() {
    let (grid, start, goal) = two_route_world(0.2, 2.0, 8.0);
    let mut map = SphereMap::new(BuildParams::default()).expect("valid parameters");
    map.build_known(&grid);
    println!("{} spheres in {} segments", map.graph().len(), map.segments().len());

    println!("{:>6} {:>8} {:>8} {:>8} {:>10}", "xi", "length", "risk", "cost", "route");
    for xi in [0.0, 0.5, 1.0, 2.0, 4.0, 7.0, 15.0] {
        let params = PlannerParams { xi, ..map.params().planner_params() };
        match astar_sphere_graph(map.graph(), &start, &goal, &params, None) {
            Ok(r) => {
                let y_max = r.waypoints.iter().map(|w| w.position.y.abs()).fold(0.0, f64::max);
                let route = if y_max > start.y.max(goal.y) + 5.5 { "detour" } else { "shortcut" };
                println!("{xi:>6.1} {:>8.2} {:>8.2} {:>8.2} {:>10}", r.length, r.risk, r.cost, route);
            }
            Err(e) => println!("{xi:>6.1} {e}"),
        }
    }
}
