//! Path planning under the length-plus-risk criterion.
//!
//! Moving between points with obstacle distances `r1`, `r2` costs the
//! distance plus `xi * max(0, d_max - (r1 + r2) / 2)^2` times the distance.
//! Every planner here keeps paths more than `r_min` away from obstacles.

mod cached;
mod cost;
mod grid;
mod result;
mod rrt;
mod sphere;

pub use cached::plan_cached;
pub use cost::{edge_traversable, PlannerParams};
pub use grid::{grid_astar, ClearanceField, GridCost};
pub use result::{
    evaluate_path, evaluate_recorded, sampled_min_clearance, ClearanceSource, PathMetrics, PlanError, PlanMode,
    PlanRecord, PlanResult, Waypoint,
};
pub use rrt::{rrt_star, RrtParams};
pub use sphere::{astar_nodes, astar_sphere_graph, attach};
