use std::collections::BinaryHeap;
use std::time::Instant;

use super::cost::PlannerParams;
use super::result::{ClearanceSource, PlanError, PlanMode, PlanResult, Waypoint};
use super::sphere::Open;
use crate::geometry::Vec3;
use crate::spatial::ObstacleIndex;
use crate::voxel::{OccupancyGrid, VoxelState};

/// Obstacle distance at the centroid of every free voxel of a planning grid.
///
/// Non-free voxels hold `-inf`. The obstacle index is kept for exact
/// queries at arbitrary points such as path endpoints.
#[derive(Clone, Debug)]
pub struct ClearanceField {
    values: Vec<f64>,
    index: ObstacleIndex,
}

impl ClearanceField {
    /// Evaluates `index` at the free-voxel centroids of `grid`.
    pub fn compute(grid: &OccupancyGrid, index: ObstacleIndex) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let v = grid.voxel_from_linear(i);
                if grid.get(v) == VoxelState::Free {
                    index.nearest_distance(&grid.centroid(v))
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        Self { values, index }
    }

    pub fn at(&self, linear: usize) -> f64 {
        self.values[linear]
    }

    pub fn index(&self) -> &ObstacleIndex {
        &self.index
    }
}

impl ClearanceSource for ClearanceField {
    fn clearance(&self, p: &Vec3) -> f64 {
        self.index.nearest_distance(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridCost {
    /// Length plus risk.
    Safety,
    /// Length only.
    Length,
}

/// Straight move between points with clearances `d1`, `d2` at distance
/// `len` stays more than `r_min` away from obstacles everywhere, by the
/// 1-Lipschitz property of the distance function.
fn segment_safe(d1: f64, d2: f64, len: f64, r_min: f64) -> bool {
    (d1 + d2 - len) / 2.0 > r_min
}

/// A* over the 26-connected graph of free voxels with clearance above
/// `r_min`. The path is start, voxel centroids, goal.
///
/// `budget` bounds the number of expanded voxels.
pub fn grid_astar(
    grid: &OccupancyGrid,
    field: &ClearanceField,
    start: &Vec3,
    goal: &Vec3,
    params: &PlannerParams,
    cost: GridCost,
    budget: usize,
) -> Result<PlanResult, PlanError> {
    let t = Instant::now();
    let r_min = params.r_min;
    let endpoint = |p: &Vec3, name: &'static str| -> Result<(usize, f64), PlanError> {
        let v = grid.voxel_of(p).ok_or(PlanError::InvalidEndpoint(name))?;
        let li = grid.linear_index(v);
        let d = field.clearance(p);
        let dc = field.at(li);
        let len = (grid.centroid(v) - p).norm();
        if grid.get(v) != VoxelState::Free || d <= r_min || dc <= r_min || !segment_safe(d, dc, len, r_min) {
            return Err(PlanError::InvalidEndpoint(name));
        }
        Ok((li, d))
    };
    let (s_li, ds) = endpoint(start, "start")?;
    let (g_li, dg) = endpoint(goal, "goal")?;
    if start == goal {
        let w = Waypoint { position: *start, clearance: ds };
        let mode = match cost {
            GridCost::Safety => PlanMode::Grid,
            GridCost::Length => PlanMode::GridLength,
        };
        return Ok(PlanResult::from_waypoints(vec![w], params, mode, t.elapsed()));
    }

    let step = |p1: &Vec3, r1: f64, p2: &Vec3, r2: f64| match cost {
        GridCost::Safety => params.transition_total(p1, r1, p2, r2),
        GridCost::Length => (p1 - p2).norm(),
    };

    let dims = grid.dims();
    let res = grid.resolution();
    let mut offsets = Vec::with_capacity(26);
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if (dx, dy, dz) != (0, 0, 0) {
                    let len = res * ((dx * dx + dy * dy + dz * dz) as f64).sqrt();
                    offsets.push(([dx, dy, dz], len));
                }
            }
        }
    }

    let goal_state = grid.len() as u32;
    let mut g = vec![f64::INFINITY; grid.len() + 1];
    let mut parent = vec![u32::MAX; grid.len() + 1];
    let mut open = BinaryHeap::new();
    let c0 = grid.centroid(grid.voxel_from_linear(s_li));
    let g0 = step(start, ds, &c0, field.at(s_li));
    g[s_li] = g0;
    let h0 = (c0 - goal).norm();
    open.push(Open { f: g0 + h0, h: h0, id: s_li as u32, g: g0 });
    let mut expanded = 0usize;
    while let Some(top) = open.pop() {
        let s = top.id as usize;
        if top.g > g[s] {
            continue;
        }
        if top.id == goal_state {
            break;
        }
        expanded += 1;
        if expanded > budget {
            return Err(PlanError::BudgetExceeded(budget));
        }
        let v = grid.voxel_from_linear(s);
        let p = grid.centroid(v);
        let d = field.at(s);
        if s == g_li {
            let c = top.g + step(&p, d, goal, dg);
            if c < g[goal_state as usize] {
                g[goal_state as usize] = c;
                parent[goal_state as usize] = top.id;
                open.push(Open { f: c, h: 0.0, id: goal_state, g: c });
            }
        }
        for (o, len) in &offsets {
            let (x, y, z) = (v[0] as i64 + o[0], v[1] as i64 + o[1], v[2] as i64 + o[2]);
            if x < 0 || y < 0 || z < 0 || x >= dims[0] as i64 || y >= dims[1] as i64 || z >= dims[2] as i64 {
                continue;
            }
            let nv = [x as usize, y as usize, z as usize];
            let ni = grid.linear_index(nv);
            let dn = field.at(ni);
            if dn <= r_min || !segment_safe(d, dn, *len, r_min) {
                continue;
            }
            let q = grid.centroid(nv);
            let ng = top.g + step(&p, d, &q, dn);
            if ng < g[ni] {
                g[ni] = ng;
                parent[ni] = top.id;
                let h = (q - goal).norm();
                open.push(Open { f: ng + h, h, id: ni as u32, g: ng });
            }
        }
    }
    if !g[goal_state as usize].is_finite() {
        return Err(PlanError::NoPath);
    }
    let mut chain = Vec::new();
    let mut cur = parent[goal_state as usize];
    while cur != u32::MAX {
        chain.push(cur as usize);
        cur = parent[cur as usize];
    }
    chain.reverse();
    let mut waypoints = vec![Waypoint { position: *start, clearance: ds }];
    for li in chain {
        waypoints.push(Waypoint {
            position: grid.centroid(grid.voxel_from_linear(li)),
            clearance: field.at(li),
        });
    }
    waypoints.push(Waypoint { position: *goal, clearance: dg });
    let mode = match cost {
        GridCost::Safety => PlanMode::Grid,
        GridCost::Length => PlanMode::GridLength,
    };
    Ok(PlanResult::from_waypoints(waypoints, params, mode, t.elapsed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::UpdateCube;

    fn corridor() -> OccupancyGrid {
        // 12 x 7 x 7 voxels of 0.5 m: a free 10-voxel line along x, walls
        // three voxels away on every side
        let mut g = OccupancyGrid::new(0.5, Vec3::zeros(), [12, 7, 7], VoxelState::Occupied).unwrap();
        g.fill_range(&g.full_range(), VoxelState::Occupied);
        g.fill_box(Vec3::new(0.5, 0.5, 0.5), Vec3::new(5.5, 3.0, 3.0), VoxelState::Free);
        g
    }

    fn field(g: &OccupancyGrid) -> ClearanceField {
        let cube = UpdateCube::new(g.extent() / 2.0 + g.origin(), 100.0);
        ClearanceField::compute(g, ObstacleIndex::build(&g.obstacle_points(&cube), &[]))
    }

    #[test]
    fn straight_corridor_length() {
        let g = corridor();
        let f = field(&g);
        let params = PlannerParams { r_min: 0.3, d_max: 0.5, xi: 1.0 };
        let a = g.centroid([1, 3, 3]);
        let b = g.centroid([10, 3, 3]);
        let r = grid_astar(&g, &f, &a, &b, &params, GridCost::Length, 1_000_000).unwrap();
        assert!((r.length - 9.0 * 0.5).abs() < 1e-12, "{}", r.length);
    }

    #[test]
    fn same_endpoints_give_an_empty_path() {
        let g = corridor();
        let f = field(&g);
        let params = PlannerParams { r_min: 0.3, d_max: 0.5, xi: 1.0 };
        let a = g.centroid([3, 3, 3]) + Vec3::new(0.1, 0.0, 0.0);
        let r = grid_astar(&g, &f, &a, &a, &params, GridCost::Safety, 10).unwrap();
        assert_eq!(r.waypoints.len(), 1);
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn separator_blocks() {
        let mut g = corridor();
        g.fill_box(Vec3::new(2.5, 0.0, 0.0), Vec3::new(3.0, 3.5, 3.5), VoxelState::Occupied);
        let f = field(&g);
        let params = PlannerParams { r_min: 0.3, d_max: 0.5, xi: 1.0 };
        let r = grid_astar(&g, &f, &g.centroid([1, 3, 3]), &g.centroid([10, 3, 3]), &params, GridCost::Safety, 1_000_000);
        assert_eq!(r, Err(PlanError::NoPath));
    }
}
