use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cost::PlannerParams;
use super::result::{ClearanceSource, PlanError, PlanMode, PlanResult, Waypoint};
use crate::geometry::Vec3;
use crate::spatial::NodeIndex;
use crate::voxel::{OccupancyGrid, VoxelState};

#[derive(Clone, Debug, PartialEq)]
pub struct RrtParams {
    /// Maximal extension per iteration, meters.
    pub step: f64,
    pub rewire_radius: f64,
    pub timeout: Duration,
    /// Probability of sampling the goal itself.
    pub goal_bias: f64,
    pub seed: u64,
}

impl Default for RrtParams {
    fn default() -> Self {
        Self {
            step: 1.0,
            rewire_radius: 3.0,
            timeout: Duration::from_secs(10),
            goal_bias: 0.05,
            seed: 0,
        }
    }
}

struct Tree {
    pos: Vec<Vec3>,
    clearance: Vec<f64>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    cost: Vec<f64>,
    index: NodeIndex,
}

impl Tree {
    /// Re-parents `node` and shifts the cost of its whole subtree.
    fn rewire(&mut self, node: usize, parent: usize, cost: f64) {
        let old = self.parent[node];
        self.children[old].retain(|c| *c != node);
        self.children[parent].push(node);
        self.parent[node] = parent;
        let delta = cost - self.cost[node];
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            self.cost[n] += delta;
            stack.extend(self.children[n].iter().copied());
        }
    }
}

/// Checks a straight move by sampling it every quarter voxel. Each sample
/// must be in a free voxel with clearance above `r_min` plus half the
/// sample spacing, which keeps the whole segment clear.
fn motion_valid<S: ClearanceSource + ?Sized>(grid: &OccupancyGrid, clearance: &S, a: &Vec3, b: &Vec3, r_min: f64) -> bool {
    let spacing = grid.resolution() / 4.0;
    let len = (b - a).norm();
    let n = (len / spacing).ceil().max(1.0) as usize;
    let margin = r_min + spacing / 2.0;
    (0..=n).all(|i| {
        let p = a + (b - a) * (i as f64 / n as f64);
        grid.state_at(&p) == Some(VoxelState::Free) && clearance.clearance(&p) > margin
    })
}

/// RRT* returning its first solution. Costs use the safety criterion.
pub fn rrt_star<S: ClearanceSource + ?Sized>(
    grid: &OccupancyGrid,
    clearance: &S,
    start: &Vec3,
    goal: &Vec3,
    params: &PlannerParams,
    rrt: &RrtParams,
) -> Result<PlanResult, PlanError> {
    let t = Instant::now();
    let margin = params.r_min + grid.resolution() / 8.0;
    let ok = |p: &Vec3| grid.state_at(p) == Some(VoxelState::Free) && clearance.clearance(p) > margin;
    if !ok(start) {
        return Err(PlanError::InvalidEndpoint("start"));
    }
    if !ok(goal) {
        return Err(PlanError::InvalidEndpoint("goal"));
    }
    let ds = clearance.clearance(start);
    let dg = clearance.clearance(goal);
    let finish = |waypoints: Vec<Waypoint>| Ok(PlanResult::from_waypoints(waypoints, params, PlanMode::RrtStar, t.elapsed()));
    if motion_valid(grid, clearance, start, goal, params.r_min) && (goal - start).norm() <= rrt.step {
        return finish(vec![
            Waypoint { position: *start, clearance: ds },
            Waypoint { position: *goal, clearance: dg },
        ]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rrt.seed);
    let mut tree = Tree {
        pos: vec![*start],
        clearance: vec![ds],
        parent: vec![usize::MAX],
        children: vec![Vec::new()],
        cost: vec![0.0],
        index: NodeIndex::new(rrt.rewire_radius.max(rrt.step)),
    };
    tree.index.insert(0, *start);
    let lo = grid.origin();
    let hi = lo + grid.extent();
    let edge = |a: &Vec3, ra: f64, b: &Vec3, rb: f64| params.transition_total(a, ra, b, rb);

    while t.elapsed() < rrt.timeout {
        let sample = if rng.gen_bool(rrt.goal_bias) {
            *goal
        } else {
            Vec3::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y), rng.gen_range(lo.z..hi.z))
        };
        let nearest = tree.index.nearest_k(&sample, 1)[0] as usize;
        let from = tree.pos[nearest];
        let dir = sample - from;
        let dist = dir.norm();
        if dist == 0.0 {
            continue;
        }
        let new = if dist > rrt.step { from + dir * (rrt.step / dist) } else { sample };
        if !motion_valid(grid, clearance, &from, &new, params.r_min) {
            continue;
        }
        let dn = clearance.clearance(&new);

        let near: Vec<usize> = tree
            .index
            .within_radius(&new, rrt.rewire_radius)
            .into_iter()
            .map(|i| i as usize)
            .collect();
        let mut parent = nearest;
        let mut best = tree.cost[nearest] + edge(&from, tree.clearance[nearest], &new, dn);
        for &i in &near {
            if i == nearest {
                continue;
            }
            let c = tree.cost[i] + edge(&tree.pos[i], tree.clearance[i], &new, dn);
            if c < best && motion_valid(grid, clearance, &tree.pos[i], &new, params.r_min) {
                best = c;
                parent = i;
            }
        }
        let id = tree.pos.len();
        tree.pos.push(new);
        tree.clearance.push(dn);
        tree.parent.push(parent);
        tree.children.push(Vec::new());
        tree.children[parent].push(id);
        tree.cost.push(best);
        tree.index.insert(id as u32, new);

        for &i in &near {
            if i == parent || i == 0 {
                continue;
            }
            let c = best + edge(&new, dn, &tree.pos[i], tree.clearance[i]);
            if c < tree.cost[i] && motion_valid(grid, clearance, &new, &tree.pos[i], params.r_min) {
                tree.rewire(i, id, c);
            }
        }

        if (goal - new).norm() <= rrt.step && motion_valid(grid, clearance, &new, goal, params.r_min) {
            let mut chain = vec![id];
            while let Some(&last) = chain.last() {
                let p = tree.parent[last];
                if p == usize::MAX {
                    break;
                }
                chain.push(p);
            }
            chain.reverse();
            let mut waypoints: Vec<Waypoint> = chain
                .into_iter()
                .map(|i| Waypoint { position: tree.pos[i], clearance: tree.clearance[i] })
                .collect();
            waypoints.push(Waypoint { position: *goal, clearance: dg });
            return finish(waypoints);
        }
    }
    Err(PlanError::Timeout(rrt.timeout))
}
