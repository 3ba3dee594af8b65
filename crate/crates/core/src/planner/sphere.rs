use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rustc_hash::FxHashMap as HashMap;

use super::cost::PlannerParams;
use super::result::{PlanError, PlanMode, PlanResult, Waypoint};
use crate::geometry::Vec3;
use crate::map::{NodeId, SegmentId, SphereGraph, SphereNode};

/// Heap entry ordered so that the smallest `(f, h, id)` pops first.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Open {
    pub f: f64,
    pub h: f64,
    pub id: u32,
    pub g: f64,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.h.total_cmp(&self.h))
            .then(other.id.cmp(&self.id))
    }
}

/// Best-first search over `u32` states. `expand` appends `(successor, step
/// cost)` pairs. Returns the state sequence and its cost.
pub(crate) fn best_first<H, E>(start: u32, goal: u32, h: H, mut expand: E) -> Option<(Vec<u32>, f64)>
where
    H: Fn(u32) -> f64,
    E: FnMut(u32, &mut Vec<(u32, f64)>),
{
    let mut best: HashMap<u32, (f64, u32)> = HashMap::default();
    let mut open = BinaryHeap::new();
    best.insert(start, (0.0, start));
    let h0 = h(start);
    open.push(Open { f: h0, h: h0, id: start, g: 0.0 });
    let mut succ = Vec::new();
    while let Some(top) = open.pop() {
        if top.g > best[&top.id].0 {
            continue;
        }
        if top.id == goal {
            let mut path = vec![goal];
            let mut cur = goal;
            while cur != start {
                cur = best[&cur].1;
                path.push(cur);
            }
            path.reverse();
            return Some((path, top.g));
        }
        succ.clear();
        expand(top.id, &mut succ);
        for &(n, c) in &succ {
            let g = top.g + c;
            if best.get(&n).map_or(true, |(old, _)| g < *old) {
                best.insert(n, (g, top.id));
                let hn = h(n);
                open.push(Open { f: g + hn, h: hn, id: n, g });
            }
        }
    }
    None
}

fn in_scope(node: &SphereNode, restrict: Option<SegmentId>) -> bool {
    restrict.map_or(true, |s| node.segment == Some(s))
}

fn step_cost(params: &PlannerParams, a: &SphereNode, b: &SphereNode) -> f64 {
    params.transition_total(&a.position, a.radius, &b.position, b.radius)
}

/// Optimal node path between two graph nodes, optionally confined to one
/// segment. Costs are the transition costs between sphere centers.
pub fn astar_nodes(
    graph: &SphereGraph,
    params: &PlannerParams,
    from: NodeId,
    to: NodeId,
    restrict: Option<SegmentId>,
) -> Option<(Vec<NodeId>, f64)> {
    let a = graph.node(from)?;
    let b = graph.node(to)?;
    if !in_scope(a, restrict) || !in_scope(b, restrict) {
        return None;
    }
    let goal = b.position;
    let (path, cost) = best_first(
        from.0,
        to.0,
        |s| (graph.get(NodeId(s)).position - goal).norm(),
        |s, out| {
            let n = graph.get(NodeId(s));
            for m in graph.neighbors(n.id) {
                let mn = graph.get(*m);
                if in_scope(mn, restrict) {
                    out.push((m.0, step_cost(params, n, mn)));
                }
            }
        },
    )?;
    Some((path.into_iter().map(NodeId).collect(), cost))
}

/// Sphere used to enter or leave the graph at `p`: the covering sphere with
/// the nearest center among those leaving more than `r_min` of clearance
/// around `p`.
pub fn attach(graph: &SphereGraph, p: &Vec3, r_min: f64, restrict: Option<SegmentId>) -> Option<NodeId> {
    let mut best: Option<(f64, NodeId)> = None;
    graph.for_each_near(p, graph.max_radius(), |n| {
        let d = (n.position - p).norm();
        if n.radius - d > r_min && in_scope(n, restrict) {
            let cand = (d, n.id);
            if best.map_or(true, |b| cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1)) {
                best = Some(cand);
            }
        }
    });
    best.map(|(_, id)| id)
}

/// Clearance guaranteed at `p` by the sphere `n` that contains it.
pub(crate) fn clearance_in(n: &SphereNode, p: &Vec3) -> f64 {
    n.radius - (n.position - p).norm()
}

pub(crate) const START: u32 = u32::MAX - 1;
pub(crate) const GOAL: u32 = u32::MAX;

/// Safety-aware A* between two points over the sphere graph.
///
/// The start and goal attach to their nearest covering spheres; the result
/// visits sphere centers in between. With `restrict`, only spheres of that
/// segment are used.
pub fn astar_sphere_graph(
    graph: &SphereGraph,
    start: &Vec3,
    goal: &Vec3,
    params: &PlannerParams,
    restrict: Option<SegmentId>,
) -> Result<PlanResult, PlanError> {
    let t = Instant::now();
    let entry = attach(graph, start, params.r_min, restrict).ok_or(PlanError::Uncovered("start"))?;
    let exit = attach(graph, goal, params.r_min, restrict).ok_or(PlanError::Uncovered("goal"))?;
    let (en, ex) = (graph.get(entry), graph.get(exit));
    let (rs, rg) = (clearance_in(en, start), clearance_in(ex, goal));

    let pos = |s: u32| match s {
        START => *start,
        GOAL => *goal,
        id => graph.get(NodeId(id)).position,
    };
    let (path, _) = best_first(
        START,
        GOAL,
        |s| (pos(s) - goal).norm(),
        |s, out| match s {
            START => {
                out.push((entry.0, params.transition_total(start, rs, &en.position, en.radius)));
                if entry == exit {
                    out.push((GOAL, params.transition_total(start, rs, goal, rg)));
                }
            }
            GOAL => {}
            id => {
                let n = graph.get(NodeId(id));
                for m in graph.neighbors(n.id) {
                    let mn = graph.get(*m);
                    if in_scope(mn, restrict) {
                        out.push((m.0, step_cost(params, n, mn)));
                    }
                }
                if n.id == exit {
                    out.push((GOAL, params.transition_total(&n.position, n.radius, goal, rg)));
                }
            }
        },
    )
    .ok_or(PlanError::NoPath)?;

    let waypoints = path
        .into_iter()
        .map(|s| match s {
            START => Waypoint { position: *start, clearance: rs },
            GOAL => Waypoint { position: *goal, clearance: rg },
            id => {
                let n = graph.get(NodeId(id));
                Waypoint { position: n.position, clearance: n.radius }
            }
        })
        .collect();
    let mode = if restrict.is_some() { PlanMode::Cached } else { PlanMode::FullGraph };
    Ok(PlanResult::from_waypoints(waypoints, params, mode, t.elapsed()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_point_costs_nothing() {
        let mut g = SphereGraph::new(0.8, 4.0);
        g.insert(Vec3::zeros(), 3.0);
        let p = Vec3::new(0.5, 0.0, 0.0);
        let r = astar_sphere_graph(&g, &p, &p, &PlannerParams::default(), None).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.length, 0.0);
    }

    #[test]
    fn chain_is_forced() {
        let mut g = SphereGraph::new(0.8, 4.0);
        let a = g.insert(Vec3::zeros(), 2.0);
        let b = g.insert(Vec3::new(3.0, 0.0, 0.0), 2.0);
        let params = PlannerParams::default();
        let r = astar_sphere_graph(&g, &Vec3::zeros(), &Vec3::new(3.0, 0.0, 0.0), &params, None).unwrap();
        assert_eq!(r.positions(), vec![g.get(a).position, g.get(b).position]);
        assert_eq!(r.cost, 3.0);
        let (nodes, cost) = astar_nodes(&g, &params, a, b, None).unwrap();
        assert_eq!(nodes, vec![a, b]);
        assert_eq!(cost, 3.0);
    }

    #[test]
    fn uncovered_endpoints_fail() {
        let mut g = SphereGraph::new(0.8, 4.0);
        g.insert(Vec3::zeros(), 1.0);
        let params = PlannerParams::default();
        let far = Vec3::new(10.0, 0.0, 0.0);
        assert_eq!(
            astar_sphere_graph(&g, &Vec3::zeros(), &far, &params, None),
            Err(PlanError::Uncovered("goal"))
        );
        // inside the sphere but too close to its surface
        let edge = Vec3::new(0.5, 0.0, 0.0);
        assert_eq!(
            astar_sphere_graph(&g, &edge, &Vec3::zeros(), &params, None),
            Err(PlanError::Uncovered("start"))
        );
    }
}
