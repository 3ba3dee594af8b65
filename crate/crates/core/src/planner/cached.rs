use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use rustc_hash::FxHashMap as HashMap;

use super::cost::PlannerParams;
use super::result::{PlanError, PlanMode, PlanResult, Waypoint};
use super::sphere::{attach, best_first, clearance_in, GOAL, START};
use crate::geometry::Vec3;
use crate::map::{portal_key, NodeId, SegmentId, SphereMap};

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
struct Key(f64, u32);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Shortest costs from a virtual point (attached to `entry`) to nodes of one
/// segment. `to_point` optionally adds a virtual target reachable from
/// `exit`. The search stops once every node of `targets` and the virtual
/// target are settled. Returns `(cost, predecessor)` per reached state;
/// only settled states are final.
fn dijkstra_in_segment(
    map: &SphereMap,
    params: &PlannerParams,
    label: SegmentId,
    point: (&Vec3, f64),
    entry: NodeId,
    to_point: Option<(&Vec3, f64, NodeId)>,
    targets: &[NodeId],
) -> HashMap<u32, (f64, u32)> {
    let graph = map.graph();
    let mut dist: HashMap<u32, (f64, u32)> = HashMap::default();
    let mut heap = BinaryHeap::new();
    let en = graph.get(entry);
    let c0 = params.transition_total(point.0, point.1, &en.position, en.radius);
    dist.insert(entry.0, (c0, START));
    heap.push(Reverse(Key(c0, entry.0)));
    if let Some((target, rt, exit)) = to_point {
        if exit == entry {
            let c = params.transition_total(point.0, point.1, target, rt);
            dist.insert(GOAL, (c, START));
            heap.push(Reverse(Key(c, GOAL)));
        }
    }
    let mut pending: Vec<u32> = targets.iter().map(|n| n.0).collect();
    if to_point.is_some() {
        pending.push(GOAL);
    }
    pending.sort_unstable();
    pending.dedup();
    while let Some(Reverse(Key(d, s))) = heap.pop() {
        if d > dist[&s].0 {
            continue;
        }
        if let Ok(i) = pending.binary_search(&s) {
            pending.remove(i);
            if pending.is_empty() {
                break;
            }
        }
        if s == GOAL {
            continue;
        }
        let n = graph.get(NodeId(s));
        let mut relax = |t: u32, c: f64| {
            let nd = d + c;
            if dist.get(&t).map_or(true, |(old, _)| nd < *old) {
                dist.insert(t, (nd, s));
                heap.push(Reverse(Key(nd, t)));
            }
        };
        for m in graph.neighbors(n.id) {
            let mn = graph.get(*m);
            if mn.segment == Some(label) {
                relax(m.0, params.transition_total(&n.position, n.radius, &mn.position, mn.radius));
            }
        }
        if let Some((target, rt, exit)) = to_point {
            if n.id == exit {
                relax(GOAL, params.transition_total(&n.position, n.radius, target, rt));
            }
        }
    }
    dist
}

/// Unwinds a predecessor map from `state` back to `START` (exclusive).
fn unwind(dist: &HashMap<u32, (f64, u32)>, mut state: u32) -> Vec<u32> {
    let mut out = Vec::new();
    while state != START {
        out.push(state);
        state = dist[&state].1;
    }
    out.reverse();
    out
}

/// How the meta-graph reached a state.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Leg {
    FromStart,
    Cached,
    Crossing,
    ToGoal,
}

/// Long-distance planning over portals and cached intra-segment paths.
///
/// Only the segments holding the start and the goal are searched sphere by
/// sphere; everything in between is composed from cached paths and portal
/// crossings.
pub fn plan_cached(map: &SphereMap, start: &Vec3, goal: &Vec3, params: &PlannerParams) -> Result<PlanResult, PlanError> {
    let t = Instant::now();
    let graph = map.graph();
    let entry = attach(graph, start, params.r_min, None).ok_or(PlanError::Uncovered("start"))?;
    let exit = attach(graph, goal, params.r_min, None).ok_or(PlanError::Uncovered("goal"))?;
    let (en, ex) = (graph.get(entry), graph.get(exit));
    let seg_s = en.segment.ok_or(PlanError::Uncovered("start"))?;
    let seg_g = ex.segment.ok_or(PlanError::Uncovered("goal"))?;
    let rs = clearance_in(en, start);
    let rg = clearance_in(ex, goal);

    let same = seg_s == seg_g;
    let endpoints_s = map.portal_endpoints(seg_s);
    let endpoints_g = map.portal_endpoints(seg_g);
    let from_start =
        dijkstra_in_segment(map, params, seg_s, (start, rs), entry, same.then_some((goal, rg, exit)), &endpoints_s);
    // costs are symmetric, so searching from the goal gives costs to it
    let to_goal = dijkstra_in_segment(map, params, seg_g, (goal, rg), exit, None, &endpoints_g);

    let pos = |s: u32| match s {
        START => *start,
        GOAL => *goal,
        id => graph.get(NodeId(id)).position,
    };
    let found = best_first(
        START,
        GOAL,
        |s| (pos(s) - goal).norm(),
        |s, out| {
            if s == GOAL {
                return;
            }
            if s == START {
                for e in &endpoints_s {
                    if let Some((c, _)) = from_start.get(&e.0) {
                        out.push((e.0, *c));
                    }
                }
                if let Some((c, _)) = from_start.get(&GOAL) {
                    out.push((GOAL, *c));
                }
                return;
            }
            let n = graph.get(NodeId(s));
            let label = n.segment.expect("portal endpoints are segmented");
            if label == seg_g {
                if let Some((c, _)) = to_goal.get(&s) {
                    out.push((GOAL, *c));
                }
            }
            if let Some(paths) = map.cached_paths(label) {
                for ((a, b), p) in paths {
                    let other = if *a == n.id {
                        *b
                    } else if *b == n.id {
                        *a
                    } else {
                        continue;
                    };
                    out.push((other.0, p.cost));
                }
            }
            if let Some(seg) = map.segment(label) {
                for peer in &seg.peers {
                    let key = portal_key(label, *peer);
                    let portal = &map.portals()[&key];
                    if portal.endpoint_in(key, label) != n.id {
                        continue;
                    }
                    let other = portal.endpoint_in(key, *peer);
                    let on = graph.get(other);
                    out.push((other.0, params.transition_total(&n.position, n.radius, &on.position, on.radius)));
                }
            }
        },
    );
    let (meta, _) = found.ok_or(PlanError::NoPath)?;

    let node_wp = |id: NodeId| {
        let n = graph.get(id);
        Waypoint { position: n.position, clearance: n.radius }
    };
    let mut waypoints = vec![Waypoint { position: *start, clearance: rs }];
    for pair in meta.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let leg = if a == START {
            Leg::FromStart
        } else if b == GOAL {
            Leg::ToGoal
        } else if graph.get(NodeId(a)).segment == graph.get(NodeId(b)).segment {
            Leg::Cached
        } else {
            Leg::Crossing
        };
        match leg {
            Leg::FromStart => {
                for s in unwind(&from_start, b) {
                    if s != GOAL {
                        waypoints.push(node_wp(NodeId(s)));
                    }
                }
            }
            Leg::ToGoal => {
                let mut back = unwind(&to_goal, a);
                back.reverse();
                for s in back.into_iter().skip(1) {
                    waypoints.push(node_wp(NodeId(s)));
                }
            }
            Leg::Cached => {
                let label = graph.get(NodeId(a)).segment.expect("segmented");
                let key = if a < b { (NodeId(a), NodeId(b)) } else { (NodeId(b), NodeId(a)) };
                let path = &map.cached_paths(label).expect("cached")[&key].nodes;
                if key.0 .0 == a {
                    waypoints.extend(path.iter().skip(1).map(|id| node_wp(*id)));
                } else {
                    waypoints.extend(path.iter().rev().skip(1).map(|id| node_wp(*id)));
                }
            }
            Leg::Crossing => waypoints.push(node_wp(NodeId(b))),
        }
    }
    waypoints.push(Waypoint { position: *goal, clearance: rg });
    Ok(PlanResult::from_waypoints(waypoints, params, PlanMode::Cached, t.elapsed()))
}
