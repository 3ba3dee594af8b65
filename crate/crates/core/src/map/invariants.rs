use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::{portal_key, NodeId, PortalKey, SegmentId, SphereMap};
use crate::geometry::intersection_radius;
use crate::planner::astar_nodes;
use crate::spatial::ObstacleIndex;
use crate::voxel::OccupancyGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    EdgeRule,
    Partition,
    Connectivity,
    Bounds,
    Portal,
    Cache,
    Redundancy,
    Clearance,
}

/// A broken structural invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.rule, self.detail)
    }
}

struct Sink(Vec<Violation>);

impl Sink {
    fn push(&mut self, rule: Rule, detail: String) {
        self.0.push(Violation { rule, detail });
    }
}

impl SphereMap {
    /// Exhaustive structural check. Returns every violation found; an empty
    /// list means the map is consistent.
    ///
    /// Covered: the edge rule on all node pairs, the segment partition and
    /// member connectivity, bounding spheres, portal uniqueness and
    /// maximality, cached paths against a fresh search, and absence of
    /// redundant nodes inside the last update cube.
    pub fn check_invariants(&self) -> Vec<Violation> {
        let mut out = Sink(Vec::new());
        self.check_edges(&mut out);
        self.check_segments(&mut out);
        self.check_portals(&mut out);
        self.check_cache(&mut out);
        self.check_redundancy(&mut out);
        out.0
    }

    fn check_edges(&self, out: &mut Sink) {
        let g = &self.graph;
        let nodes: Vec<_> = g.nodes().collect();
        let reach = g.max_radius();
        for a in &nodes {
            if a.radius < self.params.r_min {
                out.push(Rule::EdgeRule, format!("{} radius {} below r_min", a.id, a.radius));
            }
            let mut expected = Vec::new();
            g.for_each_near(&a.position, a.radius + reach, |b| {
                if b.id != a.id && g.edge_rule(a, b) {
                    expected.push(b.id);
                }
            });
            expected.sort_unstable();
            let stored = g.neighbors(a.id);
            if stored != expected.as_slice() {
                out.push(
                    Rule::EdgeRule,
                    format!("{} has neighbors {:?}, edge rule gives {:?}", a.id, stored, expected),
                );
            }
            for b in stored {
                if !g.has_edge(*b, a.id) {
                    out.push(Rule::EdgeRule, format!("edge {}-{} is not symmetric", a.id, b));
                }
            }
        }
    }

    fn check_segments(&self, out: &mut Sink) {
        let mut seen: BTreeMap<SegmentId, BTreeSet<NodeId>> = BTreeMap::new();
        for n in self.graph.nodes() {
            match n.segment {
                None => out.push(Rule::Partition, format!("{} is unassigned", n.id)),
                Some(s) if !self.segments.contains_key(&s) => {
                    out.push(Rule::Partition, format!("{} points at missing segment {s}", n.id))
                }
                Some(s) => {
                    seen.entry(s).or_default().insert(n.id);
                }
            }
        }
        for (label, seg) in &self.segments {
            if seg.label != *label {
                out.push(Rule::Partition, format!("segment {label} stores label {}", seg.label));
            }
            if seg.members.is_empty() {
                out.push(Rule::Partition, format!("segment {label} is empty"));
                continue;
            }
            if seen.get(label) != Some(&seg.members) {
                out.push(Rule::Partition, format!("member set of {label} disagrees with node labels"));
            }
            let first = *seg.members.first().expect("non-empty");
            let mut reached = BTreeSet::from([first]);
            let mut queue = VecDeque::from([first]);
            while let Some(x) = queue.pop_front() {
                for n in self.graph.neighbors(x) {
                    if seg.members.contains(n) && reached.insert(*n) {
                        queue.push_back(*n);
                    }
                }
            }
            if reached.len() != seg.members.len() {
                out.push(
                    Rule::Connectivity,
                    format!("segment {label}: {} of {} members reachable", reached.len(), seg.members.len()),
                );
            }
            for m in &seg.members {
                let Some(n) = self.graph.node(*m) else {
                    out.push(Rule::Partition, format!("segment {label} lists dead node {m}"));
                    continue;
                };
                let slack = (n.position - seg.bounds.center).norm() + n.radius - seg.bounds.radius;
                if slack > 1e-9 * (1.0 + seg.bounds.radius) {
                    out.push(Rule::Bounds, format!("{m} sticks out of the bounds of {label} by {slack}"));
                }
            }
        }
    }

    fn check_portals(&self, out: &mut Sink) {
        let mut best: BTreeMap<PortalKey, (f64, NodeId, NodeId)> = BTreeMap::new();
        for (a, b) in self.graph.edges() {
            let (na, nb) = (self.graph.get(a), self.graph.get(b));
            let (Some(sa), Some(sb)) = (na.segment, nb.segment) else { continue };
            if sa == sb {
                continue;
            }
            let key = portal_key(sa, sb);
            let (lo, hi) = if sa < sb { (a, b) } else { (b, a) };
            let r = intersection_radius(&na.position, na.radius, &nb.position, nb.radius);
            let better = match best.get(&key) {
                None => true,
                Some(cur) => r > cur.0 || (r == cur.0 && (lo, hi) < (cur.1, cur.2)),
            };
            if better {
                best.insert(key, (r, lo, hi));
            }
        }
        for (key, (r, a, b)) in &best {
            match self.portals.get(key) {
                None => out.push(Rule::Portal, format!("adjacent segments {:?} have no portal", key)),
                Some(p) if p.a != *a || p.b != *b || p.radius != *r => out.push(
                    Rule::Portal,
                    format!("portal {:?} is {}-{} ({}), best edge is {a}-{b} ({r})", key, p.a, p.b, p.radius),
                ),
                _ => {}
            }
        }
        for key in self.portals.keys() {
            if !best.contains_key(key) {
                out.push(Rule::Portal, format!("portal {:?} joins non-adjacent segments", key));
            }
        }
        for (label, seg) in &self.segments {
            let expected: BTreeSet<SegmentId> = best
                .keys()
                .filter_map(|(x, y)| {
                    if x == label {
                        Some(*y)
                    } else if y == label {
                        Some(*x)
                    } else {
                        None
                    }
                })
                .collect();
            if seg.peers != expected {
                out.push(Rule::Portal, format!("peer list of {label} is stale"));
            }
        }
    }

    fn check_cache(&self, out: &mut Sink) {
        let planner = self.params.planner_params();
        for label in self.segments.keys() {
            let endpoints = self.portal_endpoints(*label);
            let mut expected = BTreeMap::new();
            for (i, a) in endpoints.iter().enumerate() {
                for b in &endpoints[i + 1..] {
                    if let Some((nodes, cost)) = astar_nodes(&self.graph, &planner, *a, *b, Some(*label)) {
                        expected.insert((*a, *b), (nodes, cost as f32));
                    }
                }
            }
            let cached = self.cache.get(label);
            let got = cached.map_or(0, |c| c.len());
            if got != expected.len() {
                out.push(Rule::Cache, format!("segment {label} caches {got} paths, expected {}", expected.len()));
            }
            for (key, (_, cost)) in &expected {
                match cached.and_then(|c| c.get(key)) {
                    None => out.push(Rule::Cache, format!("segment {label} misses path {}-{}", key.0, key.1)),
                    Some(p) => {
                        if p.cost as f32 != *cost {
                            out.push(
                                Rule::Cache,
                                format!("path {}-{} costs {} cached, {} recomputed", key.0, key.1, p.cost, cost),
                            );
                        }
                        let valid = p.nodes.first() == Some(&key.0)
                            && p.nodes.last() == Some(&key.1)
                            && p.nodes.iter().all(|n| self.graph.node(*n).is_some_and(|n| n.segment == Some(*label)))
                            && p.nodes.windows(2).all(|w| self.graph.has_edge(w[0], w[1]));
                        if !valid {
                            out.push(Rule::Cache, format!("path {}-{} is not a path inside {label}", key.0, key.1));
                        }
                    }
                }
            }
        }
        for label in self.cache.keys() {
            if !self.segments.contains_key(label) {
                out.push(Rule::Cache, format!("cache kept for missing segment {label}"));
            }
        }
    }

    fn check_redundancy(&self, out: &mut Sink) {
        let Some(cube) = self.last_cube else { return };
        for id in self.graph.nodes_in_cube(&cube) {
            if self.graph.is_redundant(id, self.params.redundancy_coverage) {
                out.push(Rule::Redundancy, format!("{id} is redundant after the last iteration"));
            }
        }
    }

    /// Checks that no node in the last update cube claims more clearance
    /// than the grid allows. Distances are taken to all occupied voxels and
    /// frontier voxels of the whole grid.
    pub fn check_clearance(&self, grid: &OccupancyGrid) -> Vec<Violation> {
        let mut out = Sink(Vec::new());
        let Some(cube) = self.last_cube else { return out.0 };
        let everything = crate::voxel::UpdateCube::new(grid.origin() + grid.extent() / 2.0, grid.extent().max() + 2.0);
        let index = ObstacleIndex::build(
            &grid.obstacle_points(&everything),
            &grid.frontier_points(&everything, self.params.frontier_connectivity),
        );
        for id in self.graph.nodes_in_cube(&cube) {
            let n = self.graph.get(id);
            let d = index.nearest_distance(&n.position);
            if n.radius > d + self.params.radius_tolerance {
                out.push(Rule::Clearance, format!("{id} has radius {} but clearance {d}", n.radius));
            }
        }
        out.0
    }
}
