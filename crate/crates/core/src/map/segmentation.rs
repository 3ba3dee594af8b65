use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use super::update::ChangeSummary;
use super::{portal_key, CachedPath, NodeId, Portal, Segment, SegmentId, SphereMap};
use crate::geometry::{intersection_radius, Ball};
use crate::planner::astar_nodes;
use crate::voxel::{OccupancyGrid, UpdateCube};

/// Total order over finite distances for the flood-fill queue.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
struct Dist(f64);

impl Eq for Dist {}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl SphereMap {
    fn node_ball(&self, id: NodeId) -> Ball {
        let n = self.graph.get(id);
        Ball::new(n.position, n.radius)
    }

    fn new_label(&mut self) -> SegmentId {
        let l = SegmentId(self.next_segment);
        self.next_segment += 1;
        l
    }

    fn create_segment(&mut self, members: BTreeSet<NodeId>) -> SegmentId {
        let label = self.new_label();
        for m in &members {
            self.graph.set_segment(*m, Some(label));
        }
        let balls: Vec<Ball> = members.iter().map(|m| self.node_ball(*m)).collect();
        let bounds = Ball::enclosing(&balls).expect("segments are created non-empty");
        self.segments.insert(
            label,
            Segment {
                label,
                members,
                bounds,
                peers: BTreeSet::new(),
            },
        );
        self.altered.insert(label);
        label
    }

    /// Drops a segment with its portals, cache and box. Former peers are
    /// marked altered since their portal sets change.
    fn delete_segment(&mut self, label: SegmentId) {
        let Some(seg) = self.segments.remove(&label) else {
            return;
        };
        for p in &seg.peers {
            self.portals.remove(&portal_key(label, *p));
            if let Some(peer) = self.segments.get_mut(p) {
                peer.peers.remove(&label);
                self.altered.insert(*p);
            }
        }
        self.cache.remove(&label);
        self.boxes.remove(&label);
        self.altered.remove(&label);
    }

    fn recompute_bounds(&mut self, label: SegmentId) {
        let balls: Vec<Ball> = self.segments[&label].members.iter().map(|m| self.node_ball(*m)).collect();
        if let Some(b) = Ball::enclosing(&balls) {
            self.segments.get_mut(&label).expect("exists").bounds = b;
        }
    }

    /// Connected components of the member subgraph, each sorted, ordered by
    /// their smallest id.
    fn components(&self, label: SegmentId) -> Vec<BTreeSet<NodeId>> {
        let members = &self.segments[&label].members;
        let mut seen = BTreeSet::new();
        let mut comps = Vec::new();
        for m in members {
            if seen.contains(m) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([*m]);
            seen.insert(*m);
            while let Some(x) = queue.pop_front() {
                comp.insert(x);
                for n in self.graph.neighbors(x) {
                    if members.contains(n) && seen.insert(*n) {
                        queue.push_back(*n);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    /// Splits a disconnected segment. The largest component keeps the
    /// label, the rest get new ones. Returns the new labels.
    fn split(&mut self, label: SegmentId) -> Vec<SegmentId> {
        let mut comps = self.components(label);
        if comps.len() <= 1 {
            return Vec::new();
        }
        // stable sort keeps the smallest-id component first among equals
        comps.sort_by_key(|c| Reverse(c.len()));
        let keep = comps.remove(0);
        self.segments.get_mut(&label).expect("exists").members = keep;
        self.recompute_bounds(label);
        self.altered.insert(label);
        comps.into_iter().map(|c| self.create_segment(c)).collect()
    }

    /// Flood-fills unassigned nodes into the segment while its bounding
    /// sphere stays within `r_exp` (or its current size, if larger).
    fn grow(&mut self, label: SegmentId) -> usize {
        let seg = &self.segments[&label];
        let center = seg.bounds.center;
        let limit = self.params.r_exp.max(seg.bounds.radius);
        let mut queued = BTreeSet::new();
        let mut heap = BinaryHeap::new();
        for m in &seg.members {
            for n in self.graph.neighbors(*m) {
                if self.graph.get(*n).segment.is_none() && queued.insert(*n) {
                    let d = (self.graph.get(*n).position - center).norm();
                    heap.push(Reverse((Dist(d), *n)));
                }
            }
        }
        let mut added = 0;
        while let Some(Reverse((_, n))) = heap.pop() {
            if self.graph.get(n).segment.is_some() {
                continue;
            }
            let bounds = self.segments[&label].bounds.union(&self.node_ball(n));
            if bounds.radius > limit {
                continue;
            }
            let seg = self.segments.get_mut(&label).expect("exists");
            seg.bounds = bounds;
            seg.members.insert(n);
            self.graph.set_segment(n, Some(label));
            added += 1;
            for m in self.graph.neighbors(n) {
                if self.graph.get(*m).segment.is_none() && queued.insert(*m) {
                    let d = (self.graph.get(*m).position - center).norm();
                    heap.push(Reverse((Dist(d), *m)));
                }
            }
        }
        if added > 0 {
            self.altered.insert(label);
        }
        added
    }

    /// Labels of segments adjacent to `label` through any sphere edge.
    fn adjacent_segments(&self, label: SegmentId) -> BTreeSet<SegmentId> {
        let mut out = BTreeSet::new();
        for m in &self.segments[&label].members {
            for n in self.graph.neighbors(*m) {
                if let Some(t) = self.graph.get(*n).segment {
                    if t != label {
                        out.insert(t);
                    }
                }
            }
        }
        out
    }

    fn try_merge(&mut self, grid: &OccupancyGrid, a: SegmentId, b: SegmentId) -> bool {
        let (ba, bb) = (self.segments[&a].bounds, self.segments[&b].bounds);
        let merged = ba.union(&bb);
        if merged.radius > self.params.r_merge || !grid.raycast_free(&ba.center, &bb.center) {
            return false;
        }
        let moved = std::mem::take(&mut self.segments.get_mut(&b).expect("exists").members);
        for m in &moved {
            self.graph.set_segment(*m, Some(a));
        }
        self.delete_segment(b);
        let seg = self.segments.get_mut(&a).expect("exists");
        seg.members.extend(moved);
        seg.bounds = merged;
        self.altered.insert(a);
        true
    }

    /// Recomputes the portals of `label`. Returns the peers whose shared
    /// portal appeared, vanished or moved.
    fn recompute_portals(&mut self, label: SegmentId) -> BTreeSet<SegmentId> {
        let mut best: BTreeMap<SegmentId, Portal> = BTreeMap::new();
        for m in &self.segments[&label].members {
            let nm = self.graph.get(*m);
            for n in self.graph.neighbors(*m) {
                let nn = self.graph.get(*n);
                let Some(t) = nn.segment else { continue };
                if t == label {
                    continue;
                }
                let radius = intersection_radius(&nm.position, nm.radius, &nn.position, nn.radius);
                let cand = if label < t {
                    Portal { a: *m, b: *n, radius }
                } else {
                    Portal { a: *n, b: *m, radius }
                };
                let better = match best.get(&t) {
                    None => true,
                    Some(cur) => radius > cur.radius || (radius == cur.radius && (cand.a, cand.b) < (cur.a, cur.b)),
                };
                if better {
                    best.insert(t, cand);
                }
            }
        }
        let mut changed = BTreeSet::new();
        let old_peers = self.segments[&label].peers.clone();
        for t in old_peers.difference(&best.keys().copied().collect()) {
            self.portals.remove(&portal_key(label, *t));
            if let Some(peer) = self.segments.get_mut(t) {
                peer.peers.remove(&label);
            }
            changed.insert(*t);
        }
        for (t, portal) in &best {
            let key = portal_key(label, *t);
            if self.portals.get(&key) != Some(portal) {
                self.portals.insert(key, *portal);
                changed.insert(*t);
            }
            self.segments.get_mut(t).expect("live label").peers.insert(label);
        }
        self.segments.get_mut(&label).expect("exists").peers = best.keys().copied().collect();
        changed
    }

    /// Recomputes all cached portal-to-portal paths of a segment.
    fn recompute_cache(&mut self, label: SegmentId) -> usize {
        let endpoints = self.portal_endpoints(label);
        let planner = self.params.planner_params();
        let mut entries = BTreeMap::new();
        for (i, a) in endpoints.iter().enumerate() {
            for b in &endpoints[i + 1..] {
                if let Some((nodes, cost)) = astar_nodes(&self.graph, &planner, *a, *b, Some(label)) {
                    entries.insert(
                        (*a, *b),
                        CachedPath {
                            nodes,
                            cost: cost as f32 as f64,
                        },
                    );
                }
            }
        }
        let n = entries.len();
        if entries.is_empty() {
            self.cache.remove(&label);
        } else {
            self.cache.insert(label, entries);
        }
        n
    }

    /// Splits, grows, seeds and merges segments around the cube, then
    /// refreshes portals, cached paths and boxes of everything touched.
    pub(super) fn segment_update(&mut self, grid: &OccupancyGrid, cube: &UpdateCube) -> ChangeSummary {
        let mut s = ChangeSummary::default();
        let in_cube = self.graph.nodes_in_cube(cube);

        let empty: Vec<SegmentId> = self
            .altered
            .iter()
            .filter(|l| self.segments.get(l).is_some_and(|seg| seg.members.is_empty()))
            .copied()
            .collect();
        for l in empty {
            self.delete_segment(l);
            s.segments_removed += 1;
        }
        self.altered.retain(|l| self.segments.contains_key(l));

        let mut near: BTreeSet<SegmentId> = in_cube.iter().filter_map(|id| self.graph.get(*id).segment).collect();
        near.extend(self.altered.iter().copied());

        for label in near.clone() {
            let created = self.split(label);
            if !created.is_empty() {
                s.segments_split += 1;
                s.segments_created += created.len();
                near.extend(created);
            }
        }
        for label in self.altered.clone() {
            self.recompute_bounds(label);
        }

        for label in near.clone() {
            self.grow(label);
        }
        let mut seeds: Vec<(f64, NodeId)> = in_cube
            .iter()
            .map(|id| self.graph.get(*id))
            .filter(|n| n.segment.is_none())
            .map(|n| (n.radius, n.id))
            .collect();
        seeds.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, id) in seeds {
            if self.graph.get(id).segment.is_some() {
                continue;
            }
            let label = self.create_segment(BTreeSet::from([id]));
            self.grow(label);
            near.insert(label);
            s.segments_created += 1;
        }

        loop {
            let mut merged_any = false;
            let mut pairs = BTreeSet::new();
            for label in &near {
                if !self.segments.contains_key(label) {
                    continue;
                }
                for t in self.adjacent_segments(*label) {
                    pairs.insert(portal_key(*label, t));
                }
            }
            for (a, b) in pairs {
                if self.segments.contains_key(&a) && self.segments.contains_key(&b) && self.try_merge(grid, a, b) {
                    s.segments_merged += 1;
                    merged_any = true;
                }
            }
            if !merged_any {
                break;
            }
            near.retain(|l| self.segments.contains_key(l));
        }

        let altered: Vec<SegmentId> = self.altered.iter().copied().filter(|l| self.segments.contains_key(l)).collect();
        let mut dirty: BTreeSet<SegmentId> = altered.iter().copied().collect();
        for label in &altered {
            dirty.extend(self.recompute_portals(*label));
        }
        for label in &dirty {
            if self.segments.contains_key(label) {
                s.paths_cached += self.recompute_cache(*label);
                self.refit_box(*label);
            }
        }
        self.altered.clear();
        s
    }
}
