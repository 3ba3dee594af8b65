use std::collections::BTreeMap;
use std::fmt;

use crate::geometry::{covered_fraction, intersection_radius, quantize, quantize_point, Vec3};
use crate::spatial::NodeIndex;
use crate::voxel::UpdateCube;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// A free-space sphere. `radius` is the obstacle distance at `position` as
/// of the last update that touched it.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereNode {
    pub id: NodeId,
    pub position: Vec3,
    pub radius: f64,
    pub segment: Option<SegmentId>,
}

#[derive(Clone, Debug, PartialEq)]
struct Slot {
    node: SphereNode,
    neighbors: Vec<NodeId>,
}

/// Edges that changed when a node was reconnected.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeDelta {
    pub added: Vec<NodeId>,
    pub removed: Vec<NodeId>,
}

/// Undirected graph of spheres. Two spheres are adjacent iff their surfaces
/// intersect in a circle of radius greater than `r_min`.
///
/// Ids are never reused. Positions and radii are stored on the `f32`
/// lattice, radii rounded down.
#[derive(Clone, Debug)]
pub struct SphereGraph {
    slots: Vec<Option<Slot>>,
    index: NodeIndex,
    radii: BTreeMap<u64, u32>,
    live: usize,
    edges: usize,
    r_min: f64,
}

impl PartialEq for SphereGraph {
    fn eq(&self, other: &Self) -> bool {
        let trimmed = |s: &[Option<Slot>]| {
            let end = s.iter().rposition(Option::is_some).map_or(0, |i| i + 1);
            s[..end].to_vec()
        };
        self.r_min == other.r_min && trimmed(&self.slots) == trimmed(&other.slots)
    }
}

impl SphereGraph {
    pub fn new(r_min: f64, cell_size: f64) -> Self {
        Self {
            slots: Vec::new(),
            index: NodeIndex::new(cell_size),
            radii: BTreeMap::new(),
            live: 0,
            edges: 0,
            r_min,
        }
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// The id the next inserted node will get.
    pub fn next_id(&self) -> u32 {
        self.slots.len() as u32
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.slot(id).is_some()
    }

    fn slot(&self, id: NodeId) -> Option<&Slot> {
        self.slots.get(id.0 as usize).and_then(Option::as_ref)
    }

    fn slot_mut(&mut self, id: NodeId) -> Option<&mut Slot> {
        self.slots.get_mut(id.0 as usize).and_then(Option::as_mut)
    }

    pub fn node(&self, id: NodeId) -> Option<&SphereNode> {
        self.slot(id).map(|s| &s.node)
    }

    /// Panicking accessor for ids known to be live.
    pub fn get(&self, id: NodeId) -> &SphereNode {
        self.node(id).unwrap_or_else(|| panic!("node {id} is not live"))
    }

    /// Sorted neighbor list; empty for dead ids.
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        self.slot(id).map_or(&[], |s| &s.neighbors)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Live nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &SphereNode> + '_ {
        self.slots.iter().flatten().map(|s| &s.node)
    }

    pub fn ids(&self) -> Vec<NodeId> {
        self.nodes().map(|n| n.id).collect()
    }

    /// Every edge once, as `(low, high)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.slots.iter().flatten().flat_map(|s| {
            let a = s.node.id;
            s.neighbors.iter().filter(move |b| **b > a).map(move |b| (a, *b))
        })
    }

    /// Largest live radius, 0 for an empty graph.
    pub fn max_radius(&self) -> f64 {
        self.radii
            .keys()
            .next_back()
            .map_or(0.0, |bits| f64::from_bits(*bits))
    }

    pub fn set_segment(&mut self, id: NodeId, segment: Option<SegmentId>) {
        if let Some(s) = self.slot_mut(id) {
            s.node.segment = segment;
        }
    }

    fn track_radius(&mut self, r: f64, add: bool) {
        let key = r.to_bits();
        if add {
            *self.radii.entry(key).or_insert(0) += 1;
        } else if let Some(c) = self.radii.get_mut(&key) {
            *c -= 1;
            if *c == 0 {
                self.radii.remove(&key);
            }
        }
    }

    /// Whether two stored spheres satisfy the edge rule.
    pub fn edge_rule(&self, a: &SphereNode, b: &SphereNode) -> bool {
        intersection_radius(&a.position, a.radius, &b.position, b.radius) > self.r_min
    }

    /// Places a node with an explicit id and no edges. Used when restoring
    /// snapshots; the id must be unused.
    pub(crate) fn insert_raw(&mut self, node: SphereNode) {
        let i = node.id.0 as usize;
        if self.slots.len() <= i {
            self.slots.resize(i + 1, None);
        }
        assert!(self.slots[i].is_none(), "duplicate node id {}", node.id);
        self.index.insert(node.id.0, node.position);
        self.track_radius(node.radius, true);
        self.live += 1;
        self.slots[i] = Some(Slot {
            node,
            neighbors: Vec::new(),
        });
    }

    /// Reserves ids up to `next` so that fresh ids continue after it.
    pub(crate) fn reserve_ids(&mut self, next: u32) {
        if self.slots.len() < next as usize {
            self.slots.resize(next as usize, None);
        }
    }

    pub(crate) fn add_edge_raw(&mut self, a: NodeId, b: NodeId) -> bool {
        if a == b || !self.contains(a) || !self.contains(b) || self.has_edge(a, b) {
            return false;
        }
        for (x, y) in [(a, b), (b, a)] {
            let n = &mut self.slot_mut(x).expect("checked").neighbors;
            let pos = n.binary_search(&y).unwrap_err();
            n.insert(pos, y);
        }
        self.edges += 1;
        true
    }

    fn remove_edge_raw(&mut self, a: NodeId, b: NodeId) {
        for (x, y) in [(a, b), (b, a)] {
            if let Some(s) = self.slot_mut(x) {
                if let Ok(pos) = s.neighbors.binary_search(&y) {
                    s.neighbors.remove(pos);
                }
            }
        }
        self.edges -= 1;
    }

    /// Adds a node, quantizing its position and radius, and connects it by
    /// the edge rule.
    pub fn insert(&mut self, position: Vec3, radius: f64) -> NodeId {
        let id = NodeId(self.next_id());
        self.insert_raw(SphereNode {
            id,
            position: quantize_point(position),
            radius: quantize(radius),
            segment: None,
        });
        self.reconnect(id);
        id
    }

    /// Removes a node and its edges, returning the node and its former
    /// neighbors.
    pub fn remove(&mut self, id: NodeId) -> Option<(SphereNode, Vec<NodeId>)> {
        let slot = self.slots.get_mut(id.0 as usize)?.take()?;
        for n in &slot.neighbors {
            if let Some(s) = self.slot_mut(*n) {
                if let Ok(pos) = s.neighbors.binary_search(&id) {
                    s.neighbors.remove(pos);
                }
            }
        }
        self.edges -= slot.neighbors.len();
        self.index.remove(id.0).expect("index mirrors the slots");
        self.track_radius(slot.node.radius, false);
        self.live -= 1;
        Some((slot.node, slot.neighbors))
    }

    /// Stores a new radius (quantized) without touching edges; follow with
    /// [`SphereGraph::reconnect`].
    pub fn set_radius(&mut self, id: NodeId, radius: f64) {
        let r = quantize(radius);
        let old = match self.slot_mut(id) {
            Some(s) => std::mem::replace(&mut s.node.radius, r),
            None => return,
        };
        self.track_radius(old, false);
        self.track_radius(r, true);
    }

    /// Ids of live nodes that satisfy the edge rule with `id`, sorted.
    fn rule_neighbors(&self, id: NodeId) -> Vec<NodeId> {
        let me = self.get(id);
        let reach = me.radius + self.max_radius();
        let mut out = Vec::new();
        self.index.for_each_within(&me.position, reach, |other, _| {
            let other = NodeId(other);
            if other != id && self.edge_rule(me, self.get(other)) {
                out.push(other);
            }
        });
        out.sort_unstable();
        out
    }

    /// Re-evaluates every edge of `id` against the current radii.
    pub fn reconnect(&mut self, id: NodeId) -> EdgeDelta {
        if !self.contains(id) {
            return EdgeDelta::default();
        }
        let wanted = self.rule_neighbors(id);
        let current = self.neighbors(id).to_vec();
        let mut delta = EdgeDelta::default();
        for n in &current {
            if wanted.binary_search(n).is_err() {
                delta.removed.push(*n);
            }
        }
        for n in &wanted {
            if current.binary_search(n).is_err() {
                delta.added.push(*n);
            }
        }
        for n in &delta.removed {
            self.remove_edge_raw(id, *n);
        }
        for n in &delta.added {
            self.add_edge_raw(id, *n);
        }
        delta
    }

    /// Live nodes whose centers lie in the cube, sorted by id.
    pub fn nodes_in_cube(&self, cube: &UpdateCube) -> Vec<NodeId> {
        let mut out = Vec::new();
        let reach = cube.half() * 3f64.sqrt();
        self.index.for_each_within(&cube.center, reach, |id, p| {
            if cube.contains(p) {
                out.push(NodeId(id));
            }
        });
        out.sort_unstable();
        out
    }

    /// Calls `f` for every live node whose center is within `r` of `q`.
    pub fn for_each_near<F: FnMut(&SphereNode)>(&self, q: &Vec3, r: f64, mut f: F) {
        self.index.for_each_within(q, r, |id, _| f(self.get(NodeId(id))));
    }

    /// Node whose sphere covers `q` with the nearest center, ties by id.
    pub fn nearest_covering(&self, q: &Vec3) -> Option<NodeId> {
        self.nearest_covering_with_margin(q, 0.0)
    }

    /// Like [`SphereGraph::nearest_covering`] but the point must lie more
    /// than `margin` inside the sphere.
    pub fn nearest_covering_with_margin(&self, q: &Vec3, margin: f64) -> Option<NodeId> {
        let mut best: Option<(f64, NodeId)> = None;
        self.index.for_each_within(q, self.max_radius(), |id, p| {
            let n = self.get(NodeId(id));
            let d = (p - q).norm();
            if n.radius - d > margin {
                let cand = (d, n.id);
                if best.map_or(true, |b| cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1)) {
                    best = Some(cand);
                }
            }
        });
        best.map(|(_, id)| id)
    }

    /// Whether some live node other than `exclude` with a strictly larger
    /// radius covers at least `kappa` of the ball `(p, r)`.
    pub fn ball_is_redundant(&self, p: &Vec3, r: f64, exclude: Option<NodeId>, kappa: f64) -> bool {
        let reach = self.max_radius();
        if reach <= r {
            return false;
        }
        let mut found = false;
        self.index.for_each_within(p, reach, |id, q| {
            if found || Some(NodeId(id)) == exclude {
                return;
            }
            let big = self.get(NodeId(id)).radius;
            if big > r && covered_fraction(p, r, q, big) >= kappa {
                found = true;
            }
        });
        found
    }

    pub fn is_redundant(&self, id: NodeId, kappa: f64) -> bool {
        let n = self.get(id);
        self.ball_is_redundant(&n.position, n.radius, Some(id), kappa)
    }

    /// Whether `p` lies within `fraction` of the radius of some node's
    /// center.
    pub fn in_core(&self, p: &Vec3, fraction: f64) -> bool {
        self.core_containing(p, fraction, None).is_some()
    }

    /// A node whose core (the concentric ball scaled by `fraction`) holds
    /// `p`. The `hint` node is tested first, which makes runs of nearby
    /// queries cheap.
    pub fn core_containing(&self, p: &Vec3, fraction: f64, hint: Option<NodeId>) -> Option<NodeId> {
        if fraction <= 0.0 {
            return None;
        }
        let inside = |n: &SphereNode| (n.position - p).norm() < fraction * n.radius;
        if let Some(n) = hint.and_then(|h| self.node(h)) {
            if inside(n) {
                return Some(n.id);
            }
        }
        let mut found = None;
        self.index.for_each_within(p, fraction * self.max_radius(), |id, q| {
            if found.is_none() && (q - p).norm() < fraction * self.get(NodeId(id)).radius {
                found = Some(NodeId(id));
            }
        });
        found
    }

    /// Ids of live nodes whose spheres overlap the ball `(p, r)`, sorted.
    pub fn overlapping(&self, p: &Vec3, r: f64) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.index.for_each_within(p, r + self.max_radius(), |id, q| {
            if (q - p).norm() < r + self.get(NodeId(id)).radius {
                out.push(NodeId(id));
            }
        });
        out.sort_unstable();
        out
    }
}
