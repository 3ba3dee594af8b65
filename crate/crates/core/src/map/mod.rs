//! The sphere map: a graph of obstacle-free spheres grouped into bounded
//! segments, with portals between adjacent segments and cached optimal
//! paths between the portals of each segment.
//!
//! The map is grown one [`UpdateCube`] at a time by
//! [`SphereMap::update_iteration`]. Nothing outside the cube (plus the
//! spheres touching it) is read or written by an iteration.

mod frontier;
mod graph;
mod invariants;
mod params;
mod segmentation;
mod snapshot;
mod update;

use std::collections::{BTreeMap, BTreeSet};

pub use frontier::FrontierRegistry;
pub use graph::{EdgeDelta, NodeId, SegmentId, SphereGraph, SphereNode};
pub use invariants::{Rule, Violation};
pub use params::{BuildParams, ConfigError};
pub use snapshot::SnapshotError;
pub use update::{ChangeSummary, IterationReport, StepTimings};

use crate::geometry::{Ball, Vec3};
use crate::ltv::{fit_box, OrientedBox};
use crate::voxel::{OccupancyGrid, UpdateCube};

/// A connected, bounded cluster of spheres.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub label: SegmentId,
    pub members: BTreeSet<NodeId>,
    pub bounds: Ball,
    /// Segments sharing a portal with this one.
    pub peers: BTreeSet<SegmentId>,
}

/// The best edge between two adjacent segments. `a` belongs to the segment
/// with the lower label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Portal {
    pub a: NodeId,
    pub b: NodeId,
    pub radius: f64,
}

impl Portal {
    /// The endpoint lying in `label`'s side of the pair `key`.
    pub fn endpoint_in(&self, key: (SegmentId, SegmentId), label: SegmentId) -> NodeId {
        if key.0 == label {
            self.a
        } else {
            self.b
        }
    }
}

/// Optimal node sequence between two portal endpoints of one segment.
#[derive(Clone, Debug, PartialEq)]
pub struct CachedPath {
    /// From the lower endpoint id to the higher.
    pub nodes: Vec<NodeId>,
    /// Stored rounded to `f32`.
    pub cost: f64,
}

pub type PortalKey = (SegmentId, SegmentId);

pub fn portal_key(a: SegmentId, b: SegmentId) -> PortalKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Debug)]
pub struct SphereMap {
    params: BuildParams,
    graph: SphereGraph,
    segments: BTreeMap<SegmentId, Segment>,
    portals: BTreeMap<PortalKey, Portal>,
    cache: BTreeMap<SegmentId, BTreeMap<(NodeId, NodeId), CachedPath>>,
    next_segment: u32,
    iteration: u64,
    altered: BTreeSet<SegmentId>,
    boxes: BTreeMap<SegmentId, OrientedBox>,
    frontiers: FrontierRegistry,
    last_cube: Option<UpdateCube>,
}

/// Compares the persistent state: everything a snapshot stores.
impl PartialEq for SphereMap {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.graph == other.graph
            && self.segments == other.segments
            && self.portals == other.portals
            && self.cache == other.cache
            && self.next_segment == other.next_segment
            && self.iteration == other.iteration
    }
}

impl SphereMap {
    pub fn new(params: BuildParams) -> Result<Self, ConfigError> {
        params.validate()?;
        Ok(Self {
            graph: SphereGraph::new(params.r_min, params.node_cell_size),
            params,
            segments: BTreeMap::new(),
            portals: BTreeMap::new(),
            cache: BTreeMap::new(),
            next_segment: 0,
            iteration: 0,
            altered: BTreeSet::new(),
            boxes: BTreeMap::new(),
            frontiers: FrontierRegistry::default(),
            last_cube: None,
        })
    }

    pub fn params(&self) -> &BuildParams {
        &self.params
    }

    pub fn graph(&self) -> &SphereGraph {
        &self.graph
    }

    pub fn segments(&self) -> &BTreeMap<SegmentId, Segment> {
        &self.segments
    }

    pub fn segment(&self, label: SegmentId) -> Option<&Segment> {
        self.segments.get(&label)
    }

    pub fn portals(&self) -> &BTreeMap<PortalKey, Portal> {
        &self.portals
    }

    pub fn portal(&self, a: SegmentId, b: SegmentId) -> Option<&Portal> {
        self.portals.get(&portal_key(a, b))
    }

    /// Cached paths of one segment keyed by `(low endpoint, high endpoint)`.
    pub fn cached_paths(&self, label: SegmentId) -> Option<&BTreeMap<(NodeId, NodeId), CachedPath>> {
        self.cache.get(&label)
    }

    pub fn cache_len(&self) -> usize {
        self.cache.values().map(BTreeMap::len).sum()
    }

    /// Portal endpoints lying in `label`, sorted.
    pub fn portal_endpoints(&self, label: SegmentId) -> Vec<NodeId> {
        let Some(seg) = self.segments.get(&label) else {
            return Vec::new();
        };
        let mut out: Vec<NodeId> = seg
            .peers
            .iter()
            .map(|p| {
                let key = portal_key(label, *p);
                self.portals[&key].endpoint_in(key, label)
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn last_cube(&self) -> Option<&UpdateCube> {
        self.last_cube.as_ref()
    }

    pub fn frontiers(&self) -> &FrontierRegistry {
        &self.frontiers
    }

    /// Box envelopes of all segments, refreshed for altered segments at the
    /// end of every iteration.
    pub fn boxes(&self) -> &BTreeMap<SegmentId, OrientedBox> {
        &self.boxes
    }

    /// Fraction of the grid's free voxels whose centroid lies inside some
    /// sphere, restricted to `cube` when given.
    pub fn free_coverage(&self, grid: &OccupancyGrid, cube: Option<&UpdateCube>) -> f64 {
        let range = match cube {
            Some(c) => match c.voxel_range(grid) {
                Some(r) => r,
                None => return 0.0,
            },
            None => grid.full_range(),
        };
        let mut free = 0usize;
        let mut covered = 0usize;
        for v in range.iter() {
            if grid.get(v) != crate::voxel::VoxelState::Free {
                continue;
            }
            free += 1;
            let c = grid.centroid(v);
            if self.graph.nearest_covering(&c).is_some() {
                covered += 1;
            }
        }
        if free == 0 {
            1.0
        } else {
            covered as f64 / free as f64
        }
    }

    /// Sweeps update cubes over the whole grid, one pass per offset of the
    /// voxel sampling lattice. Suited to fully known worlds.
    pub fn build_known(&mut self, grid: &OccupancyGrid) -> Vec<IterationReport> {
        self.build_known_passes(grid, self.params.voxel_stride.pow(3))
    }

    /// [`SphereMap::build_known`] with an explicit pass limit. A pass visits
    /// every cube once; building stops early after a pass that changed
    /// nothing in the sphere graph.
    pub fn build_known_passes(&mut self, grid: &OccupancyGrid, max_passes: usize) -> Vec<IterationReport> {
        let extent = grid.extent();
        let origin = grid.origin();
        let step = self.params.cube_side * 0.8;
        let counts: Vec<usize> = (0..3)
            .map(|a| ((extent[a] / step).ceil() as usize).max(1))
            .collect();
        let mut centers = Vec::new();
        for k in 0..counts[2] {
            for j in 0..counts[1] {
                for i in 0..counts[0] {
                    let idx = [i, j, k];
                    let c = Vec3::from_fn(|a, _| {
                        let n = counts[a] as f64;
                        origin[a] + extent[a] * (idx[a] as f64 + 0.5) / n
                    });
                    centers.push(c);
                }
            }
        }
        let mut reports = Vec::new();
        for pass in 0..max_passes {
            let mut changed = false;
            for c in &centers {
                let r = self.update_with_phase(grid, c, pass as u64);
                changed |= !r.changes.is_quiet();
                reports.push(r);
            }
            if !changed {
                break;
            }
        }
        reports
    }

    fn segment_balls(&self, label: SegmentId) -> Vec<Ball> {
        self.segments[&label]
            .members
            .iter()
            .map(|id| {
                let n = self.graph.get(*id);
                Ball::new(n.position, n.radius)
            })
            .collect()
    }

    fn refit_box(&mut self, label: SegmentId) {
        if self.segments.contains_key(&label) {
            let balls = self.segment_balls(label);
            self.boxes.insert(label, fit_box(&balls));
        } else {
            self.boxes.remove(&label);
        }
    }

    /// Removes a node and marks every segment it touched as altered.
    fn remove_node(&mut self, id: NodeId) {
        let Some((node, neighbors)) = self.graph.remove(id) else {
            return;
        };
        if let Some(label) = node.segment {
            if let Some(seg) = self.segments.get_mut(&label) {
                seg.members.remove(&id);
            }
            self.altered.insert(label);
        }
        for n in neighbors {
            self.mark_node_segment(n);
        }
    }

    fn mark_node_segment(&mut self, id: NodeId) {
        if let Some(label) = self.graph.node(id).and_then(|n| n.segment) {
            self.altered.insert(label);
        }
    }
}
