//! `SMP1` snapshot format, little-endian throughout:
//!
//! ```text
//! magic "SMP1"
//! params   11 x f64, 3 x u32, 2 x u8, u64 seed
//! state    u32 next node id, u32 next segment label, u64 iteration
//! nodes    u32 n, n x (u32 id, 3 x f32 position, f32 radius, u32 segment)
//! edges    u32 n, n x (u32 low, u32 high)
//! segments u32 n, n x (u32 label, 4 x f64 bounding sphere,
//!                      u32 k, k x (u32 peer, u32 a, u32 b, f64 radius))
//! cache    u32 n, n x (u32 a, u32 b, u16 len, len x u32 node, f32 cost)
//! ```
//!
//! A segment lists only portals to peers with a higher label. Unassigned
//! nodes store segment `u32::MAX`. Every list is strictly increasing, so
//! each map has exactly one encoding.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{
    BuildParams, CachedPath, ConfigError, FrontierRegistry, NodeId, Portal, Segment, SegmentId, SphereGraph,
    SphereMap, SphereNode,
};
use crate::geometry::{Ball, Vec3};
use crate::voxel::Connectivity;

const MAGIC: &[u8; 4] = b"SMP1";
const UNASSIGNED: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq)]
pub enum SnapshotError {
    #[error("not a sphere map snapshot")]
    BadMagic,
    #[error("snapshot truncated at byte {0}")]
    Truncated(usize),
    #[error("{0} trailing bytes after snapshot")]
    TrailingBytes(usize),
    #[error("invalid snapshot: {0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f32(&mut self, v: f64) {
        self.0.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn len(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("count fits in u32"));
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        let end = self.at.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or(SnapshotError::Truncated(self.bytes.len()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, SnapshotError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, SnapshotError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }
    fn u32(&mut self) -> Result<u32, SnapshotError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, SnapshotError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f32(&mut self) -> Result<f64, SnapshotError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as f64)
    }
    fn f64(&mut self) -> Result<f64, SnapshotError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn vec3_f32(&mut self) -> Result<Vec3, SnapshotError> {
        Ok(Vec3::new(self.f32()?, self.f32()?, self.f32()?))
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SnapshotError> {
    Err(SnapshotError::Invalid(msg.into()))
}

impl SphereMap {
    pub fn save(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        let p = &self.params;
        for v in [
            p.r_min,
            p.cube_side,
            p.r_exp,
            p.r_merge,
            p.redundancy_coverage,
            p.radius_tolerance,
            p.max_radius,
            p.insertion_core,
            p.node_cell_size,
            p.xi,
            p.d_max,
        ] {
            w.f64(v);
        }
        w.u32(p.voxel_stride as u32);
        w.u32(p.ray_count as u32);
        w.u32(p.samples_per_ray as u32);
        w.u8(p.sample_voxels as u8);
        w.u8(match p.frontier_connectivity {
            Connectivity::Six => 0,
            Connectivity::TwentySix => 1,
        });
        w.u64(p.seed);

        w.u32(self.graph.next_id());
        w.u32(self.next_segment);
        w.u64(self.iteration);

        w.len(self.graph.len());
        for n in self.graph.nodes() {
            w.u32(n.id.0);
            for a in 0..3 {
                w.f32(n.position[a]);
            }
            w.f32(n.radius);
            w.u32(n.segment.map_or(UNASSIGNED, |s| s.0));
        }
        w.len(self.graph.edge_count());
        for (a, b) in self.graph.edges() {
            w.u32(a.0);
            w.u32(b.0);
        }
        w.len(self.segments.len());
        for (label, seg) in &self.segments {
            w.u32(label.0);
            for a in 0..3 {
                w.f64(seg.bounds.center[a]);
            }
            w.f64(seg.bounds.radius);
            let higher: Vec<&SegmentId> = seg.peers.iter().filter(|p| **p > *label).collect();
            w.len(higher.len());
            for peer in higher {
                let portal = &self.portals[&(*label, *peer)];
                w.u32(peer.0);
                w.u32(portal.a.0);
                w.u32(portal.b.0);
                w.f64(portal.radius);
            }
        }
        w.len(self.cache_len());
        for paths in self.cache.values() {
            for ((a, b), path) in paths {
                w.u32(a.0);
                w.u32(b.0);
                w.u16(u16::try_from(path.nodes.len()).expect("cached path fits in u16"));
                for n in &path.nodes {
                    w.u32(n.0);
                }
                w.f32(path.cost);
            }
        }
        w.0
    }

    pub fn load(bytes: &[u8]) -> Result<Self, SnapshotError> {
        let mut r = Reader { bytes, at: 0 };
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        r.take(4)?;
        let mut f = [0.0; 11];
        for v in &mut f {
            *v = r.f64()?;
        }
        let voxel_stride = r.u32()? as usize;
        let ray_count = r.u32()? as usize;
        let samples_per_ray = r.u32()? as usize;
        let sample_voxels = match r.u8()? {
            0 => false,
            1 => true,
            x => return invalid(format!("sample flag {x}")),
        };
        let frontier_connectivity = match r.u8()? {
            0 => Connectivity::Six,
            1 => Connectivity::TwentySix,
            x => return invalid(format!("connectivity code {x}")),
        };
        let seed = r.u64()?;
        let params = BuildParams {
            r_min: f[0],
            cube_side: f[1],
            r_exp: f[2],
            r_merge: f[3],
            redundancy_coverage: f[4],
            radius_tolerance: f[5],
            max_radius: f[6],
            insertion_core: f[7],
            node_cell_size: f[8],
            xi: f[9],
            d_max: f[10],
            voxel_stride,
            ray_count,
            samples_per_ray,
            sample_voxels,
            frontier_connectivity,
            seed,
        };
        let mut map = SphereMap::new(params)?;
        let next_node = r.u32()?;
        map.next_segment = r.u32()?;
        map.iteration = r.u64()?;

        let mut graph = SphereGraph::new(map.params.r_min, map.params.node_cell_size);
        let mut labels_of_nodes = BTreeMap::new();
        let n = r.u32()?;
        let mut prev = None;
        for _ in 0..n {
            let id = r.u32()?;
            if prev.is_some_and(|p| id <= p) || id >= next_node {
                return invalid(format!("node id {id} out of order or range"));
            }
            prev = Some(id);
            let position = r.vec3_f32()?;
            let radius = r.f32()?;
            if !(radius > 0.0) || !position.iter().all(|c| c.is_finite()) {
                return invalid(format!("node {id} has bad geometry"));
            }
            let seg = r.u32()?;
            let segment = (seg != UNASSIGNED).then_some(SegmentId(seg));
            if let Some(s) = segment {
                labels_of_nodes.entry(s).or_insert_with(BTreeSet::new).insert(NodeId(id));
            }
            graph.insert_raw(SphereNode {
                id: NodeId(id),
                position,
                radius,
                segment,
            });
        }
        graph.reserve_ids(next_node);
        let n = r.u32()?;
        let mut prev = None;
        for _ in 0..n {
            let (a, b) = (r.u32()?, r.u32()?);
            if a >= b || prev.is_some_and(|p| (a, b) <= p) {
                return invalid(format!("edge ({a}, {b}) out of order"));
            }
            prev = Some((a, b));
            if !graph.add_edge_raw(NodeId(a), NodeId(b)) {
                return invalid(format!("edge ({a}, {b}) references missing nodes"));
            }
        }

        let n = r.u32()?;
        let mut prev = None;
        let mut pending_portals = Vec::new();
        for _ in 0..n {
            let label = SegmentId(r.u32()?);
            if prev.is_some_and(|p| label <= p) || label.0 >= map.next_segment {
                return invalid(format!("segment {label} out of order or range"));
            }
            prev = Some(label);
            let center = Vec3::new(r.f64()?, r.f64()?, r.f64()?);
            let radius = r.f64()?;
            let members = labels_of_nodes.remove(&label).unwrap_or_default();
            if members.is_empty() {
                return invalid(format!("segment {label} has no members"));
            }
            map.segments.insert(
                label,
                Segment {
                    label,
                    members,
                    bounds: Ball::new(center, radius),
                    peers: BTreeSet::new(),
                },
            );
            let k = r.u32()?;
            let mut prev_peer = None;
            for _ in 0..k {
                let peer = SegmentId(r.u32()?);
                if peer <= label || prev_peer.is_some_and(|p| peer <= p) {
                    return invalid(format!("portal {label}-{peer} out of order"));
                }
                prev_peer = Some(peer);
                let portal = Portal {
                    a: NodeId(r.u32()?),
                    b: NodeId(r.u32()?),
                    radius: r.f64()?,
                };
                pending_portals.push((label, peer, portal));
            }
        }
        if let Some((label, _)) = labels_of_nodes.first_key_value() {
            return invalid(format!("nodes reference missing segment {label}"));
        }
        for (label, peer, portal) in pending_portals {
            let in_seg = |id: NodeId, s: SegmentId| graph.node(id).is_some_and(|n| n.segment == Some(s));
            if !map.segments.contains_key(&peer)
                || !in_seg(portal.a, label)
                || !in_seg(portal.b, peer)
                || !graph.has_edge(portal.a, portal.b)
            {
                return invalid(format!("portal {label}-{peer} is inconsistent"));
            }
            map.portals.insert((label, peer), portal);
            map.segments.get_mut(&label).expect("checked").peers.insert(peer);
            map.segments.get_mut(&peer).expect("checked").peers.insert(label);
        }

        let n = r.u32()?;
        let mut prev: Option<(SegmentId, NodeId, NodeId)> = None;
        for _ in 0..n {
            let (a, b) = (NodeId(r.u32()?), NodeId(r.u32()?));
            let len = r.u16()? as usize;
            let mut nodes = Vec::with_capacity(len);
            for _ in 0..len {
                nodes.push(NodeId(r.u32()?));
            }
            let cost = r.f32()?;
            let Some(label) = graph.node(a).and_then(|n| n.segment) else {
                return invalid(format!("cache endpoint {a} is not segmented"));
            };
            let key = (label, a, b);
            if a >= b || prev.is_some_and(|p| key <= p) {
                return invalid(format!("cache entry {a}-{b} out of order"));
            }
            prev = Some(key);
            let path_ok = nodes.first() == Some(&a)
                && nodes.last() == Some(&b)
                && nodes.iter().all(|id| graph.node(*id).is_some_and(|n| n.segment == Some(label)))
                && nodes.windows(2).all(|w| graph.has_edge(w[0], w[1]));
            if !path_ok {
                return invalid(format!("cached path {a}-{b} is not a path in its segment"));
            }
            map.cache.entry(label).or_default().insert((a, b), CachedPath { nodes, cost });
        }
        if r.at != bytes.len() {
            return Err(SnapshotError::TrailingBytes(bytes.len() - r.at));
        }
        map.graph = graph;
        map.frontiers = FrontierRegistry::default();
        let labels: Vec<SegmentId> = map.segments.keys().copied().collect();
        for l in labels {
            map.refit_box(l);
        }
        Ok(map)
    }
}
