//! Compact summary of a sphere map: one yaw-rotated box per segment, the
//! segment adjacency and candidate exploration goals, with a fixed binary
//! encoding.

mod codec;
mod extract;
mod fit;

pub use codec::{decode, encode, encoded_len, LtvParseError};
pub use extract::{extract, misclassified_fraction, size_report, SizeReport, GOAL_CLUSTER_RADIUS};
pub use fit::{fit_box, OrientedBox};

/// One segment as a box. Geometry is stored in `f32`, the wire precision.
#[derive(Clone, Debug, PartialEq)]
pub struct LtvSegment {
    pub id: u32,
    pub center: [f32; 3],
    /// Rotation about z, in `[-pi/2, pi/2)`.
    pub yaw: f32,
    pub half_extents: [f32; 3],
    /// 0 for no nearby unexplored space, growing with frontier density.
    pub exploration: u8,
    /// Reserved; always 0.
    pub coverage: u8,
}

impl LtvSegment {
    pub fn as_box(&self) -> OrientedBox {
        OrientedBox {
            center: crate::Vec3::new(self.center[0] as f64, self.center[1] as f64, self.center[2] as f64),
            yaw: self.yaw as f64,
            half_extents: crate::Vec3::new(
                self.half_extents[0] as f64,
                self.half_extents[1] as f64,
                self.half_extents[2] as f64,
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LtvMap {
    pub segments: Vec<LtvSegment>,
    /// Adjacent segment id pairs, lower id first, sorted.
    pub edges: Vec<(u32, u32)>,
    pub goals: Vec<[f32; 3]>,
}
