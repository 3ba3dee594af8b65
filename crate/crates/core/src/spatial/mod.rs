//! Nearest-neighbor structures: the per-iteration obstacle k-D tree and the
//! dynamic index over sphere centers.

mod kdtree;
mod node_index;

pub use kdtree::ObstacleIndex;
pub use node_index::{NodeIndex, NotFound};
