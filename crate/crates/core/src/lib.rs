//! Incremental free-space mapping with a graph of obstacle-free spheres.
//!
//! The crate is organised bottom-up:
//!
//! * [`voxel`] holds the occupancy grid, frontier extraction, ray casting and
//!   the `VXG1` file format.
//! * [`spatial`] provides the per-iteration obstacle k-D tree and a dynamic
//!   index over sphere centers.
//! * [`map`] maintains the [`map::SphereMap`]: spheres, segments, portals and
//!   cached intra-segment paths, updated one local cube at a time.
//! * [`planner`] plans over the sphere graph (directly or through portals)
//!   and implements grid A* and RRT* baselines.
//! * [`ltv`] extracts and encodes the compact box-graph summary.
//! * [`bench`] generates worlds, flies missions and runs the comparisons.
//!
//! ```
//! use spheremap::bench::{generate_world, WorldKind, WorldSpec};
//! use spheremap::map::{BuildParams, SphereMap};
//!
//! let world = generate_world(&WorldSpec::small(WorldKind::RoomGrid, 7)).unwrap();
//! let mut map = SphereMap::new(BuildParams::default()).unwrap();
//! map.build_known(&world.grid);
//! assert!(map.graph().len() > 0);
//! ```

pub mod bench;
pub mod cli;
pub mod geometry;
pub mod ltv;
pub mod map;
pub mod planner;
pub mod spatial;
pub mod voxel;

pub use geometry::Vec3;
