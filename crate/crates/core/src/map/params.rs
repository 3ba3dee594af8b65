use thiserror::Error;

use crate::planner::PlannerParams;
use crate::voxel::Connectivity;

#[derive(Debug, Error, PartialEq)]
#[error("invalid build parameters: {0}")]
pub struct ConfigError(pub String);

/// Inputs of one map update iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildParams {
    /// Minimal sphere radius and edge intersection radius.
    pub r_min: f64,
    /// Side of the update cube centered on the vehicle.
    pub cube_side: f64,
    /// Bounding-sphere limit while flood-filling a segment.
    pub r_exp: f64,
    /// Bounding-sphere limit for merging two segments.
    pub r_merge: f64,
    /// Fraction of a sphere's volume a larger sphere must cover for the
    /// smaller one to count as redundant.
    pub redundancy_coverage: f64,
    /// Sample free-voxel centroids as expansion candidates.
    pub sample_voxels: bool,
    /// Lattice stride of the voxel sampling; the lattice offset rotates
    /// every iteration so all voxels are eventually visited.
    pub voxel_stride: usize,
    pub ray_count: usize,
    pub samples_per_ray: usize,
    /// Radii closer than this to the stored value are not updated.
    pub radius_tolerance: f64,
    /// Sphere radii are capped here; obstacles are gathered this far
    /// outside the cube so capped radii never exceed the true clearance.
    pub max_radius: f64,
    /// A candidate whose center lies within this fraction of an existing
    /// sphere's radius from that sphere's center is not inserted.
    pub insertion_core: f64,
    /// Bucket size of the node spatial hash.
    pub node_cell_size: f64,
    pub frontier_connectivity: Connectivity,
    /// Risk weight used for intra-segment paths.
    pub xi: f64,
    /// Risk cutoff distance used for intra-segment paths.
    pub d_max: f64,
    pub seed: u64,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            r_min: 0.8,
            cube_side: 60.0,
            r_exp: 5.0,
            r_merge: 20.0,
            redundancy_coverage: 0.9,
            sample_voxels: true,
            voxel_stride: 2,
            ray_count: 64,
            samples_per_ray: 8,
            radius_tolerance: 1e-6,
            max_radius: 8.0,
            insertion_core: 0.5,
            node_cell_size: 5.0,
            frontier_connectivity: Connectivity::Six,
            xi: 7.0,
            d_max: 2.0,
            seed: 0,
        }
    }
}

impl BuildParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        if !(self.r_min > 0.0) {
            return fail(format!("r_min must be positive, got {}", self.r_min));
        }
        if !(self.cube_side > 0.0) {
            return fail(format!("cube_side must be positive, got {}", self.cube_side));
        }
        if !(self.r_exp > 0.0 && self.r_exp < self.r_merge) {
            return fail(format!(
                "need 0 < r_exp < r_merge, got r_exp={} r_merge={}",
                self.r_exp, self.r_merge
            ));
        }
        if !(self.redundancy_coverage > 0.0 && self.redundancy_coverage <= 1.0) {
            return fail(format!(
                "redundancy_coverage must be in (0, 1], got {}",
                self.redundancy_coverage
            ));
        }
        if self.voxel_stride == 0 {
            return fail("voxel_stride must be at least 1".into());
        }
        if !(self.max_radius >= self.r_min) {
            return fail(format!("max_radius {} below r_min {}", self.max_radius, self.r_min));
        }
        if !(0.0..1.0).contains(&self.insertion_core) {
            return fail(format!("insertion_core must be in [0, 1), got {}", self.insertion_core));
        }
        if !(self.node_cell_size > 0.0) {
            return fail("node_cell_size must be positive".into());
        }
        if !(self.radius_tolerance >= 0.0) {
            return fail("radius_tolerance must be non-negative".into());
        }
        self.planner_params().validate().map_err(ConfigError)
    }

    /// Cost parameters used for cached intra-segment paths.
    pub fn planner_params(&self) -> PlannerParams {
        PlannerParams {
            xi: self.xi,
            d_max: self.d_max,
            r_min: self.r_min,
        }
    }
}
