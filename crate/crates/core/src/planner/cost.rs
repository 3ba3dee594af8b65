use crate::geometry::{intersection_radius, Vec3};

/// Weights of the length/risk criterion and the hard clearance bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerParams {
    /// Weight of the risk term.
    pub xi: f64,
    /// Clearance above which flying incurs no risk.
    pub d_max: f64,
    /// Minimal admissible clearance.
    pub r_min: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            xi: 7.0,
            d_max: 2.0,
            r_min: 0.8,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.xi >= 0.0) {
            return Err(format!("xi must be non-negative, got {}", self.xi));
        }
        if !(self.r_min > 0.0) {
            return Err(format!("r_min must be positive, got {}", self.r_min));
        }
        if !(self.d_max >= self.r_min) {
            return Err(format!("d_max {} must be at least r_min {}", self.d_max, self.r_min));
        }
        Ok(())
    }

    /// `(length increment, risk increment)` of the straight move between two
    /// points with clearances `r1` and `r2`.
    pub fn transition_cost(&self, p1: &Vec3, r1: f64, p2: &Vec3, r2: f64) -> (f64, f64) {
        let dl = (p1 - p2).norm();
        let shortfall = (self.d_max - (r1 + r2) / 2.0).max(0.0);
        (dl, self.xi * shortfall * shortfall * dl)
    }

    pub fn transition_total(&self, p1: &Vec3, r1: f64, p2: &Vec3, r2: f64) -> f64 {
        let (dl, dz) = self.transition_cost(p1, r1, p2, r2);
        dl + dz
    }

    /// Whether the straight move between two spheres keeps clear of
    /// obstacles by more than `r_min`.
    pub fn edge_traversable(&self, p1: &Vec3, r1: f64, p2: &Vec3, r2: f64) -> bool {
        edge_traversable(p1, r1, p2, r2, self.r_min)
    }
}

pub fn edge_traversable(p1: &Vec3, r1: f64, p2: &Vec3, r2: f64, r_min: f64) -> bool {
    intersection_radius(p1, r1, p2, r2) > r_min
}
