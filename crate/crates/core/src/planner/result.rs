use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use super::cost::PlannerParams;
use crate::geometry::Vec3;
use crate::spatial::ObstacleIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlanMode {
    Cached,
    FullGraph,
    Grid,
    GridLength,
    RrtStar,
}

impl PlanMode {
    pub const ALL: [PlanMode; 5] = [
        PlanMode::Grid,
        PlanMode::GridLength,
        PlanMode::RrtStar,
        PlanMode::FullGraph,
        PlanMode::Cached,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PlanMode::Cached => "cached",
            PlanMode::FullGraph => "full",
            PlanMode::Grid => "grid",
            PlanMode::GridLength => "grid-length",
            PlanMode::RrtStar => "rrt",
        }
    }
}

impl fmt::Display for PlanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlanMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cached" => Ok(PlanMode::Cached),
            "full" => Ok(PlanMode::FullGraph),
            "grid" => Ok(PlanMode::Grid),
            "grid-length" => Ok(PlanMode::GridLength),
            "rrt" | "rrt-star" => Ok(PlanMode::RrtStar),
            other => Err(format!("unknown planner mode '{other}'")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no path between start and goal")]
    NoPath,
    #[error("{0} is not covered by any traversable sphere")]
    Uncovered(&'static str),
    #[error("{0} is not in free space with enough clearance")]
    InvalidEndpoint(&'static str),
    #[error("node expansion budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("no solution within {0:?}")]
    Timeout(Duration),
}

/// A path point and the clearance the planner assumed there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waypoint {
    pub position: Vec3,
    pub clearance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanResult {
    pub waypoints: Vec<Waypoint>,
    pub length: f64,
    pub risk: f64,
    pub cost: f64,
    pub mode: PlanMode,
    pub time: Duration,
}

impl PlanResult {
    /// Builds a result whose length and risk come from the recorded
    /// per-waypoint clearances.
    pub fn from_waypoints(
        mut waypoints: Vec<Waypoint>,
        params: &PlannerParams,
        mode: PlanMode,
        time: Duration,
    ) -> Self {
        waypoints.dedup_by(|b, a| a.position == b.position);
        let m = evaluate_recorded(&waypoints, params);
        Self {
            waypoints,
            length: m.length,
            risk: m.risk,
            cost: m.cost,
            mode,
            time,
        }
    }

    /// Replaces the clearances of the first and last waypoint by values
    /// from `source` and recomputes the metrics. Sphere planners only know a
    /// lower bound at the endpoints; after this call the recorded metrics
    /// agree with [`evaluate_path`] against the same source.
    pub fn with_endpoint_clearances<S: ClearanceSource + ?Sized>(mut self, source: &S, params: &PlannerParams) -> Self {
        let n = self.waypoints.len();
        for i in [0, n.saturating_sub(1)] {
            if let Some(w) = self.waypoints.get_mut(i) {
                w.clearance = source.clearance(&w.position);
            }
        }
        let m = evaluate_recorded(&self.waypoints, params);
        self.length = m.length;
        self.risk = m.risk;
        self.cost = m.cost;
        self
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.waypoints.iter().map(|w| w.position).collect()
    }

    pub fn min_recorded_clearance(&self) -> f64 {
        self.waypoints
            .iter()
            .map(|w| w.clearance)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Anything that answers "how far is the nearest obstacle from here".
pub trait ClearanceSource {
    fn clearance(&self, p: &Vec3) -> f64;
}

impl ClearanceSource for ObstacleIndex {
    fn clearance(&self, p: &Vec3) -> f64 {
        self.nearest_distance(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathMetrics {
    pub length: f64,
    pub risk: f64,
    pub cost: f64,
    pub min_clearance: f64,
}

fn accumulate<I: Iterator<Item = (Vec3, f64)>>(mut points: I, params: &PlannerParams) -> PathMetrics {
    let Some((mut prev, mut prev_r)) = points.next() else {
        return PathMetrics {
            length: 0.0,
            risk: 0.0,
            cost: 0.0,
            min_clearance: f64::INFINITY,
        };
    };
    let mut length = 0.0;
    let mut risk = 0.0;
    let mut min_clearance = prev_r;
    for (p, r) in points {
        let (dl, dz) = params.transition_cost(&prev, prev_r, &p, r);
        length += dl;
        risk += dz;
        min_clearance = min_clearance.min(r);
        prev = p;
        prev_r = r;
    }
    PathMetrics {
        length,
        risk,
        cost: length + risk,
        min_clearance,
    }
}

/// Length, risk and cost of a waypoint sequence, with clearances queried
/// from `source`.
pub fn evaluate_path<S: ClearanceSource + ?Sized>(
    waypoints: &[Vec3],
    source: &S,
    params: &PlannerParams,
) -> PathMetrics {
    accumulate(waypoints.iter().map(|p| (*p, source.clearance(p))), params)
}

/// Same as [`evaluate_path`] using the clearances stored with the waypoints.
pub fn evaluate_recorded(waypoints: &[Waypoint], params: &PlannerParams) -> PathMetrics {
    accumulate(waypoints.iter().map(|w| (w.position, w.clearance)), params)
}

/// Minimum clearance along the polyline, sampled every `spacing` meters.
pub fn sampled_min_clearance<S: ClearanceSource + ?Sized>(waypoints: &[Vec3], source: &S, spacing: f64) -> f64 {
    let mut min = waypoints
        .first()
        .map_or(f64::INFINITY, |p| source.clearance(p));
    for pair in waypoints.windows(2) {
        let len = (pair[1] - pair[0]).norm();
        let steps = (len / spacing).ceil().max(1.0) as usize;
        for s in 1..=steps {
            let p = pair[0] + (pair[1] - pair[0]) * (s as f64 / steps as f64);
            min = min.min(source.clearance(&p));
        }
    }
    min
}

impl fmt::Display for PlanResult {
    /// Line-oriented record: `mode time L Z J x,y,z;x,y,z;...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:.6} {} {} {} ",
            self.mode,
            self.time.as_secs_f64(),
            self.length,
            self.risk,
            self.cost
        )?;
        let pts: Vec<String> = self
            .waypoints
            .iter()
            .map(|w| format!("{},{},{}", w.position.x, w.position.y, w.position.z))
            .collect();
        f.write_str(&pts.join(";"))
    }
}

/// Parsed form of a [`PlanResult`] text record.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanRecord {
    pub mode: PlanMode,
    pub time_s: f64,
    pub length: f64,
    pub risk: f64,
    pub cost: f64,
    pub waypoints: Vec<Vec3>,
}

impl FromStr for PlanRecord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(format!("expected 6 fields, got {}", fields.len()));
        }
        let num = |x: &str| x.parse::<f64>().map_err(|e| format!("{x}: {e}"));
        let waypoints = fields[5]
            .split(';')
            .map(|p| {
                let c: Vec<f64> = p.split(',').map(num).collect::<Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(format!("bad waypoint '{p}'"));
                }
                Ok(Vec3::new(c[0], c[1], c[2]))
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(PlanRecord {
            mode: fields[0].parse()?,
            time_s: num(fields[1])?,
            length: num(fields[2])?,
            risk: num(fields[3])?,
            cost: num(fields[4])?,
            waypoints,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_waypoint_has_zero_cost() {
        let idx = ObstacleIndex::build(&[Vec3::new(3.0, 0.0, 0.0)], &[]);
        let m = evaluate_path(&[Vec3::zeros()], &idx, &PlannerParams::default());
        assert_eq!((m.length, m.risk, m.cost, m.min_clearance), (0.0, 0.0, 0.0, 3.0));
    }

    #[test]
    fn clear_pair_costs_its_length() {
        let idx = ObstacleIndex::build(&[Vec3::new(0.0, 10.0, 0.0)], &[]);
        let a = Vec3::zeros();
        let b = Vec3::new(3.0, 0.0, 0.0);
        let m = evaluate_path(&[a, b], &idx, &PlannerParams::default());
        assert_eq!(m.length, 3.0);
        assert_eq!(m.risk, 0.0);
        assert_eq!(m.cost, 3.0);
        assert_eq!(m.min_clearance, 10.0);
    }

    #[test]
    fn record_round_trip() {
        let params = PlannerParams::default();
        let r = PlanResult::from_waypoints(
            vec![
                Waypoint { position: Vec3::new(0.0, 0.5, 1.0), clearance: 1.5 },
                Waypoint { position: Vec3::new(2.25, 0.5, 1.0), clearance: 1.0 },
            ],
            &params,
            PlanMode::FullGraph,
            Duration::from_micros(1500),
        );
        let rec: PlanRecord = r.to_string().parse().unwrap();
        assert_eq!(rec.mode, PlanMode::FullGraph);
        assert_eq!(rec.length, r.length);
        assert_eq!(rec.risk, r.risk);
        assert_eq!(rec.cost, r.cost);
        assert_eq!(rec.waypoints, r.positions());
    }
}
