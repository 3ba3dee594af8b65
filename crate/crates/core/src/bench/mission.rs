use crate::geometry::Vec3;
use crate::map::{BuildParams, ConfigError, IterationReport, SphereMap};
use crate::voxel::{OccupancyGrid, VoxelState};

/// Simulated sensor and motion for a mission.
#[derive(Clone, Debug, PartialEq)]
pub struct MissionParams {
    /// Maximal ray length, meters.
    pub sensor_range: f64,
    /// Angular spacing of the ray fan, degrees, both horizontally and in
    /// elevation.
    pub angular_step: f64,
    /// Elevation span of the fan, degrees from horizontal.
    pub elevation: (f64, f64),
    /// Distance flown between two update iterations, meters.
    pub step: f64,
}

impl Default for MissionParams {
    fn default() -> Self {
        Self {
            sensor_range: 20.0,
            angular_step: 0.5,
            elevation: (-45.0, 45.0),
            step: 2.0,
        }
    }
}

/// Copies the true state of every voxel seen by a ray fan from `p` into
/// `known`. Rays stop at the first occupied voxel. Returns the number of
/// voxels that changed state.
pub fn reveal(world: &OccupancyGrid, known: &mut OccupancyGrid, p: &Vec3, params: &MissionParams) -> usize {
    let step = params.angular_step.to_radians();
    let az_count = (std::f64::consts::TAU / step).round().max(1.0) as usize;
    let (lo, hi) = (params.elevation.0.to_radians(), params.elevation.1.to_radians());
    let el_count = ((hi - lo) / step).floor() as usize + 1;
    let origin = world.voxel_coords(p);
    let mut changed = 0;
    for ei in 0..el_count {
        let el = lo + ei as f64 * step;
        for ai in 0..az_count {
            let az = ai as f64 * step;
            let dir = Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
            let end = p + dir * params.sensor_range;
            let mut ray = world.traverse(p, &end);
            if ray.first() != Some(&origin) {
                ray.reverse();
            }
            for v in ray {
                if !world.in_bounds(v) {
                    break;
                }
                let v = [v[0] as usize, v[1] as usize, v[2] as usize];
                let s = world.get(v);
                if known.get(v) != s {
                    known.set(v, s);
                    changed += 1;
                }
                if s == VoxelState::Occupied {
                    break;
                }
            }
        }
    }
    changed
}

/// Points every `step` meters along the trace, including both ends.
pub fn sample_trace(trace: &[Vec3], step: f64) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = trace.first().copied().into_iter().collect();
    for w in trace.windows(2) {
        let len = (w[1] - w[0]).norm();
        let n = (len / step).ceil() as usize;
        for k in 1..=n {
            out.push(w[0] + (w[1] - w[0]) * (k as f64 / n as f64));
        }
    }
    out
}

/// End state of a mission.
#[derive(Clone, Debug)]
pub struct Mission {
    pub map: SphereMap,
    /// What the vehicle knows at the end.
    pub known: OccupancyGrid,
    pub reports: Vec<IterationReport>,
}

/// Flies the trace through an initially unknown copy of `world`, revealing
/// voxels and running one update iteration per step.
pub fn run_mission(
    world: &OccupancyGrid,
    trace: &[Vec3],
    build: BuildParams,
    params: &MissionParams,
) -> Result<Mission, ConfigError> {
    run_mission_with(world, trace, build, params, |_, _, _| {})
}

/// [`run_mission`] calling `checkpoint` after every iteration.
pub fn run_mission_with<F>(
    world: &OccupancyGrid,
    trace: &[Vec3],
    build: BuildParams,
    params: &MissionParams,
    mut checkpoint: F,
) -> Result<Mission, ConfigError>
where
    F: FnMut(&SphereMap, &OccupancyGrid, &IterationReport),
{
    if !(params.step > 0.0 && params.angular_step > 0.0 && params.sensor_range > 0.0) {
        return Err(ConfigError("mission step, angular step and range must be positive".into()));
    }
    let mut map = SphereMap::new(build)?;
    let mut known = OccupancyGrid::new(world.resolution(), world.origin(), world.dims(), VoxelState::Unknown)
        .expect("dims of a valid grid");
    let mut reports = Vec::new();
    for p in sample_trace(trace, params.step) {
        reveal(world, &mut known, &p, params);
        let r = map.update_iteration(&known, &p);
        checkpoint(&map, &known, &r);
        reports.push(r);
    }
    Ok(Mission { map, known, reports })
}
