use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::mission::{run_mission_with, Mission, MissionParams};
use crate::geometry::Vec3;
use crate::ltv::{extract, misclassified_fraction, size_report};
use crate::map::{BuildParams, ConfigError, IterationReport, SphereMap};
use crate::planner::{
    astar_sphere_graph, evaluate_path, grid_astar, plan_cached, rrt_star, ClearanceField, GridCost, PlanError, PlanMode,
    PlanResult, PlannerParams, RrtParams,
};
use crate::spatial::ObstacleIndex;
use crate::voxel::{OccupancyGrid, UpdateCube};

/// Stated in every benchmark report.
pub const TIMING_NOTE: &str = "planning times exclude obstacle-index and clearance-field precomputation for grid \
baselines and map build time for sphere planners";

/// Every planner mode, in report order.
pub const ALL_MODES: [PlanMode; 5] =
    [PlanMode::Grid, PlanMode::GridLength, PlanMode::RrtStar, PlanMode::FullGraph, PlanMode::Cached];

/// Exact nearest-obstacle index over every occupied voxel of `grid`.
pub fn world_index(grid: &OccupancyGrid) -> ObstacleIndex {
    let side = grid.extent().max() + 2.0 * grid.resolution();
    let cube = UpdateCube::new(grid.origin() + grid.extent() / 2.0, side);
    ObstacleIndex::build(&grid.surface_obstacle_points(&cube), &[])
}

/// Smallest distance between the polyline and any indexed point, capped at
/// `cap`. Segments are checked exactly against every point that could be
/// closer than the cap.
pub fn path_clearance(path: &[Vec3], index: &ObstacleIndex, cap: f64) -> f64 {
    let mut best = cap;
    if path.len() == 1 {
        return index.nearest_distance(&path[0]).min(cap);
    }
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let ab = b - a;
        let len2 = ab.norm_squared();
        let mid = (a + b) / 2.0;
        for q in index.within_radius(&mid, len2.sqrt() / 2.0 + best) {
            let t = if len2 > 0.0 { ((q - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
            best = best.min((q - (a + ab * t)).norm());
        }
    }
    best
}

/// A world with everything the planners need precomputed.
#[derive(Clone, Debug)]
pub struct PlanningSetup {
    pub world: OccupancyGrid,
    pub map: SphereMap,
    /// All obstacles of the world; used for evaluation and validation.
    pub index: ObstacleIndex,
    /// Planning grid of the grid baselines and RRT*.
    pub grid: OccupancyGrid,
    pub field: ClearanceField,
    pub params: PlannerParams,
    pub build_time: Duration,
    pub build_iterations: usize,
}

impl PlanningSetup {
    /// Builds the sphere map over the known world and a baseline grid
    /// downsampled by `grid_factor`.
    pub fn new(world: OccupancyGrid, build: BuildParams, grid_factor: usize) -> Result<Self, ConfigError> {
        if grid_factor == 0 {
            return Err(ConfigError("grid factor must be at least 1".into()));
        }
        let params = build.planner_params();
        let mut map = SphereMap::new(build)?;
        let t = Instant::now();
        let reports = map.build_known(&world);
        let build_time = t.elapsed();
        Ok(Self::assemble(world, map, params, grid_factor, build_time, reports.len()))
    }

    /// Wraps an already built map.
    pub fn from_map(world: OccupancyGrid, map: SphereMap, grid_factor: usize) -> Self {
        let params = map.params().planner_params();
        Self::assemble(world, map, params, grid_factor.max(1), Duration::ZERO, 0)
    }

    fn assemble(
        world: OccupancyGrid,
        map: SphereMap,
        params: PlannerParams,
        grid_factor: usize,
        build_time: Duration,
        build_iterations: usize,
    ) -> Self {
        let index = world_index(&world);
        let grid = world.downsample(grid_factor);
        let field = ClearanceField::compute(&grid, index.clone());
        Self { world, map, index, grid, field, params, build_time, build_iterations }
    }

    /// Plans with one mode. Sphere planners get true endpoint clearances so
    /// that the recorded metrics agree with [`evaluate_path`].
    pub fn plan(&self, mode: PlanMode, start: &Vec3, goal: &Vec3, options: &ScenarioOptions) -> Result<PlanResult, PlanError> {
        let p = &self.params;
        match mode {
            PlanMode::Cached => plan_cached(&self.map, start, goal, p).map(|r| r.with_endpoint_clearances(&self.index, p)),
            PlanMode::FullGraph => {
                astar_sphere_graph(self.map.graph(), start, goal, p, None).map(|r| r.with_endpoint_clearances(&self.index, p))
            }
            PlanMode::Grid => grid_astar(&self.grid, &self.field, start, goal, p, GridCost::Safety, options.grid_budget),
            PlanMode::GridLength => grid_astar(&self.grid, &self.field, start, goal, p, GridCost::Length, options.grid_budget),
            PlanMode::RrtStar => rrt_star(&self.grid, &self.field, start, goal, p, &options.rrt),
        }
    }

    /// Exact clearance of a path against the world, capped at `d_max`.
    pub fn clearance(&self, result: &PlanResult) -> f64 {
        path_clearance(&result.positions(), &self.index, self.params.d_max.max(self.params.r_min) + 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioOptions {
    pub modes: Vec<PlanMode>,
    pub rrt: RrtParams,
    /// Expansion limit of the grid baselines.
    pub grid_budget: usize,
    pub seed: u64,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self { modes: ALL_MODES.to_vec(), rrt: RrtParams::default(), grid_budget: 50_000_000, seed: 0 }
    }
}

/// Minimal distance between two endpoints taken from the same segment.
pub const ENDPOINT_SEPARATION: f64 = 5.0;

/// Endpoints at the centers of large spheres of distinct segments, in a
/// seeded random order. Spheres smaller than `min_radius` are skipped so the
/// endpoints are also valid for the grid baselines.
///
/// When there are fewer such segments than `count`, the list is topped up
/// with other large spheres at least [`ENDPOINT_SEPARATION`] away from every
/// pick, largest first.
pub fn pick_endpoints(map: &SphereMap, count: usize, min_radius: f64, seed: u64) -> Vec<Vec3> {
    let graph = map.graph();
    let by_size = |a: &&crate::map::SphereNode, b: &&crate::map::SphereNode| {
        a.radius.total_cmp(&b.radius).then(b.id.cmp(&a.id))
    };
    let mut picks: Vec<Vec3> = map
        .segments()
        .values()
        .filter_map(|s| {
            s.members
                .iter()
                .map(|id| graph.get(*id))
                .filter(|n| n.radius >= min_radius)
                .max_by(by_size)
                .map(|n| n.position)
        })
        .collect();
    picks.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    picks.truncate(count);
    if picks.len() < count {
        let mut rest: Vec<_> = graph.nodes().filter(|n| n.radius >= min_radius).collect();
        rest.sort_by(|a, b| by_size(b, a));
        for n in rest {
            if picks.len() == count {
                break;
            }
            if picks.iter().all(|p| (p - n.position).norm() >= ENDPOINT_SEPARATION) {
                picks.push(n.position);
            }
        }
    }
    picks
}

/// One planner run.
#[derive(Clone, Debug, PartialEq)]
pub struct GoalRun {
    pub mode: PlanMode,
    pub goal: usize,
    pub result: Result<PlanResult, PlanError>,
    /// Exact path clearance, for found paths.
    pub clearance: Option<f64>,
}

/// One line of the multi-goal comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeSummary {
    pub mode: String,
    pub goals: usize,
    pub found: usize,
    pub total_time_ms: f64,
    pub mean_length: f64,
    pub mean_risk: f64,
    pub mean_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiGoalOutcome {
    pub runs: Vec<GoalRun>,
    pub summary: Vec<ModeSummary>,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Plans from `start` to every goal with every mode. Failures are counted,
/// not fatal. Mean metrics are re-evaluated against the world obstacles.
pub fn scenario_multi_goal(setup: &PlanningSetup, start: &Vec3, goals: &[Vec3], options: &ScenarioOptions) -> MultiGoalOutcome {
    let mut runs = Vec::new();
    let mut summary = Vec::new();
    for &mode in &options.modes {
        let mut found = 0;
        let mut time = Duration::ZERO;
        let (mut l, mut z, mut j) = (0.0, 0.0, 0.0);
        for (gi, goal) in goals.iter().enumerate() {
            let result = setup.plan(mode, start, goal, options);
            let clearance = result.as_ref().ok().map(|r| setup.clearance(r));
            if let Ok(r) = &result {
                found += 1;
                time += r.time;
                let m = evaluate_path(&r.positions(), &setup.index, &setup.params);
                l += m.length;
                z += m.risk;
                j += m.cost;
            }
            runs.push(GoalRun { mode, goal: gi, result, clearance });
        }
        let n = found.max(1) as f64;
        summary.push(ModeSummary {
            mode: mode.as_str().to_string(),
            goals: goals.len(),
            found,
            total_time_ms: ms(time),
            mean_length: if found > 0 { l / n } else { f64::NAN },
            mean_risk: if found > 0 { z / n } else { f64::NAN },
            mean_cost: if found > 0 { j / n } else { f64::NAN },
        });
    }
    MultiGoalOutcome { runs, summary }
}

/// One line of the single-goal comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleGoalRow {
    pub mode: String,
    pub found: bool,
    pub time_ms: f64,
    pub length: f64,
    pub risk: f64,
    pub cost: f64,
    pub min_clearance: f64,
    pub waypoints: usize,
}

pub fn scenario_single_goal(
    setup: &PlanningSetup,
    start: &Vec3,
    goal: &Vec3,
    options: &ScenarioOptions,
) -> Vec<(SingleGoalRow, Result<PlanResult, PlanError>)> {
    options
        .modes
        .iter()
        .map(|&mode| {
            let result = setup.plan(mode, start, goal, options);
            let row = match &result {
                Ok(r) => SingleGoalRow {
                    mode: mode.as_str().to_string(),
                    found: true,
                    time_ms: ms(r.time),
                    length: r.length,
                    risk: r.risk,
                    cost: r.cost,
                    min_clearance: setup.clearance(r),
                    waypoints: r.waypoints.len(),
                },
                Err(_) => SingleGoalRow {
                    mode: mode.as_str().to_string(),
                    found: false,
                    time_ms: f64::NAN,
                    length: f64::NAN,
                    risk: f64::NAN,
                    cost: f64::NAN,
                    min_clearance: f64::NAN,
                    waypoints: 0,
                },
            };
            (row, result)
        })
        .collect()
}

/// One sample of the map-size time series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompressionRow {
    pub iteration: u64,
    pub segments: usize,
    pub ltv_bytes: usize,
    pub coarse_bytes: usize,
    pub full_bytes: usize,
    /// Fraction of box volume that is not free space.
    pub misclassified: f64,
}

fn compression_row(map: &SphereMap, known: &OccupancyGrid, iteration: u64) -> CompressionRow {
    let ltv = extract(map);
    let sizes = size_report(&ltv, known);
    CompressionRow {
        iteration,
        segments: ltv.segments.len(),
        ltv_bytes: sizes.ltv_bytes,
        coarse_bytes: sizes.coarse_bytes,
        full_bytes: sizes.full_bytes,
        misclassified: misclassified_fraction(&ltv, known),
    }
}

/// Runs a mission and samples map sizes every `every` iterations and at the
/// end.
pub fn scenario_compression(
    world: &OccupancyGrid,
    trace: &[Vec3],
    build: BuildParams,
    mission: &MissionParams,
    every: usize,
) -> Result<(Vec<CompressionRow>, Mission), ConfigError> {
    let every = every.max(1);
    let mut rows = Vec::new();
    let m = run_mission_with(world, trace, build, mission, |map, known, r| {
        if (r.iteration as usize) % every == 0 {
            rows.push(compression_row(map, known, r.iteration));
        }
    })?;
    if let Some(last) = m.reports.last() {
        if rows.last().map(|r| r.iteration) != Some(last.iteration) {
            rows.push(compression_row(&m.map, &m.known, last.iteration));
        }
    }
    Ok((rows, m))
}

/// Per-iteration timing of a mission.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuntimeRow {
    pub iteration: u64,
    pub nodes: usize,
    pub segments: usize,
    pub obstacle_points: usize,
    pub candidates: usize,
    pub extraction_ms: f64,
    pub index_ms: f64,
    pub prune_ms: f64,
    pub expand_ms: f64,
    pub segmentation_ms: f64,
    pub total_ms: f64,
}

pub fn runtime_rows(reports: &[IterationReport]) -> Vec<RuntimeRow> {
    reports
        .iter()
        .map(|r| RuntimeRow {
            iteration: r.iteration,
            nodes: r.nodes,
            segments: r.segments,
            obstacle_points: r.obstacle_points,
            candidates: r.candidates,
            extraction_ms: ms(r.timings.extraction),
            index_ms: ms(r.timings.index_build),
            prune_ms: ms(r.timings.prune),
            expand_ms: ms(r.timings.expand),
            segmentation_ms: ms(r.timings.segmentation),
            total_ms: ms(r.timings.total),
        })
        .collect()
}

/// Writes rows as CSV: a `#` note line, a header row, then the rows.
pub fn write_csv<W: std::io::Write, T: Serialize>(out: W, note: &str, rows: &[T]) -> Result<(), csv::Error> {
    let mut out = out;
    writeln!(out, "# {note}")?;
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
