//! Command line front end: `gen`, `build`, `plan`, `export-ltv` and `bench`.
//!
//! Exit codes: 0 on success, 1 when no path exists, 2 on configuration,
//! parse or I/O errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{
    generate_world, pick_endpoints, run_mission, runtime_rows, scenario_compression, scenario_multi_goal,
    scenario_single_goal, write_csv, MissionParams, PlanningSetup, ScenarioOptions, WorldKind, WorldSpec, TIMING_NOTE,
};
use crate::geometry::Vec3;
use crate::ltv::{encode, extract};
use crate::map::{BuildParams, SphereMap};
use crate::planner::{PlanError, PlanMode, RrtParams};
use crate::voxel::{Connectivity, OccupancyGrid};

#[derive(Debug, Parser)]
#[command(name = "spheremap", about = "Sphere-graph free-space maps, planners and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options every subcommand accepts.
#[derive(Debug, clap::Args)]
struct Common {
    /// Seed for world generation, sampling and RRT*.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `key=value` parameter file; `#` starts a comment.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic world (VXG1) and its flight trace.
    Gen {
        #[arg(long)]
        kind: Option<String>,
        /// Horizontal extent in meters.
        #[arg(long)]
        size: Option<f64>,
        #[arg(long)]
        resolution: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a sphere map (SMAP) from a world, by mission or sweep.
    Build {
        #[arg(long)]
        world: PathBuf,
        /// Trace file (`x,y,z` per line). Defaults to `<world>.trace`.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Treat the world as fully known and sweep it instead of flying.
        #[arg(long)]
        known: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Plan one path.
    Plan {
        #[arg(long)]
        map: PathBuf,
        /// World grid; required by grid and RRT* modes.
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long, value_parser = parse_point)]
        from: Vec3,
        #[arg(long, value_parser = parse_point)]
        to: Vec3,
        #[arg(long, default_value = "cached")]
        mode: String,
        #[command(flatten)]
        common: Common,
    },
    /// Extract the LTV map of a sphere map and write it as LTVM.
    ExportLtv {
        #[arg(long)]
        map: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a benchmark scenario and write CSV.
    Bench {
        #[arg(value_enum)]
        scenario: Scenario,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        size: Option<f64>,
        #[arg(long)]
        resolution: Option<f64>,
        /// Restrict to these modes (comma separated).
        #[arg(long, value_delimiter = ',')]
        modes: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Scenario {
    MultiGoal,
    SingleGoal,
    Compression,
    Runtime,
}

fn parse_point(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(format!("expected x,y,z, got '{s}'")),
    }
}

#[derive(Debug)]
enum Failure {
    NoPath(PlanError),
    Config(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Everything tunable from a params file.
#[derive(Clone, Debug)]
struct Settings {
    build: BuildParams,
    mission: MissionParams,
    rrt: RrtParams,
    world: WorldSpec,
    grid_budget: usize,
    grid_factor: usize,
    goals: usize,
    sample_every: usize,
    min_goal_radius: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            build: BuildParams::default(),
            mission: MissionParams::default(),
            rrt: RrtParams::default(),
            world: WorldSpec::new(WorldKind::PerforatedCave, 60.0, 0.2, 0),
            grid_budget: 50_000_000,
            grid_factor: 2,
            goals: 10,
            sample_every: 10,
            min_goal_radius: 1.5,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| Failure::Config(format!("{key}: {e}")))
}

impl Settings {
    fn set(&mut self, key: &str, v: &str) -> Outcome {
        let b = &mut self.build;
        match key {
            "r_min" => b.r_min = num(key, v)?,
            "cube_side" => b.cube_side = num(key, v)?,
            "r_exp" => b.r_exp = num(key, v)?,
            "r_merge" => b.r_merge = num(key, v)?,
            "redundancy_coverage" => b.redundancy_coverage = num(key, v)?,
            "sample_voxels" => b.sample_voxels = num(key, v)?,
            "voxel_stride" => b.voxel_stride = num(key, v)?,
            "ray_count" => b.ray_count = num(key, v)?,
            "samples_per_ray" => b.samples_per_ray = num(key, v)?,
            "radius_tolerance" => b.radius_tolerance = num(key, v)?,
            "max_radius" => b.max_radius = num(key, v)?,
            "insertion_core" => b.insertion_core = num(key, v)?,
            "node_cell_size" => b.node_cell_size = num(key, v)?,
            "frontier_connectivity" => {
                b.frontier_connectivity = match v {
                    "6" => Connectivity::Six,
                    "26" => Connectivity::TwentySix,
                    _ => return Err(Failure::Config(format!("{key}: expected 6 or 26"))),
                }
            }
            "xi" => b.xi = num(key, v)?,
            "d_max" => b.d_max = num(key, v)?,
            "seed" => self.set_seed(num(key, v)?),
            "sensor_range" => self.mission.sensor_range = num(key, v)?,
            "angular_step" => self.mission.angular_step = num(key, v)?,
            "elevation_min" => self.mission.elevation.0 = num(key, v)?,
            "elevation_max" => self.mission.elevation.1 = num(key, v)?,
            "mission_step" => self.mission.step = num(key, v)?,
            "rrt_step" => self.rrt.step = num(key, v)?,
            "rrt_rewire_radius" => self.rrt.rewire_radius = num(key, v)?,
            "rrt_timeout" => self.rrt.timeout = Duration::from_secs_f64(num::<f64>(key, v)?.max(0.0)),
            "rrt_goal_bias" => self.rrt.goal_bias = num(key, v)?,
            "grid_budget" => self.grid_budget = num(key, v)?,
            "grid_factor" => self.grid_factor = num(key, v)?,
            "goals" => self.goals = num(key, v)?,
            "sample_every" => self.sample_every = num(key, v)?,
            "min_goal_radius" => self.min_goal_radius = num(key, v)?,
            "world_kind" => self.world = self.respec(v.parse::<WorldKind>().map_err(Failure::Config)?),
            "world_size" => {
                let s: f64 = num(key, v)?;
                self.world.extent.x = s;
                self.world.extent.y = s;
            }
            "world_height" => self.world.extent.z = num(key, v)?,
            "resolution" => self.world.resolution = num(key, v)?,
            "corridor_min" => self.world.corridor_width.0 = num(key, v)?,
            "corridor_max" => self.world.corridor_width.1 = num(key, v)?,
            "room_min" => self.world.room_size.0 = num(key, v)?,
            "room_max" => self.world.room_size.1 = num(key, v)?,
            "passage_width" => self.world.passage_width = num(key, v)?,
            _ => return Err(Failure::Config(format!("unknown parameter '{key}'"))),
        }
        Ok(())
    }

    fn set_seed(&mut self, seed: u64) {
        self.build.seed = seed;
        self.rrt.seed = seed;
        self.world.seed = seed;
    }

    /// Default feature scales of `kind`, keeping size, resolution and seed.
    fn respec(&self, kind: WorldKind) -> WorldSpec {
        let mut w = WorldSpec::new(kind, self.world.extent.x, self.world.resolution, self.world.seed);
        w.extent.y = self.world.extent.y;
        w
    }

    fn load(common: &Common) -> Result<Self, Failure> {
        let mut s = Settings::default();
        if let Some(path) = &common.params {
            let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            for (n, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| Failure::Config(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
                s.set(k.trim(), v.trim())?;
            }
        }
        if let Some(seed) = common.seed {
            s.set_seed(seed);
        }
        Ok(s)
    }

    fn apply_world(&mut self, kind: &Option<String>, size: Option<f64>, resolution: Option<f64>) -> Outcome {
        if let Some(k) = kind {
            self.world = self.respec(k.parse::<WorldKind>().map_err(Failure::Config)?);
        }
        if let Some(s) = size {
            self.world.extent.x = s;
            self.world.extent.y = s;
        }
        if let Some(r) = resolution {
            self.world.resolution = r;
        }
        Ok(())
    }
}

fn out_path(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn read_grid(path: &Path) -> Result<OccupancyGrid, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    OccupancyGrid::load(&bytes).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn read_map(path: &Path) -> Result<SphereMap, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    SphereMap::load(&bytes).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn trace_path(world: &Path) -> PathBuf {
    let mut s = world.as_os_str().to_owned();
    s.push(".trace");
    PathBuf::from(s)
}

fn write_trace(path: &Path, trace: &[Vec3]) -> Outcome {
    let text: String = trace.iter().map(|p| format!("{},{},{}\n", p.x, p.y, p.z)).collect();
    fs::write(path, text)?;
    Ok(())
}

fn read_trace(path: &Path) -> Result<Vec<Vec3>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|l| parse_point(l).map_err(Failure::Config))
        .collect()
}

fn parse_modes(names: &[String]) -> Result<Vec<PlanMode>, Failure> {
    if names.is_empty() {
        return Ok(crate::bench::ALL_MODES.to_vec());
    }
    names.iter().map(|n| n.parse::<PlanMode>().map_err(Failure::Config)).collect()
}

fn gen(kind: Option<String>, size: Option<f64>, resolution: Option<f64>, common: Common) -> Outcome {
    let mut s = Settings::load(&common)?;
    s.apply_world(&kind, size, resolution)?;
    let world = generate_world(&s.world)?;
    let out = out_path(&common, "world.vxg");
    fs::write(&out, world.grid.save())?;
    write_trace(&trace_path(&out), &world.trace)?;
    let d = world.grid.dims();
    println!("{} {}x{}x{} voxels at {} m -> {}", s.world.kind, d[0], d[1], d[2], s.world.resolution, out.display());
    Ok(())
}

fn build(world: PathBuf, trace: Option<PathBuf>, known: bool, common: Common) -> Outcome {
    let s = Settings::load(&common)?;
    let grid = read_grid(&world)?;
    let trace_file = trace.unwrap_or_else(|| trace_path(&world));
    let map = if known || !trace_file.exists() {
        let mut map = SphereMap::new(s.build.clone())?;
        let reports = map.build_known(&grid);
        println!("swept {} update cubes", reports.len());
        map
    } else {
        let trace = read_trace(&trace_file)?;
        let m = run_mission(&grid, &trace, s.build.clone(), &s.mission)?;
        println!("flew {} iterations", m.reports.len());
        m.map
    };
    let out = out_path(&common, "map.smap");
    fs::write(&out, map.save())?;
    println!(
        "{} spheres, {} edges, {} segments -> {}",
        map.graph().len(),
        map.graph().edge_count(),
        map.segments().len(),
        out.display()
    );
    Ok(())
}

fn plan(map: PathBuf, world: Option<PathBuf>, from: Vec3, to: Vec3, mode: String, common: Common) -> Outcome {
    let s = Settings::load(&common)?;
    let mode: PlanMode = mode.parse().map_err(Failure::Config)?;
    let map = read_map(&map)?;
    let options = ScenarioOptions { rrt: s.rrt.clone(), grid_budget: s.grid_budget, ..Default::default() };
    let result = match world {
        Some(w) => PlanningSetup::from_map(read_grid(&w)?, map, s.grid_factor).plan(mode, &from, &to, &options),
        None => match mode {
            PlanMode::Cached => crate::planner::plan_cached(&map, &from, &to, &map.params().planner_params()),
            PlanMode::FullGraph => {
                crate::planner::astar_sphere_graph(map.graph(), &from, &to, &map.params().planner_params(), None)
            }
            _ => return Err(Failure::Config(format!("mode {mode} needs --world"))),
        },
    };
    let result = result.map_err(Failure::NoPath)?;
    let line = format!("{result}\n");
    match &common.out {
        Some(p) => fs::write(p, &line)?,
        None => print!("{line}"),
    }
    Ok(())
}

fn export_ltv(map: PathBuf, common: Common) -> Outcome {
    let map = read_map(&map)?;
    let ltv = extract(&map);
    let bytes = encode(&ltv);
    let out = out_path(&common, "map.ltvm");
    fs::write(&out, &bytes)?;
    println!(
        "{} boxes, {} edges, {} goals, {} bytes -> {}",
        ltv.segments.len(),
        ltv.edges.len(),
        ltv.goals.len(),
        bytes.len(),
        out.display()
    );
    Ok(())
}

fn bench(
    scenario: Scenario,
    kind: Option<String>,
    size: Option<f64>,
    resolution: Option<f64>,
    modes: Vec<String>,
    common: Common,
) -> Outcome {
    let mut s = Settings::load(&common)?;
    s.apply_world(&kind, size, resolution)?;
    let modes = parse_modes(&modes)?;
    let world = generate_world(&s.world)?;
    let seed = s.world.seed;
    let options = ScenarioOptions { modes, rrt: s.rrt.clone(), grid_budget: s.grid_budget, seed };
    let out = out_path(&common, "bench.csv");
    let file = fs::File::create(&out)?;
    match scenario {
        Scenario::MultiGoal | Scenario::SingleGoal => {
            let setup = PlanningSetup::new(world.grid, s.build.clone(), s.grid_factor)?;
            let want = if scenario == Scenario::SingleGoal { 2 } else { s.goals + 1 };
            let points = pick_endpoints(&setup.map, want, s.min_goal_radius, seed);
            if points.len() < 2 {
                return Err(Failure::Config("world too small for two endpoints".into()));
            }
            println!("# {TIMING_NOTE}");
            if scenario == Scenario::SingleGoal {
                let rows: Vec<_> = scenario_single_goal(&setup, &points[0], &points[1], &options)
                    .into_iter()
                    .map(|(r, _)| r)
                    .collect();
                for r in &rows {
                    println!("{:<12} found={} J={:.3} time={:.3} ms", r.mode, r.found, r.cost, r.time_ms);
                }
                write_csv(file, TIMING_NOTE, &rows)?;
            } else {
                let outcome = scenario_multi_goal(&setup, &points[0], &points[1..], &options);
                for r in &outcome.summary {
                    println!("{:<12} found {}/{} J={:.3} total {:.3} ms", r.mode, r.found, r.goals, r.mean_cost, r.total_time_ms);
                }
                write_csv(file, TIMING_NOTE, &outcome.summary)?;
            }
        }
        Scenario::Compression => {
            let (rows, _) = scenario_compression(&world.grid, &world.trace, s.build.clone(), &s.mission, s.sample_every)?;
            if let Some(last) = rows.last() {
                println!("final: ltv {} B, 1 m grid {} B, full grid {} B", last.ltv_bytes, last.coarse_bytes, last.full_bytes);
            }
            write_csv(file, "map sizes in bytes along the mission", &rows)?;
        }
        Scenario::Runtime => {
            let m = run_mission(&world.grid, &world.trace, s.build.clone(), &s.mission)?;
            let rows = runtime_rows(&m.reports);
            let mean = rows.iter().map(|r| r.total_ms).sum::<f64>() / rows.len().max(1) as f64;
            println!("{} iterations, mean {:.1} ms", rows.len(), mean);
            write_csv(file, "update iteration timings", &rows)?;
        }
    }
    println!("-> {}", out.display());
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Gen { kind, size, resolution, common } => gen(kind, size, resolution, common),
        Command::Build { world, trace, known, common } => build(world, trace, known, common),
        Command::Plan { map, world, from, to, mode, common } => plan(map, world, from, to, mode, common),
        Command::ExportLtv { map, common } => export_ltv(map, common),
        Command::Bench { scenario, kind, size, resolution, modes, common } => {
            bench(scenario, kind, size, resolution, modes, common)
        }
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::NoPath(e)) => {
            eprintln!("no path: {e}");
            1
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            2
        }
    }
}
