//! Acceptance suite. Every test prints one `criterion N: PASS|FAIL ...`
//! line and fails the test on FAIL. Tests share a lock so that timing
//! measurements never overlap.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spheremap::bench::{
    generate_world, pick_endpoints, run_mission_with, scenario_compression, two_route_world, world_index,
    MissionParams, PlanningSetup, ScenarioOptions, WorldKind, WorldSpec,
};
use spheremap::geometry::intersection_radius;
use spheremap::ltv::{decode, encode, encoded_len, extract, LtvMap, LtvSegment};
use spheremap::map::{BuildParams, SphereGraph, SphereMap};
use spheremap::planner::{
    astar_nodes, astar_sphere_graph, evaluate_path, evaluate_recorded, PlanMode, PlanResult, PlannerParams, RrtParams,
    Waypoint,
};
use spheremap::voxel::{OccupancyGrid, UpdateCube, VoxelState};
use spheremap::Vec3;

const R_MIN: f64 = 0.8;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Prints the verdict line and asserts it. The line goes to the raw stderr
/// handle, which the test harness does not capture, so every verdict shows
/// in a plain `cargo test` run.
fn report(n: u32, pass: bool, detail: String) {
    let line = format!("criterion {n}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn params() -> PlannerParams {
    PlannerParams { xi: 7.0, d_max: 2.0, r_min: R_MIN }
}

/// Every path a benchmark fixture produced, with its world.
struct Recorded {
    name: String,
    mode: PlanMode,
    clearance: f64,
}

fn record(out: &mut Vec<Recorded>, name: &str, setup: &PlanningSetup, r: &PlanResult) {
    out.push(Recorded { name: name.to_string(), mode: r.mode, clearance: brute_clearance(setup, r) });
}

/// Minimum distance from the polyline to every occupied voxel center,
/// by exhaustive search over the voxels near each segment.
fn brute_clearance(setup: &PlanningSetup, r: &PlanResult) -> f64 {
    let grid = &setup.world;
    let pts = r.positions();
    let reach = 3.0;
    let mut best = f64::INFINITY;
    let segs: Vec<(Vec3, Vec3)> = if pts.len() == 1 {
        vec![(pts[0], pts[0])]
    } else {
        pts.windows(2).map(|w| (w[0], w[1])).collect()
    };
    for (a, b) in segs {
        let lo = a.inf(&b) - Vec3::repeat(reach);
        let hi = a.sup(&b) + Vec3::repeat(reach);
        let (vlo, vhi) = (grid.voxel_coords(&lo), grid.voxel_coords(&hi));
        let ab = b - a;
        let len2 = ab.norm_squared();
        for z in vlo[2]..=vhi[2] {
            for y in vlo[1]..=vhi[1] {
                for x in vlo[0]..=vhi[0] {
                    let v = [x, y, z];
                    if !grid.in_bounds(v) {
                        continue;
                    }
                    let v = [x as usize, y as usize, z as usize];
                    if grid.get(v) != VoxelState::Occupied {
                        continue;
                    }
                    let q = grid.centroid(v);
                    let t = if len2 > 0.0 { ((q - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
                    best = best.min((q - (a + ab * t)).norm());
                }
            }
        }
    }
    best.min(reach)
}

// ---------------------------------------------------------------- fixtures

struct SpeedFixture {
    setup: PlanningSetup,
    /// `(mode, start index, per-query time, cost)`.
    runs: Vec<(PlanMode, usize, Duration, f64)>,
    paths: Vec<Recorded>,
    distances: Vec<f64>,
}

/// 150 m corridor maze at 0.2 m, baseline grid at 0.4 m, long queries.
fn speed_fixture() -> &'static SpeedFixture {
    static F: OnceLock<SpeedFixture> = OnceLock::new();
    F.get_or_init(|| {
        let world = generate_world(&WorldSpec::new(WorldKind::CorridorMaze, 150.0, 0.2, 3)).unwrap();
        let setup = PlanningSetup::new(world.grid, BuildParams::default(), 2).unwrap();
        let pts = pick_endpoints(&setup.map, 40, 1.5, 3);
        let mut pairs = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                pairs.push(((pts[i] - pts[j]).norm(), i, j));
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let chosen: Vec<_> = pairs.iter().step_by(7).take(6).copied().collect();
        let options = ScenarioOptions::default();
        let mut runs = Vec::new();
        let mut paths = Vec::new();
        for (q, &(_, i, j)) in chosen.iter().enumerate() {
            for mode in [PlanMode::Cached, PlanMode::FullGraph, PlanMode::Grid, PlanMode::GridLength] {
                let r = setup.plan(mode, &pts[i], &pts[j], &options).expect("maze is connected");
                record(&mut paths, "maze-150", &setup, &r);
                runs.push((mode, q, r.time, r.cost));
            }
        }
        SpeedFixture { distances: chosen.iter().map(|c| c.0).collect(), setup, runs, paths }
    })
}

struct CostFixture {
    name: String,
    /// Cost per mode.
    costs: BTreeMap<PlanMode, f64>,
}

/// Five seeded single-goal fixtures with a fine (factor 1) baseline grid.
fn cost_fixtures() -> &'static (Vec<CostFixture>, Vec<Recorded>) {
    static F: OnceLock<(Vec<CostFixture>, Vec<Recorded>)> = OnceLock::new();
    F.get_or_init(|| {
        let specs = [
            (WorldKind::CorridorMaze, 40.0, 11),
            (WorldKind::CorridorMaze, 40.0, 12),
            (WorldKind::PerforatedCave, 60.0, 13),
            (WorldKind::PerforatedCave, 60.0, 14),
            (WorldKind::RoomGrid, 40.0, 15),
        ];
        let mut fixtures = Vec::new();
        let mut paths = Vec::new();
        for (kind, size, seed) in specs {
            let name = format!("{kind}-{size}-s{seed}");
            let world = generate_world(&WorldSpec::new(kind, size, 0.2, seed)).unwrap();
            let build = BuildParams { seed, ..Default::default() };
            let setup = PlanningSetup::new(world.grid, build, 1).unwrap();
            let pts = far_endpoints(&setup.map);
            let (i, j) = (0, 1);
            assert!((pts[i] - pts[j]).norm() > 10.0, "{name}: endpoints too close");
            let options = ScenarioOptions {
                rrt: RrtParams { seed, timeout: Duration::from_secs(5), ..Default::default() },
                seed,
                ..Default::default()
            };
            let mut costs = BTreeMap::new();
            for mode in PlanMode::ALL {
                match setup.plan(mode, &pts[i], &pts[j], &options) {
                    Ok(r) => {
                        record(&mut paths, &name, &setup, &r);
                        costs.insert(mode, r.cost);
                    }
                    Err(e) if mode == PlanMode::RrtStar => println!("  {name}: rrt found no path ({e})"),
                    Err(e) => panic!("{name}: {mode} failed: {e}"),
                }
            }
            fixtures.push(CostFixture { name, costs });
        }
        (fixtures, paths)
    })
}

/// Two centers of large spheres far apart: a double sweep for the
/// farthest pair.
fn far_endpoints(map: &SphereMap) -> Vec<Vec3> {
    let big: Vec<Vec3> = map.graph().nodes().filter(|n| n.radius >= 1.5).map(|n| n.position).collect();
    let farthest = |from: &Vec3| {
        *big.iter().max_by(|a, b| (*a - from).norm().total_cmp(&(*b - from).norm())).unwrap()
    };
    let a = farthest(&Vec3::zeros());
    let b = farthest(&a);
    vec![farthest(&b), b]
}

struct TwoRoute {
    /// `(mode, length, risk)` with metrics evaluated against the world.
    metrics: Vec<(PlanMode, f64, f64)>,
    paths: Vec<Recorded>,
}

fn two_route_fixture() -> &'static TwoRoute {
    static F: OnceLock<TwoRoute> = OnceLock::new();
    F.get_or_init(|| {
        let (grid, start, goal) = two_route_world(0.2, 2.0, 8.0);
        let setup = PlanningSetup::new(grid, BuildParams::default(), 1).unwrap();
        let options = ScenarioOptions::default();
        let mut metrics = Vec::new();
        let mut paths = Vec::new();
        for mode in PlanMode::ALL {
            let r = setup.plan(mode, &start, &goal, &options).expect("both routes are open");
            record(&mut paths, "two-route", &setup, &r);
            let m = evaluate_path(&r.positions(), &setup.index, &setup.params);
            metrics.push((mode, m.length, m.risk));
        }
        TwoRoute { metrics, paths }
    })
}

// ------------------------------------------------------------- criterion 1

/// Dijkstra by repeated linear selection; returns distances and parents.
fn ucs_oracle(graph: &SphereGraph, p: &PlannerParams, from: u32) -> BTreeMap<u32, (f64, u32)> {
    let mut dist: BTreeMap<u32, (f64, u32)> = BTreeMap::new();
    let mut done: BTreeSet<u32> = BTreeSet::new();
    dist.insert(from, (0.0, from));
    loop {
        let next = dist
            .iter()
            .filter(|(id, _)| !done.contains(id))
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(b.0)))
            .map(|(id, d)| (*id, d.0));
        let Some((u, du)) = next else { break };
        done.insert(u);
        let nu = graph.node(spheremap::map::NodeId(u)).unwrap();
        for other in graph.nodes() {
            if other.id.0 == u || done.contains(&other.id.0) {
                continue;
            }
            if intersection_radius(&nu.position, nu.radius, &other.position, other.radius) <= p.r_min {
                continue;
            }
            let c = du + p.transition_total(&nu.position, nu.radius, &other.position, other.radius);
            if dist.get(&other.id.0).map_or(true, |(old, _)| c < *old) {
                dist.insert(other.id.0, (c, u));
            }
        }
    }
    dist
}

#[test]
fn criterion_01_astar_matches_uniform_cost_oracle() {
    let _g = serial();
    let t = Instant::now();
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut reachable, mut mismatches) = (0, Vec::new());
    for case in 0..100 {
        let n = rng.gen_range(2..=50);
        let mut graph = SphereGraph::new(R_MIN, 4.0);
        for _ in 0..n {
            let c = Vec3::new(rng.gen_range(0.0..9.0), rng.gen_range(0.0..9.0), rng.gen_range(0.0..4.0));
            graph.insert(c, rng.gen_range(0.9..3.0));
        }
        let ids = graph.ids();
        let (a, b) = (ids[0], ids[ids.len() - 1]);
        let oracle = ucs_oracle(&graph, &p, a.0);
        let (na, nb) = (graph.get(a).clone(), graph.get(b).clone());
        let nodes = astar_nodes(&graph, &p, a, b, None);
        let full = astar_sphere_graph(&graph, &na.position, &nb.position, &p, None);
        match oracle.get(&b.0) {
            None => {
                if nodes.is_some() || full.is_ok() {
                    mismatches.push(format!("case {case}: oracle unreachable, A* found a path"));
                }
            }
            Some((cost, _)) => {
                reachable += 1;
                let mut chain = vec![b.0];
                while *chain.last().unwrap() != a.0 {
                    chain.push(oracle[chain.last().unwrap()].1);
                }
                chain.reverse();
                let wps: Vec<Waypoint> = chain
                    .iter()
                    .map(|id| {
                        let n = graph.get(spheremap::map::NodeId(*id));
                        Waypoint { position: n.position, clearance: n.radius }
                    })
                    .collect();
                let oracle_eval = evaluate_recorded(&wps, &p).cost;
                match (&nodes, &full) {
                    (Some((_, c)), Ok(r)) if *c == *cost && r.cost == oracle_eval => {}
                    _ => mismatches.push(format!(
                        "case {case}: oracle {cost} / {oracle_eval}, nodes {:?}, full {:?}",
                        nodes.as_ref().map(|x| x.1),
                        full.as_ref().map(|r| r.cost)
                    )),
                }
            }
        }
    }
    let elapsed = t.elapsed();
    report(
        1,
        mismatches.is_empty() && elapsed < Duration::from_secs(10),
        format!("100 graphs, {reachable} with a path, {} mismatches, {elapsed:.2?} {:?}", mismatches.len(), mismatches.first()),
    );
}

// ------------------------------------------------------------- criterion 2

#[test]
fn criterion_02_every_benchmark_path_keeps_clearance() {
    let _g = serial();
    let mut all: Vec<&Recorded> = Vec::new();
    all.extend(&speed_fixture().paths);
    all.extend(&cost_fixtures().1);
    all.extend(&two_route_fixture().paths);
    let bad: Vec<String> = all
        .iter()
        .filter(|r| !(r.clearance > R_MIN))
        .map(|r| format!("{} {} {:.3}", r.name, r.mode, r.clearance))
        .collect();
    let min = all.iter().map(|r| r.clearance).fold(f64::INFINITY, f64::min);
    report(2, bad.is_empty(), format!("{} paths, min clearance {min:.3} m, violations {bad:?}", all.len()));
}

// ------------------------------------------------------------- criterion 3

#[test]
fn criterion_03_speed_ordering_on_maze() {
    let _g = serial();
    let f = speed_fixture();
    let total = |mode: PlanMode| -> Duration { f.runs.iter().filter(|r| r.0 == mode).map(|r| r.2).sum() };
    let (cached, full, grid) = (total(PlanMode::Cached), total(PlanMode::FullGraph), total(PlanMode::Grid));
    let queries = f.distances.len() as u32;
    let r1 = full.as_secs_f64() / cached.as_secs_f64();
    let r2 = grid.as_secs_f64() / full.as_secs_f64();
    println!(
        "  maze: {} spheres, {} segments, build {:.1?}; {queries} queries {:.0}-{:.0} m apart",
        f.setup.map.graph().len(),
        f.setup.map.segments().len(),
        f.setup.build_time,
        f.distances.iter().cloned().fold(f64::INFINITY, f64::min),
        f.distances.iter().cloned().fold(0.0, f64::max)
    );
    report(
        3,
        r1 >= 50.0 && r2 >= 50.0,
        format!(
            "mean per query: cached {:.3?}, full {:.3?}, grid {:.3?}; full/cached {r1:.1}x, grid/full {r2:.1}x (need 50x each)",
            cached / queries,
            full / queries,
            grid / queries
        ),
    );
}

// ------------------------------------------------------------- criterion 4

#[test]
fn criterion_04_cost_quality() {
    let _g = serial();
    let (fixtures, _) = cost_fixtures();
    let mut worst = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for f in fixtures {
        let c = f.costs[&PlanMode::Cached] / f.costs[&PlanMode::FullGraph];
        let g = f.costs[&PlanMode::FullGraph] / f.costs[&PlanMode::Grid];
        println!("  {}: cached/full {c:.3}, full/grid {g:.3} {:?}", f.name, f.costs);
        worst = (if c.is_nan() { c } else { worst.0.max(c) }, if g.is_nan() { g } else { worst.1.max(g) });
        if !(c <= 1.3 && g <= 1.25) {
            failures.push(f.name.clone());
        }
    }
    report(
        4,
        fixtures.len() >= 5 && failures.is_empty(),
        format!(
            "{} fixtures, worst cached/full {:.3} (<= 1.3), worst full/fine-grid {:.3} (<= 1.25), failing {failures:?}",
            fixtures.len(),
            worst.0,
            worst.1
        ),
    );
}

// ------------------------------------------------------------- criterion 5

#[test]
fn criterion_05_risk_reduction_on_two_routes() {
    let _g = serial();
    let f = two_route_fixture();
    let get = |m: PlanMode| f.metrics.iter().find(|x| x.0 == m).copied().unwrap();
    let (_, l_len, z_len) = get(PlanMode::GridLength);
    let mut worst = 0.0f64;
    for m in [PlanMode::Grid, PlanMode::FullGraph, PlanMode::Cached] {
        let (_, l, z) = get(m);
        println!("  {m}: L {l:.2} Z {z:.2}");
        worst = worst.max(z / z_len);
    }
    println!("  grid-length: L {l_len:.2} Z {z_len:.2}");
    report(
        5,
        worst <= 0.5,
        format!("worst safety-aware Z / length-only Z = {worst:.3} (need <= 0.5)"),
    );
}

// ------------------------------------------------------------- criterion 6

#[test]
fn criterion_06_coverage_fixpoint_in_room() {
    let _g = serial();
    let res = 0.2;
    let n = |m: f64| (m / res).round() as usize;
    let mut grid = OccupancyGrid::new(res, Vec3::zeros(), [n(21.0), n(21.0), n(4.0)], VoxelState::Occupied).unwrap();
    grid.fill_box(Vec3::new(0.5, 0.5, 0.5), Vec3::new(20.5, 20.5, 3.5), VoxelState::Free);
    let mut map = SphereMap::new(BuildParams::default()).unwrap();
    let uav = Vec3::new(10.5, 10.5, 2.0);
    let mut reached = None;
    let mut coverage = 0.0;
    for it in 1..=20 {
        map.update_iteration(&grid, &uav);
        // oracle: every free voxel centroid tested against every sphere
        let spheres: Vec<(Vec3, f64)> = map.graph().nodes().map(|s| (s.position, s.radius)).collect();
        let (mut free, mut covered) = (0usize, 0usize);
        for v in grid.full_range().iter() {
            if grid.get(v) == VoxelState::Free {
                free += 1;
                let c = grid.centroid(v);
                if spheres.iter().any(|(p, r)| (c - p).norm() <= *r) {
                    covered += 1;
                }
            }
        }
        coverage = covered as f64 / free as f64;
        if coverage >= 0.95 && reached.is_none() {
            reached = Some(it);
        }
    }
    report(
        6,
        reached.is_some(),
        format!("reached 95% at iteration {reached:?}, coverage after 20: {:.2}%", coverage * 100.0),
    );
}

// ------------------------------------------------------------- criterion 7

fn settle(map: &mut SphereMap, grid: &OccupancyGrid, at: &Vec3) {
    for _ in 0..16 {
        if map.update_iteration(grid, at).changes.is_quiet() {
            break;
        }
    }
}

fn median_iteration(map: &SphereMap, grid: &OccupancyGrid, at: &Vec3, runs: usize) -> Duration {
    let mut times: Vec<Duration> = (0..runs)
        .map(|_| {
            let mut m = map.clone();
            let t = Instant::now();
            m.update_iteration(grid, at);
            t.elapsed()
        })
        .collect();
    times.sort();
    times[runs / 2]
}

#[test]
fn criterion_07_update_locality() {
    let _g = serial();
    let mut spec = WorldSpec::new(WorldKind::RoomGrid, 120.0, 0.2, 21);
    spec.extent.z = 4.0;
    let world = generate_world(&spec).unwrap();
    let build = BuildParams { cube_side: 40.0, ..Default::default() };
    let local = Vec3::new(30.0, 30.0, 2.0);
    let mut small = SphereMap::new(build.clone()).unwrap();
    settle(&mut small, &world.grid, &local);
    let mut large = small.clone();
    for c in [Vec3::new(90.0, 30.0, 2.0), Vec3::new(30.0, 90.0, 2.0), Vec3::new(90.0, 90.0, 2.0)] {
        settle(&mut large, &world.grid, &c);
    }
    settle(&mut small, &world.grid, &local);
    settle(&mut large, &world.grid, &local);
    let cube = UpdateCube::new(local, build.cube_side);
    let inside = |m: &SphereMap| m.graph().nodes_in_cube(&cube).len();
    // interleave to spread machine noise over both maps
    let (mut ts, mut tl) = (Vec::new(), Vec::new());
    for _ in 0..5 {
        ts.push(median_iteration(&small, &world.grid, &local, 5));
        tl.push(median_iteration(&large, &world.grid, &local, 5));
    }
    ts.sort();
    tl.sort();
    let (a, b) = (ts[2].as_secs_f64(), tl[2].as_secs_f64());
    let ratio = a.max(b) / a.min(b);
    let growth = large.graph().len() as f64 / small.graph().len() as f64;
    println!(
        "  {} vs {} spheres ({growth:.2}x), {} vs {} inside the cube",
        small.graph().len(),
        large.graph().len(),
        inside(&small),
        inside(&large)
    );
    let mean = mission_reference().mean_iteration;
    println!("  reference: mean cave mission iteration {mean:.1?} (paper reports about 150 ms; not gating)");
    report(
        7,
        growth >= 3.5 && ratio <= 1.5,
        format!("median iteration {:.1} ms vs {:.1} ms, ratio {ratio:.2} (<= 1.5)", a * 1e3, b * 1e3),
    );
}

// ------------------------------------------------------------- criteria 8, 9

struct MissionOutcome {
    name: String,
    checkpoints: usize,
    violations: Vec<String>,
    /// `(ltv, coarse, full)` at the end.
    sizes: (usize, usize, usize),
    ltv_edges: BTreeSet<(u32, u32)>,
    adjacency: BTreeSet<(u32, u32)>,
}

struct MissionReference {
    outcomes: Vec<MissionOutcome>,
    mean_iteration: Duration,
}

/// Segment adjacency straight from the sphere graph edges.
fn segment_adjacency(map: &SphereMap) -> BTreeSet<(u32, u32)> {
    let g = map.graph();
    g.edges()
        .filter_map(|(a, b)| {
            let (sa, sb) = (g.get(a).segment?, g.get(b).segment?);
            (sa != sb).then(|| (sa.0.min(sb.0), sa.0.max(sb.0)))
        })
        .collect()
}

fn mission_reference() -> &'static MissionReference {
    static F: OnceLock<MissionReference> = OnceLock::new();
    F.get_or_init(|| {
        let mission = MissionParams::default();
        let mut outcomes = Vec::new();
        let mut cave_times = Vec::new();
        for (kind, seed) in [(WorldKind::PerforatedCave, 31), (WorldKind::CorridorMaze, 32), (WorldKind::RoomGrid, 33)] {
            let world = generate_world(&WorldSpec::new(kind, 50.0, 0.2, seed)).unwrap();
            let build = BuildParams { seed, ..Default::default() };
            let mut checkpoints = 0;
            let mut violations = Vec::new();
            let m = run_mission_with(&world.grid, &world.trace, build.clone(), &mission, |map, known, r| {
                checkpoints += 1;
                for v in map.check_invariants().into_iter().chain(map.check_clearance(known)) {
                    violations.push(format!("iteration {}: {v}", r.iteration));
                }
            })
            .unwrap();
            if kind == WorldKind::PerforatedCave {
                cave_times = m.reports.iter().map(|r| r.timings.total).collect();
            }
            let ltv = extract(&m.map);
            let sizes = spheremap::ltv::size_report(&ltv, &m.known);
            outcomes.push(MissionOutcome {
                name: format!("{kind}-s{seed}"),
                checkpoints,
                violations,
                sizes: (sizes.ltv_bytes, sizes.coarse_bytes, sizes.full_bytes),
                ltv_edges: ltv.edges.iter().copied().collect(),
                adjacency: segment_adjacency(&m.map),
            });
        }
        let mean_iteration = cave_times.iter().sum::<Duration>() / cave_times.len().max(1) as u32;
        MissionReference { outcomes, mean_iteration }
    })
}

#[test]
fn criterion_08_invariants_at_every_checkpoint() {
    let _g = serial();
    let r = mission_reference();
    let total: usize = r.outcomes.iter().map(|o| o.checkpoints).sum();
    let bad: Vec<&String> = r.outcomes.iter().flat_map(|o| &o.violations).collect();
    for o in &r.outcomes {
        println!("  {}: {} checkpoints, {} violations", o.name, o.checkpoints, o.violations.len());
    }
    report(8, bad.is_empty() && total > 0, format!("{total} checkpoints, {} violations {:?}", bad.len(), bad.first()));
}

#[test]
fn criterion_09_compression_ordering_and_adjacency() {
    let _g = serial();
    let r = mission_reference();
    let mut ok = true;
    for o in &r.outcomes {
        let (ltv, coarse, full) = o.sizes;
        let order = ltv < coarse && coarse < full;
        let adj = o.ltv_edges == o.adjacency;
        println!("  {}: ltv {ltv} B < 1 m grid {coarse} B < full {full} B: {order}; edges == adjacency: {adj}", o.name);
        ok &= order && adj;
    }
    // the standalone compression scenario on the cave mission
    let world = generate_world(&WorldSpec::new(WorldKind::PerforatedCave, 50.0, 0.2, 31)).unwrap();
    let (rows, _) =
        scenario_compression(&world.grid, &world.trace, BuildParams { seed: 31, ..Default::default() }, &MissionParams::default(), 10)
            .unwrap();
    let last = rows.last().unwrap();
    let monotone = rows.windows(2).all(|w| w[0].full_bytes <= w[1].full_bytes);
    ok &= last.ltv_bytes < last.coarse_bytes && last.coarse_bytes < last.full_bytes;
    report(
        9,
        ok,
        format!(
            "cave scenario end: ltv {} B, 1 m {} B, full {} B, full size monotone {monotone}",
            last.ltv_bytes, last.coarse_bytes, last.full_bytes
        ),
    );
}

// ------------------------------------------------------------ criterion 10

fn random_grid(rng: &mut ChaCha8Rng) -> OccupancyGrid {
    let dims = [rng.gen_range(1..12), rng.gen_range(1..12), rng.gen_range(1..8)];
    let origin = Vec3::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-5.0..5.0));
    let res = rng.gen_range(0.05..1.0);
    let states: Vec<VoxelState> = (0..dims[0] * dims[1] * dims[2])
        .map(|_| match rng.gen_range(0..3) {
            0 => VoxelState::Unknown,
            1 => VoxelState::Free,
            _ => VoxelState::Occupied,
        })
        .collect();
    OccupancyGrid::from_states(res, origin, dims, states).unwrap()
}

fn random_map(rng: &mut ChaCha8Rng) -> SphereMap {
    let res = 0.5;
    let dims = [rng.gen_range(10..30), rng.gen_range(10..30), rng.gen_range(6..12)];
    let mut grid = OccupancyGrid::new(res, Vec3::zeros(), dims, VoxelState::Free).unwrap();
    let ext = grid.extent();
    for _ in 0..rng.gen_range(0..6) {
        let a = Vec3::new(rng.gen_range(0.0..ext.x), rng.gen_range(0.0..ext.y), rng.gen_range(0.0..ext.z));
        let s = Vec3::new(rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0));
        grid.fill_box(a, a + s, VoxelState::Occupied);
    }
    let build = BuildParams { cube_side: 10.0, seed: rng.gen(), ray_count: 8, ..Default::default() };
    let mut map = SphereMap::new(build).unwrap();
    for _ in 0..rng.gen_range(0..3) {
        let p = Vec3::new(rng.gen_range(0.0..ext.x), rng.gen_range(0.0..ext.y), rng.gen_range(0.0..ext.z));
        map.update_iteration(&grid, &p);
    }
    map
}

fn random_ltv(rng: &mut ChaCha8Rng) -> LtvMap {
    let f = |rng: &mut ChaCha8Rng| rng.gen_range(-1e3f32..1e3);
    let n = rng.gen_range(0..20);
    let segments = (0..n)
        .map(|i| LtvSegment {
            id: i * 3 + rng.gen_range(0..3),
            center: [f(rng), f(rng), f(rng)],
            yaw: rng.gen_range(-std::f32::consts::FRAC_PI_2..std::f32::consts::FRAC_PI_2),
            half_extents: [rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0)],
            exploration: rng.gen(),
            coverage: rng.gen(),
        })
        .collect();
    let edges = (0..rng.gen_range(0..30)).map(|_| (rng.gen(), rng.gen())).collect();
    let goals = (0..rng.gen_range(0..10)).map(|_| [f(rng), f(rng), f(rng)]).collect();
    LtvMap { segments, edges, goals }
}

#[test]
fn criterion_10_format_round_trips() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = Vec::new();
    for i in 0..1000 {
        let g = random_grid(&mut rng);
        let bytes = g.save();
        match OccupancyGrid::load(&bytes) {
            Ok(back) if back == g && back.save() == bytes => {}
            other => failures.push(format!("VXG1 #{i}: {:?}", other.err())),
        }
    }
    for i in 0..1000 {
        let m = random_map(&mut rng);
        let bytes = m.save();
        match SphereMap::load(&bytes) {
            Ok(back) if back == m && back.save() == bytes => {}
            other => failures.push(format!("SMAP #{i}: {:?}", other.err())),
        }
    }
    for i in 0..1000 {
        let l = random_ltv(&mut rng);
        let bytes = encode(&l);
        let formula = 16 + 34 * l.segments.len() + 8 * l.edges.len() + 12 * l.goals.len();
        if bytes.len() != formula || encoded_len(l.segments.len(), l.edges.len(), l.goals.len()) != formula {
            failures.push(format!("LTVM #{i}: length {} != {formula}", bytes.len()));
        }
        match decode(&bytes) {
            Ok(back) if back == l && encode(&back) == bytes => {}
            other => failures.push(format!("LTVM #{i}: {:?}", other.err())),
        }
    }
    report(10, failures.is_empty(), format!("3 x 1000 instances, {} failures {:?}", failures.len(), failures.first()));
}

// keep the shared index helper honest on the fixture it validates
#[test]
fn brute_force_clearance_agrees_with_index() {
    let _g = serial();
    let f = two_route_fixture();
    let (grid, start, goal) = two_route_world(0.2, 2.0, 8.0);
    let setup = PlanningSetup::new(grid, BuildParams::default(), 1).unwrap();
    let r = setup.plan(PlanMode::Cached, &start, &goal, &ScenarioOptions::default()).unwrap();
    let idx = world_index(&setup.world);
    let exact = spheremap::bench::path_clearance(&r.positions(), &idx, 3.0);
    assert!((exact - brute_clearance(&setup, &r)).abs() < 1e-9);
    assert!(!f.paths.is_empty());
}
