//! End-to-end runs of the `spheremap` binary.

use std::path::Path;
use std::process::{Command, Output};

fn spheremap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spheremap")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Drops the `time_ms` column, the only nondeterministic one.
fn without_times(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            if l.starts_with('#') {
                return l.to_string();
            }
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(2);
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn unknown_flag_exits_with_2() {
    let out = spheremap(&["gen", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_map_exits_with_2() {
    let out = spheremap(&["plan", "--map", "/nonexistent/x.smap", "--from", "1,1,1", "--to", "2,2,2"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_params_key_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.toml");
    std::fs::write(&params, "bogus_key = 3\n").unwrap();
    let out = spheremap(&["gen", "--params", path(&params), "--out", path(&dir.path().join("w.vxg"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_build_plan_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let world = dir.path().join("rooms.vxg");
    let map = dir.path().join("rooms.smap");
    let ltv = dir.path().join("rooms.ltvm");

    let gen = spheremap(&["gen", "--kind", "rooms", "--size", "60", "--resolution", "0.25", "--seed", "4", "--out", path(&world)]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let grid = spheremap::voxel::OccupancyGrid::load(&std::fs::read(&world).unwrap()).unwrap();
    assert_eq!(grid.dims(), [240, 240, 16]);
    let trace = std::fs::read_to_string(format!("{}.trace", path(&world))).unwrap();
    let first = trace.lines().next().expect("trace has points").trim().to_string();

    let build = spheremap(&["build", "--world", path(&world), "--known", "--out", path(&map)]);
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let loaded = spheremap::map::SphereMap::load(&std::fs::read(&map).unwrap()).unwrap();
    assert!(loaded.segments().len() > 1);

    // Start equals goal: a zero-cost path.
    let plan = spheremap(&["plan", "--map", path(&map), "--from", &first, "--to", &first]);
    assert!(plan.status.success(), "{}", String::from_utf8_lossy(&plan.stderr));
    let line = String::from_utf8(plan.stdout).unwrap();
    let rec: spheremap::planner::PlanRecord = line.trim().parse().unwrap();
    assert_eq!((rec.length, rec.risk, rec.cost), (0.0, 0.0, 0.0));

    // A goal inside the outer wall has no path.
    let blocked = spheremap(&["plan", "--map", path(&map), "--from", &first, "--to", "0.1,0.1,0.1"]);
    assert_eq!(blocked.status.code(), Some(1));

    // Grid modes need the world.
    let no_world = spheremap(&["plan", "--map", path(&map), "--from", &first, "--to", &first, "--mode", "grid"]);
    assert_eq!(no_world.status.code(), Some(2));

    let export = spheremap(&["export-ltv", "--map", path(&map), "--out", path(&ltv)]);
    assert!(export.status.success(), "{}", String::from_utf8_lossy(&export.stderr));
    let decoded = spheremap::ltv::decode(&std::fs::read(&ltv).unwrap()).unwrap();
    assert_eq!(decoded.segments.len(), loaded.segments().len());
}

#[test]
fn single_goal_bench_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("single.csv");
    let out = spheremap(&[
        "bench",
        "single-goal",
        "--kind",
        "rooms",
        "--size",
        "60",
        "--resolution",
        "0.25",
        "--seed",
        "4",
        "--modes",
        "grid,grid-length,full,cached",
        "--out",
        path(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got = without_times(&std::fs::read_to_string(&csv).unwrap());
    let golden = include_str!("golden/single_goal_rooms60.csv");
    assert_eq!(got.trim_end(), golden.trim_end());
}
