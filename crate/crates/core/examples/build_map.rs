//! Flies a mission through an unknown room grid and maintains a sphere map on the
//! way, then checks the map invariants and saves a snapshot.

use spheremap::bench::{generate_world, run_mission_with, MissionParams, WorldKind, WorldSpec};
use spheremap::map::{BuildParams, SphereMap};

fn main() {
    let world = generate_world(&WorldSpec::new(WorldKind::RoomGrid, 60.0, 0.25, 4)).expect("valid spec");
    let build = BuildParams::default();
    let mission = MissionParams::default();

    let mut worst = 0;
    let m = run_mission_with(&world.grid, &world.trace, build, &mission, |map, known, report| {
        let bad = map.check_invariants().len() + map.check_clearance(known).len();
        worst = worst.max(bad);
        if report.iteration % 10 == 0 {
            println!(
                "iteration {:>3}: {:>5} spheres, {:>5} edges, {:>3} segments, {:>5} frontier points, {:>6.1} ms",
                report.iteration,
                report.nodes,
                report.edges,
                report.segments,
                report.frontier_points,
                report.timings.total.as_secs_f64() * 1e3
            );
        }
    })
    .expect("valid parameters");

    println!(
        "{} iterations, {} spheres in {} segments, {} portals, {} cached paths, worst violation count {}",
        m.reports.len(),
        m.map.graph().len(),
        m.map.segments().len(),
        m.map.portals().len(),
        m.map.cache_len(),
        worst
    );
    println!("free-voxel coverage of the known space: {:.1}%", 100.0 * m.map.free_coverage(&m.known, None));

    let bytes = m.map.save();
    let back = SphereMap::load(&bytes).expect("snapshot loads");
    assert_eq!(back.graph().len(), m.map.graph().len());
    let path = std::env::temp_dir().join("rooms.smap");
    std::fs::write(&path, &bytes).expect("write snapshot");
    println!("snapshot of {} bytes written to {}", bytes.len(), path.display());
}
