//! Generates one world of each kind, prints its statistics and writes it as
//! a VXG1 file into the system temp directory.

use spheremap::bench::{free_components, generate_world, WorldKind, WorldSpec};
use spheremap::voxel::{OccupancyGrid, VoxelState};

fn main() {
    let dir = std::env::temp_dir();
    for kind in [WorldKind::CorridorMaze, WorldKind::PerforatedCave, WorldKind::RoomGrid] {
        let world = generate_world(&WorldSpec::new(kind, 40.0, 0.25, 1)).expect("valid spec");
        let g = &world.grid;
        let free = g.count(VoxelState::Free);
        let components = free_components(g);
        let trace_len = world.trace.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, |a, b| a + b);
        println!(
            "{:>16}: dims {:?}, {:.1}% free, {} free component(s), trace {} points / {:.0} m",
            kind.as_str(),
            g.dims(),
            100.0 * free as f64 / g.len() as f64,
            components.len(),
            world.trace.len(),
            trace_len
        );

        let path = dir.join(format!("{kind}.vxg"));
        let bytes = g.save();
        std::fs::write(&path, &bytes).expect("write world");
        let back = OccupancyGrid::load(&std::fs::read(&path).unwrap()).expect("reload");
        assert_eq!(&back, g);
        println!("{:>16}  saved {} bytes to {}", "", bytes.len(), path.display());
    }
}
