//! Extracts the compact box graph from a built map, compares its size with
//! grid representations and round-trips it through the binary encoding.

use spheremap::bench::{generate_world, WorldKind, WorldSpec};
use spheremap::ltv::{decode, encode, encoded_len, extract, misclassified_fraction, size_report};
use spheremap::map::{BuildParams, SphereMap};

fn main() {
    let world = generate_world(&WorldSpec::new(WorldKind::CorridorMaze, 50.0, 0.25, 2)).expect("valid spec");
    let mut map = SphereMap::new(BuildParams::default()).expect("valid parameters");
    map.build_known(&world.grid);

    let ltv = extract(&map);
    let sizes = size_report(&ltv, &world.grid);
    println!("{} segments, {} edges, {} goals", ltv.segments.len(), ltv.edges.len(), ltv.goals.len());
    println!("box graph     {:>10} bytes", sizes.ltv_bytes);
    println!("1 m grid      {:>10} bytes", sizes.coarse_bytes);
    println!("full grid     {:>10} bytes", sizes.full_bytes);
    println!("box volume that is not free: {:.1}%", 100.0 * misclassified_fraction(&ltv, &world.grid));

    for s in ltv.segments.iter().take(5) {
        println!(
            "  segment {:>4}: center {:>6.1?} yaw {:>6.3} half {:>5.2?} exploration {}",
            s.id, s.center, s.yaw, s.half_extents, s.exploration
        );
    }

    let bytes = encode(&ltv);
    assert_eq!(bytes.len(), encoded_len(ltv.segments.len(), ltv.edges.len(), ltv.goals.len()));
    assert_eq!(decode(&bytes).expect("own encoding decodes"), ltv);
    println!("encoding round-trips ({} bytes)", bytes.len());
}
