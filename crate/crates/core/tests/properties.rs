//! Property tests of the planners, the sphere graph and the box-graph summary.

use proptest::prelude::*;
use spheremap::geometry::{intersection_radius, Ball};
use spheremap::ltv::{decode, extract};
use spheremap::map::{BuildParams, NodeId, SphereGraph, SphereMap};
use spheremap::planner::{astar_nodes, astar_sphere_graph, evaluate_recorded, PlanRecord, PlannerParams};
use spheremap::voxel::{OccupancyGrid, VoxelState};
use spheremap::Vec3;
use std::collections::BTreeSet;

const R_MIN: f64 = 0.8;

fn spheres() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((0.0..8.0, 0.0..8.0, 0.0..3.0, 0.9..2.8), 2..30)
}

fn graph_of(spheres: &[(f64, f64, f64, f64)]) -> SphereGraph {
    let mut g = SphereGraph::new(R_MIN, 4.0);
    for &(x, y, z, r) in spheres {
        g.insert(Vec3::new(x, y, z), r);
    }
    g
}

/// All-pairs optimal costs by Floyd-Warshall over `weight`, indexed by the
/// position of the node in `graph.ids()`.
fn all_pairs(graph: &SphereGraph, weight: impl Fn(&Vec3, f64, &Vec3, f64) -> f64) -> Vec<Vec<f64>> {
    let nodes: Vec<_> = graph.ids().into_iter().map(|id| graph.get(id).clone()).collect();
    let n = nodes.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        d[i][i] = 0.0;
        for j in 0..n {
            let (a, b) = (&nodes[i], &nodes[j]);
            if i != j && intersection_radius(&a.position, a.radius, &b.position, b.radius) > R_MIN {
                d[i][j] = weight(&a.position, a.radius, &b.position, b.radius);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn path_length(graph: &SphereGraph, path: &[NodeId]) -> f64 {
    path.windows(2).map(|w| (graph.get(w[0]).position - graph.get(w[1]).position).norm()).sum()
}

/// A solid 12 x 12 x 4 m block with a few free boxes carved out.
fn carved_world(boxes: &[(f64, f64, f64, f64)]) -> OccupancyGrid {
    let mut g = OccupancyGrid::new(0.25, Vec3::zeros(), [48, 48, 16], VoxelState::Occupied).unwrap();
    for &(x, y, w, h) in boxes {
        g.fill_box(Vec3::new(x, y, 0.5), Vec3::new((x + w).min(11.5), (y + h).min(11.5), 3.5), VoxelState::Free);
    }
    g
}

fn small_build() -> BuildParams {
    BuildParams { cube_side: 14.0, node_cell_size: 3.0, ..BuildParams::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_edges_follow_the_edge_rule(
        s in spheres(),
        ops in prop::collection::vec((0usize..30, prop::option::of(0.9..2.8f64)), 0..20),
    ) {
        let mut g = graph_of(&s);
        for (k, op) in ops {
            let ids = g.ids();
            if ids.is_empty() {
                break;
            }
            let id = ids[k % ids.len()];
            match op {
                Some(r) => {
                    g.set_radius(id, r);
                    g.reconnect(id);
                }
                None => {
                    g.remove(id);
                }
            }
        }
        let nodes: Vec<_> = g.nodes().cloned().collect();
        let mut expected = BTreeSet::new();
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                if intersection_radius(&a.position, a.radius, &b.position, b.radius) > R_MIN {
                    expected.insert((a.id.min(b.id), a.id.max(b.id)));
                }
            }
        }
        let actual: BTreeSet<_> = g.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
        prop_assert_eq!(actual, expected);
    }

    #[test]
    fn optimal_cost_grows_and_length_grows_with_xi(s in spheres(), xi_lo in 0.0..10.0f64, dxi in 0.0..10.0f64) {
        let g = graph_of(&s);
        let ids = g.ids();
        let (a, b) = (ids[0], ids[ids.len() - 1]);
        let lo = PlannerParams { xi: xi_lo, ..PlannerParams::default() };
        let hi = PlannerParams { xi: xi_lo + dxi, ..PlannerParams::default() };
        let (p_lo, p_hi) = (astar_nodes(&g, &lo, a, b, None), astar_nodes(&g, &hi, a, b, None));
        prop_assert_eq!(p_lo.is_some(), p_hi.is_some());
        if let (Some((path_lo, c_lo)), Some((path_hi, c_hi))) = (p_lo, p_hi) {
            prop_assert!(c_lo <= c_hi * (1.0 + 1e-12), "cost {c_lo} at xi {xi_lo} > {c_hi}");
            // Length and weight-free risk trade off monotonically.
            let (l_lo, l_hi) = (path_length(&g, &path_lo), path_length(&g, &path_hi));
            prop_assert!(l_lo <= l_hi + 1e-9 * l_hi.max(1.0), "length {l_lo} > {l_hi}");
        }
    }

    #[test]
    fn zero_xi_is_shortest_length(s in spheres()) {
        let g = graph_of(&s);
        let p = PlannerParams { xi: 0.0, ..PlannerParams::default() };
        let d = all_pairs(&g, |a, _, b, _| (a - b).norm());
        let ids = g.ids();
        let last = ids.len() - 1;
        match astar_nodes(&g, &p, ids[0], ids[last], None) {
            None => prop_assert!(d[0][last].is_infinite()),
            Some((_, c)) => prop_assert!(close(c, d[0][last]), "{c} vs oracle {}", d[0][last]),
        }
    }

    #[test]
    fn euclidean_heuristic_never_overestimates(s in spheres(), xi in 0.0..20.0f64) {
        let g = graph_of(&s);
        let p = PlannerParams { xi, ..PlannerParams::default() };
        let d = all_pairs(&g, |a, ra, b, rb| p.transition_total(a, ra, b, rb));
        let nodes: Vec<_> = g.ids().into_iter().map(|id| g.get(id).position).collect();
        for (i, pi) in nodes.iter().enumerate() {
            for (j, pj) in nodes.iter().enumerate() {
                if d[i][j].is_finite() {
                    prop_assert!((pi - pj).norm() <= d[i][j] * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn plan_results_are_self_consistent(s in spheres()) {
        let g = graph_of(&s);
        let p = PlannerParams::default();
        let ids = g.ids();
        let (a, b) = (g.get(ids[0]).position, g.get(ids[ids.len() - 1]).position);
        if let Ok(r) = astar_sphere_graph(&g, &a, &b, &p, None) {
            prop_assert!(close(r.cost, r.length + r.risk));
            let m = evaluate_recorded(&r.waypoints, &p);
            prop_assert!(close(m.length, r.length) && close(m.risk, r.risk) && close(m.cost, r.cost));
            prop_assert!(r.min_recorded_clearance() > R_MIN);
            let rec: PlanRecord = r.to_string().parse().unwrap();
            prop_assert_eq!(rec.mode, r.mode);
            prop_assert_eq!((rec.length, rec.risk, rec.cost), (r.length, r.risk, r.cost));
            prop_assert_eq!(rec.waypoints, r.positions());
        }
    }

    #[test]
    fn ltv_decoding_arbitrary_bytes_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..300)) {
        let _ = decode(&bytes);
        let _ = SphereMap::load(&bytes);
        let _ = OccupancyGrid::load(&bytes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ltv_boxes_contain_their_spheres_and_edges_mirror_segments(
        boxes in prop::collection::vec((0.5..8.0, 0.5..8.0, 2.0..6.0, 1.5..4.0), 1..4),
    ) {
        let world = carved_world(&boxes);
        let mut map = SphereMap::new(small_build()).unwrap();
        map.build_known(&world);
        let ltv = extract(&map);
        let graph = map.graph();

        let ids: BTreeSet<u32> = ltv.segments.iter().map(|s| s.id).collect();
        let labels: BTreeSet<u32> = map.segments().keys().map(|l| l.0).collect();
        prop_assert_eq!(&ids, &labels);

        for s in &ltv.segments {
            let bx = s.as_box();
            for id in &map.segments()[&spheremap::map::SegmentId(s.id)].members {
                let n = graph.get(*id);
                prop_assert!(bx.contains_ball(&Ball::new(n.position, n.radius)), "segment {} misses node {:?}", s.id, id);
            }
        }

        let mut adjacency = BTreeSet::new();
        for (a, b) in graph.edges() {
            let (sa, sb) = (graph.get(a).segment, graph.get(b).segment);
            if let (Some(sa), Some(sb)) = (sa, sb) {
                if sa != sb {
                    adjacency.insert((sa.0.min(sb.0), sa.0.max(sb.0)));
                }
            }
        }
        let edges: BTreeSet<(u32, u32)> = ltv.edges.iter().copied().collect();
        prop_assert_eq!(edges, adjacency);
    }
}
