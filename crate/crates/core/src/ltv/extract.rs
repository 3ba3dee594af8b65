use std::collections::{BTreeMap, HashMap};

use super::{encode, LtvMap, LtvSegment};
use crate::geometry::{Ball, Vec3};
use crate::map::SphereMap;
use crate::voxel::{OccupancyGrid, UpdateCube, VoxelState};

/// Frontier points closer than this to a goal seed join its cluster.
pub const GOAL_CLUSTER_RADIUS: f64 = 5.0;

/// Exploration bytes per frontier point per member sphere.
const EXPLORATION_SCALE: f64 = 16.0;

/// Nearest `f32` at or above `x`.
fn f32_up(x: f64) -> f32 {
    let f = x as f32;
    if (f as f64) < x {
        f.next_up()
    } else {
        f
    }
}

/// Moves a box to `f32` precision and grows it just enough that every ball
/// stays inside under the rounded center and yaw.
fn to_wire(label: u32, bx: &super::OrientedBox, balls: &[Ball], exploration: u8) -> LtvSegment {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut yaw = bx.yaw as f32;
    if (yaw as f64) < -half_pi {
        yaw = yaw.next_up();
    }
    if (yaw as f64) >= half_pi {
        yaw = yaw.next_down();
    }
    let mut seg = LtvSegment {
        id: label,
        center: [bx.center.x as f32, bx.center.y as f32, bx.center.z as f32],
        yaw,
        half_extents: [0.0; 3],
        exploration,
        coverage: 0,
    };
    let frame = seg.as_box();
    let mut need = bx.half_extents;
    for b in balls {
        let l = frame.to_local(&b.center);
        for a in 0..3 {
            need[a] = need[a].max(l[a].abs() + b.radius);
        }
    }
    seg.half_extents = [f32_up(need.x), f32_up(need.y), f32_up(need.z)];
    seg
}

/// Greedy clustering: 1 m bins weighted by how many frontier points lie
/// within the cluster radius; the heaviest free bin seeds a cluster that
/// absorbs every free bin in range. Goals are the cluster centroids.
fn cluster_goals<'a>(points: impl Iterator<Item = &'a Vec3>) -> Vec<Vec3> {
    let mut bins: BTreeMap<[i64; 3], (Vec3, usize)> = BTreeMap::new();
    for p in points {
        let key = [p.x.floor() as i64, p.y.floor() as i64, p.z.floor() as i64];
        let e = bins.entry(key).or_insert((Vec3::zeros(), 0));
        e.0 += p;
        e.1 += 1;
    }
    let bins: Vec<([i64; 3], Vec3, usize)> = bins.into_iter().map(|(k, (s, n))| (k, s / n as f64, n)).collect();
    let r = GOAL_CLUSTER_RADIUS;
    let cell = |p: &Vec3| [(p.x / r).floor() as i64, (p.y / r).floor() as i64, (p.z / r).floor() as i64];
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, b) in bins.iter().enumerate() {
        grid.entry(cell(&b.1)).or_default().push(i);
    }
    let near = |p: &Vec3| {
        let c = cell(p);
        let mut out = Vec::new();
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(v) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        out.extend(v.iter().copied().filter(|j| (bins[*j].1 - p).norm() <= r));
                    }
                }
            }
        }
        out
    };
    let weights: Vec<usize> = bins.iter().map(|b| near(&b.1).iter().map(|j| bins[*j].2).sum()).collect();
    let mut order: Vec<usize> = (0..bins.len()).collect();
    order.sort_by(|a, b| weights[*b].cmp(&weights[*a]).then(bins[*a].0.cmp(&bins[*b].0)));
    let mut taken = vec![false; bins.len()];
    let mut goals = Vec::new();
    for seed in order {
        if taken[seed] {
            continue;
        }
        let mut sum = Vec3::zeros();
        let mut n = 0;
        for j in near(&bins[seed].1) {
            if !taken[j] {
                taken[j] = true;
                sum += bins[j].1 * bins[j].2 as f64;
                n += bins[j].2;
            }
        }
        goals.push(sum / n as f64);
    }
    goals
}

/// Summarizes the map: boxes of the current segments, their adjacency and
/// exploration goals from the frontier points seen so far.
pub fn extract(map: &SphereMap) -> LtvMap {
    let graph = map.graph();
    let mut segments = Vec::with_capacity(map.segments().len());
    for (label, seg) in map.segments() {
        let balls: Vec<Ball> = seg
            .members
            .iter()
            .map(|id| {
                let n = graph.get(*id);
                Ball::new(n.position, n.radius)
            })
            .collect();
        let bx = match map.boxes().get(label) {
            Some(b) => b.clone(),
            None => super::fit_box(&balls),
        };
        let count = map.frontiers().count_within(&seg.bounds.center, seg.bounds.radius);
        let exploration = if count == 0 {
            0
        } else {
            (1.0 + EXPLORATION_SCALE * count as f64 / seg.members.len().max(1) as f64).round().min(255.0) as u8
        };
        segments.push(to_wire(label.0, &bx, &balls, exploration));
    }
    let edges = map.portals().keys().map(|(a, b)| (a.0.min(b.0), a.0.max(b.0))).collect();
    let goals = cluster_goals(map.frontiers().points())
        .into_iter()
        .map(|g| [g.x as f32, g.y as f32, g.z as f32])
        .collect();
    LtvMap { segments, edges, goals }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SizeReport {
    pub ltv_bytes: usize,
    pub full_bytes: usize,
    /// The grid downsampled to roughly 1 m voxels.
    pub coarse_bytes: usize,
}

pub fn size_report(ltv: &LtvMap, grid: &OccupancyGrid) -> SizeReport {
    let factor = (1.0 / grid.resolution()).round().max(1.0) as usize;
    SizeReport {
        ltv_bytes: encode(ltv).len(),
        full_bytes: grid.save().len(),
        coarse_bytes: grid.downsample(factor).save().len(),
    }
}

/// Fraction of the voxels inside the boxes (by centroid) that are not free.
/// Voxels inside several boxes count once per box.
pub fn misclassified_fraction(ltv: &LtvMap, grid: &OccupancyGrid) -> f64 {
    let mut inside = 0usize;
    let mut wrong = 0usize;
    for s in &ltv.segments {
        let bx = s.as_box();
        let reach = bx.half_extents.norm();
        let cube = UpdateCube::new(bx.center, 2.0 * reach);
        let Some(range) = cube.voxel_range(grid) else { continue };
        for v in range.iter() {
            if bx.contains_point(&grid.centroid(v)) {
                inside += 1;
                if grid.get(v) != VoxelState::Free {
                    wrong += 1;
                }
            }
        }
    }
    if inside == 0 {
        0.0
    } else {
        wrong as f64 / inside as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::BuildParams;

    #[test]
    fn empty_map() {
        let m = SphereMap::new(BuildParams::default()).unwrap();
        let ltv = extract(&m);
        assert_eq!(ltv, LtvMap::default());
        let g = OccupancyGrid::new(0.2, Vec3::zeros(), [10, 10, 10], VoxelState::Unknown).unwrap();
        let r = size_report(&ltv, &g);
        assert_eq!(r.ltv_bytes, 16);
    }

    #[test]
    fn clusters_split_far_points() {
        let pts = [
            Vec3::new(0.1, 0.1, 0.1),
            Vec3::new(1.1, 0.1, 0.1),
            Vec3::new(0.5, 2.0, 0.5),
            Vec3::new(30.5, 0.5, 0.5),
        ];
        let goals = cluster_goals(pts.iter());
        assert_eq!(goals.len(), 2);
        assert!((goals[0] - Vec3::new(1.7 / 3.0, 2.2 / 3.0, 0.7 / 3.0)).norm() < 1e-9);
        assert_eq!(goals[1], pts[3]);
    }

    #[test]
    fn wire_box_keeps_balls_inside() {
        let balls = [
            Ball::new(Vec3::new(100.123456789, -50.3, 2.1), 1.234567),
            Ball::new(Vec3::new(104.9, -47.77, 2.6), 2.5),
        ];
        let bx = super::super::fit_box(&balls);
        let s = to_wire(1, &bx, &balls, 0);
        let wire = s.as_box();
        assert!(balls.iter().all(|b| wire.contains_ball(b)));
    }
}
