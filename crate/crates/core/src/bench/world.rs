use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::Vec3;
use crate::voxel::{OccupancyGrid, VoxelState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorldKind {
    CorridorMaze,
    PerforatedCave,
    RoomGrid,
}

impl WorldKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WorldKind::CorridorMaze => "corridor-maze",
            WorldKind::PerforatedCave => "perforated-cave",
            WorldKind::RoomGrid => "room-grid",
        }
    }
}

impl fmt::Display for WorldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WorldKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corridor-maze" | "maze" => Ok(WorldKind::CorridorMaze),
            "perforated-cave" | "cave" => Ok(WorldKind::PerforatedCave),
            "room-grid" | "rooms" => Ok(WorldKind::RoomGrid),
            other => Err(format!("unknown world kind '{other}'")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("infeasible world spec: {0}")]
pub struct WorldError(pub String);

/// Parameters of a synthetic world. All lengths are meters.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldSpec {
    pub kind: WorldKind,
    /// Size of the grid. The outermost voxel layer is always occupied.
    pub extent: Vec3,
    pub resolution: f64,
    pub seed: u64,
    /// Corridor or tunnel width range.
    pub corridor_width: (f64, f64),
    /// Room or chamber size range.
    pub room_size: (f64, f64),
    /// Door width between rooms.
    pub passage_width: f64,
}

impl WorldSpec {
    /// Defaults for each kind at the given horizontal extent.
    pub fn new(kind: WorldKind, extent_xy: f64, resolution: f64, seed: u64) -> Self {
        let (height, corridor, room) = match kind {
            WorldKind::CorridorMaze => (4.0, (3.0, 5.0), (8.0, 8.0)),
            WorldKind::PerforatedCave => (16.0, (3.0, 5.0), (8.0, 14.0)),
            WorldKind::RoomGrid => (4.0, (3.0, 3.0), (8.0, 14.0)),
        };
        Self {
            kind,
            extent: Vec3::new(extent_xy, extent_xy, height),
            resolution,
            seed,
            corridor_width: corridor,
            room_size: room,
            passage_width: 2.5,
        }
    }

    /// A 30 m world at 0.25 m, quick enough for doc examples.
    pub fn small(kind: WorldKind, seed: u64) -> Self {
        Self::new(kind, 30.0, 0.25, seed)
    }

    fn validate(&self) -> Result<(), WorldError> {
        let fail = |m: String| Err(WorldError(m));
        if !(self.resolution > 0.0) {
            return fail(format!("resolution {}", self.resolution));
        }
        if self.extent.iter().any(|e| !(*e >= 3.0 * self.resolution)) {
            return fail(format!("extent {:?} too small", self.extent));
        }
        let (lo, hi) = self.corridor_width;
        if !(lo > 0.0 && lo <= hi) || !(self.room_size.0 > 0.0 && self.room_size.0 <= self.room_size.1) {
            return fail("width ranges must be positive and ordered".into());
        }
        let inner = self.extent.x.min(self.extent.y) - 2.0 * self.resolution;
        if hi > inner || self.room_size.0 > inner || self.passage_width > inner {
            return fail(format!("features wider than the {inner} m interior"));
        }
        if self.passage_width <= 0.0 {
            return fail("passage width must be positive".into());
        }
        Ok(())
    }
}

/// A generated world and a route through its free space.
#[derive(Clone, Debug)]
pub struct World {
    pub spec: WorldSpec,
    pub grid: OccupancyGrid,
    /// Waypoints such that the straight move between consecutive ones stays
    /// in free space.
    pub trace: Vec<Vec3>,
}

struct Carver {
    grid: OccupancyGrid,
}

impl Carver {
    fn solid(spec: &WorldSpec) -> Self {
        let dims = [0, 1, 2].map(|a| (spec.extent[a] / spec.resolution).round().max(3.0) as usize);
        let grid = OccupancyGrid::new(spec.resolution, Vec3::zeros(), dims, VoxelState::Occupied).expect("validated spec");
        Self { grid }
    }

    /// Clamps a box to the interior so the outer shell stays occupied.
    fn clamp(&self, min: Vec3, max: Vec3) -> (Vec3, Vec3) {
        let res = self.grid.resolution();
        let lo = self.grid.origin() + Vec3::repeat(res);
        let hi = self.grid.origin() + self.grid.extent() - Vec3::repeat(res);
        (min.sup(&lo), max.inf(&hi))
    }

    fn carve_box(&mut self, min: Vec3, max: Vec3) {
        let (lo, hi) = self.clamp(min, max);
        self.grid.fill_box(lo, hi, VoxelState::Free);
    }

    /// Frees voxels whose centroid is within `r` of the segment `a`-`b`.
    fn carve_capsule(&mut self, a: &Vec3, b: &Vec3, r: f64) {
        let (lo, hi) = self.clamp(a.inf(b) - Vec3::repeat(r), a.sup(b) + Vec3::repeat(r));
        let cube_c = (lo + hi) / 2.0;
        let side = (hi - lo).max();
        let cube = crate::voxel::UpdateCube::new(cube_c, side.max(self.grid.resolution()));
        let Some(range) = cube.voxel_range(&self.grid) else { return };
        let ab = b - a;
        let len2 = ab.norm_squared();
        for v in range.iter() {
            let p = self.grid.centroid(v);
            if (0..3).any(|k| p[k] < lo[k] || p[k] > hi[k]) {
                continue;
            }
            let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
            if (p - (a + ab * t)).norm() <= r {
                self.grid.set(v, VoxelState::Free);
            }
        }
    }
}

/// Depth-first walk over a spanning tree, returning to the parent after
/// each subtree so that consecutive entries are tree neighbors.
fn tree_walk(adj: &[Vec<usize>], root: usize) -> Vec<usize> {
    fn visit(adj: &[Vec<usize>], n: usize, parent: usize, out: &mut Vec<usize>) {
        out.push(n);
        for &c in &adj[n] {
            if c != parent {
                visit(adj, c, n, out);
                out.push(n);
            }
        }
    }
    let mut out = Vec::new();
    visit(adj, root, usize::MAX, &mut out);
    out
}

/// Random spanning tree over a `nx` x `ny` lattice by randomized DFS, plus
/// a few extra lattice edges for loops.
fn lattice_tree(nx: usize, ny: usize, rng: &mut ChaCha8Rng, loops: f64) -> (Vec<Vec<usize>>, Vec<(usize, usize)>) {
    let n = nx * ny;
    let mut tree = vec![Vec::new(); n];
    let mut edges = Vec::new();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let nbrs = |i: usize| {
        let (x, y) = (i % nx, i / nx);
        let mut v = Vec::new();
        if x > 0 {
            v.push(i - 1);
        }
        if x + 1 < nx {
            v.push(i + 1);
        }
        if y > 0 {
            v.push(i - nx);
        }
        if y + 1 < ny {
            v.push(i + nx);
        }
        v
    };
    while let Some(&cur) = stack.last() {
        let mut open: Vec<usize> = nbrs(cur).into_iter().filter(|j| !seen[*j]).collect();
        if open.is_empty() {
            stack.pop();
            continue;
        }
        open.shuffle(rng);
        let next = open[0];
        seen[next] = true;
        tree[cur].push(next);
        tree[next].push(cur);
        edges.push((cur, next));
        stack.push(next);
    }
    for i in 0..n {
        for j in nbrs(i) {
            if j > i && !tree[i].contains(&j) && rng.gen_bool(loops) {
                edges.push((i, j));
            }
        }
    }
    (tree, edges)
}

fn maze(spec: &WorldSpec, rng: &mut ChaCha8Rng) -> Result<World, WorldError> {
    let mut c = Carver::solid(spec);
    let cell = spec.room_size.1.max(spec.corridor_width.1 + 1.0);
    let nx = ((spec.extent.x - 2.0 * spec.resolution) / cell).floor() as usize;
    let ny = ((spec.extent.y - 2.0 * spec.resolution) / cell).floor() as usize;
    if nx == 0 || ny == 0 {
        return Err(WorldError(format!("no maze cell of {cell} m fits")));
    }
    let off = Vec3::new(
        (spec.extent.x - nx as f64 * cell) / 2.0,
        (spec.extent.y - ny as f64 * cell) / 2.0,
        0.0,
    );
    let z0 = spec.resolution;
    let z1 = spec.extent.z - spec.resolution;
    let center = |i: usize| off + Vec3::new(((i % nx) as f64 + 0.5) * cell, ((i / nx) as f64 + 0.5) * cell, (z0 + z1) / 2.0);
    let (tree, edges) = lattice_tree(nx, ny, rng, 0.1);
    let width = |rng: &mut ChaCha8Rng| {
        let (lo, hi) = spec.corridor_width;
        if hi > lo {
            rng.gen_range(lo..=hi)
        } else {
            lo
        }
    };
    for (a, b) in edges {
        let (pa, pb) = (center(a), center(b));
        let h = width(rng) / 2.0;
        let lo = pa.inf(&pb) - Vec3::new(h, h, 0.0);
        let hi = pa.sup(&pb) + Vec3::new(h, h, 0.0);
        c.carve_box(Vec3::new(lo.x, lo.y, z0), Vec3::new(hi.x, hi.y, z1));
    }
    if nx * ny == 1 {
        let p = center(0);
        let h = width(rng) / 2.0;
        c.carve_box(Vec3::new(p.x - h, p.y - h, z0), Vec3::new(p.x + h, p.y + h, z1));
    }
    let trace = tree_walk(&tree, 0).into_iter().map(center).collect();
    Ok(World { spec: spec.clone(), grid: c.grid, trace })
}

fn rooms(spec: &WorldSpec, rng: &mut ChaCha8Rng) -> Result<World, WorldError> {
    let mut c = Carver::solid(spec);
    let wall = 1.0;
    let cell = spec.room_size.1 + wall;
    let nx = (((spec.extent.x - 2.0 * spec.resolution) / cell).floor() as usize).max(1);
    let ny = (((spec.extent.y - 2.0 * spec.resolution) / cell).floor() as usize).max(1);
    let cell_x = (spec.extent.x / nx as f64).min(cell);
    let cell_y = (spec.extent.y / ny as f64).min(cell);
    let off = Vec3::new((spec.extent.x - nx as f64 * cell_x) / 2.0, (spec.extent.y - ny as f64 * cell_y) / 2.0, 0.0);
    let z0 = spec.resolution;
    let z1 = spec.extent.z - spec.resolution;
    let center = |i: usize| {
        off + Vec3::new(((i % nx) as f64 + 0.5) * cell_x, ((i / nx) as f64 + 0.5) * cell_y, (z0 + z1) / 2.0)
    };
    for i in 0..nx * ny {
        let p = center(i);
        let max_x = (cell_x - wall).min(spec.room_size.1);
        let max_y = (cell_y - wall).min(spec.room_size.1);
        let sx = if max_x > spec.room_size.0 { rng.gen_range(spec.room_size.0..=max_x) } else { max_x };
        let sy = if max_y > spec.room_size.0 { rng.gen_range(spec.room_size.0..=max_y) } else { max_y };
        c.carve_box(Vec3::new(p.x - sx / 2.0, p.y - sy / 2.0, z0), Vec3::new(p.x + sx / 2.0, p.y + sy / 2.0, z1));
    }
    let (tree, edges) = lattice_tree(nx, ny, rng, 0.15);
    let h = spec.passage_width / 2.0;
    for (a, b) in edges {
        let (pa, pb) = (center(a), center(b));
        let lo = pa.inf(&pb) - Vec3::new(h, h, 0.0);
        let hi = pa.sup(&pb) + Vec3::new(h, h, 0.0);
        c.carve_box(Vec3::new(lo.x, lo.y, z0), Vec3::new(hi.x, hi.y, z1.min(z0 + 3.0)));
    }
    let trace = tree_walk(&tree, 0).into_iter().map(center).collect();
    Ok(World { spec: spec.clone(), grid: c.grid, trace })
}

fn cave(spec: &WorldSpec, rng: &mut ChaCha8Rng) -> Result<World, WorldError> {
    let mut c = Carver::solid(spec);
    let (rlo, rhi) = (spec.room_size.0 / 2.0, spec.room_size.1 / 2.0);
    let margin = rhi + spec.resolution;
    let vz = (spec.extent.z - 2.0 * margin).max(0.0);
    let area = (spec.extent.x - 2.0 * margin).max(1.0) * (spec.extent.y - 2.0 * margin).max(1.0);
    let count = ((area / (spec.room_size.1 * spec.room_size.1 * 4.0)).round() as usize).max(1);
    let pick = |rng: &mut ChaCha8Rng, lo: f64, span: f64| if span > 0.0 { lo + rng.gen_range(0.0..span) } else { lo + span / 2.0 };
    let mut chambers: Vec<(Vec3, f64)> = Vec::new();
    for _ in 0..count {
        let p = Vec3::new(
            pick(rng, margin, (spec.extent.x - 2.0 * margin).max(0.0)),
            pick(rng, margin, (spec.extent.y - 2.0 * margin).max(0.0)),
            if vz > 0.0 { margin + rng.gen_range(0.0..vz) } else { spec.extent.z / 2.0 },
        );
        let r = if rhi > rlo { rng.gen_range(rlo..=rhi) } else { rlo };
        let r = r.min(spec.extent.z / 2.0 - spec.resolution).max(spec.resolution);
        chambers.push((p, r));
    }
    // Prim's tree over chamber centers, then a few short extra tunnels
    let n = chambers.len();
    let mut in_tree = vec![false; n];
    let mut adj = vec![Vec::new(); n];
    let mut tunnels = Vec::new();
    in_tree[0] = true;
    for _ in 1..n {
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..n).filter(|i| in_tree[*i]) {
            for j in (0..n).filter(|j| !in_tree[*j]) {
                let d = (chambers[i].0 - chambers[j].0).norm();
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        let (_, i, j) = best;
        in_tree[j] = true;
        adj[i].push(j);
        adj[j].push(i);
        tunnels.push((i, j));
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = (chambers[i].0 - chambers[j].0).norm();
            if !adj[i].contains(&j) && d < 2.5 * spec.room_size.1 && rng.gen_bool(0.2) {
                tunnels.push((i, j));
            }
        }
    }
    for (p, r) in &chambers {
        c.carve_capsule(p, p, *r);
    }
    for (i, j) in tunnels {
        let (lo, hi) = spec.corridor_width;
        let w = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        c.carve_capsule(&chambers[i].0, &chambers[j].0, w / 2.0);
    }
    let trace = tree_walk(&adj, 0).into_iter().map(|i| chambers[i].0).collect();
    Ok(World { spec: spec.clone(), grid: c.grid, trace })
}

/// Builds a fully known world (free and occupied voxels only).
pub fn generate_world(spec: &WorldSpec) -> Result<World, WorldError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        WorldKind::CorridorMaze => maze(spec, &mut rng),
        WorldKind::PerforatedCave => cave(spec, &mut rng),
        WorldKind::RoomGrid => rooms(spec, &mut rng),
    }
}

/// Two rooms joined by a straight narrow passage and by a wide detour.
///
/// The rooms are 10 m cubes-ish spaces 4 m high; the passage is `narrow`
/// wide, the detour loop `wide` wide. Returns the grid and a start and goal
/// in the middle of the two rooms.
pub fn two_route_world(resolution: f64, narrow: f64, wide: f64) -> (OccupancyGrid, Vec3, Vec3) {
    let spec = WorldSpec {
        kind: WorldKind::RoomGrid,
        extent: Vec3::new(44.0, 32.0 + wide, 4.0),
        resolution,
        seed: 0,
        corridor_width: (wide, wide),
        room_size: (10.0, 10.0),
        passage_width: narrow,
    };
    let mut c = Carver::solid(&spec);
    let (z0, z1) = (resolution, spec.extent.z - resolution);
    let y_mid = 11.0;
    let left = Vec3::new(8.0, y_mid, 2.0);
    let right = Vec3::new(36.0, y_mid, 2.0);
    c.carve_box(Vec3::new(3.0, y_mid - 5.0, z0), Vec3::new(13.0, y_mid + 5.0, z1));
    c.carve_box(Vec3::new(31.0, y_mid - 5.0, z0), Vec3::new(41.0, y_mid + 5.0, z1));
    // the direct route
    c.carve_box(Vec3::new(13.0, y_mid - narrow / 2.0, z0), Vec3::new(31.0, y_mid + narrow / 2.0, z1));
    // the detour: up from each room, then across
    let top = y_mid + 5.0 + 6.0 + wide / 2.0;
    let h = wide / 2.0;
    c.carve_box(Vec3::new(8.0 - h, y_mid, z0), Vec3::new(8.0 + h, top + h, z1));
    c.carve_box(Vec3::new(36.0 - h, y_mid, z0), Vec3::new(36.0 + h, top + h, z1));
    c.carve_box(Vec3::new(8.0 - h, top - h, z0), Vec3::new(36.0 + h, top + h, z1));
    (c.grid, left, right)
}

/// Sizes of the 6-connected free components, largest first.
pub fn free_components(grid: &OccupancyGrid) -> Vec<usize> {
    let mut label = vec![false; grid.len()];
    let dims = grid.dims();
    let mut sizes = Vec::new();
    for start in 0..grid.len() {
        if label[start] || grid.states()[start] != VoxelState::Free {
            continue;
        }
        label[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let v = grid.voxel_from_linear(i);
            for a in 0..3 {
                for d in [-1i64, 1] {
                    let mut w = [v[0] as i64, v[1] as i64, v[2] as i64];
                    w[a] += d;
                    if w[a] < 0 || w[a] >= dims[a] as i64 {
                        continue;
                    }
                    let j = grid.linear_index([w[0] as usize, w[1] as usize, w[2] as usize]);
                    if !label[j] && grid.states()[j] == VoxelState::Free {
                        label[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}
