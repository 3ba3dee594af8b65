//! Dense occupancy grid: storage, frontier and obstacle extraction, ray
//! traversal, downsampling and the `VXG1` file format.

mod io;

pub use io::GridParseError;

use crate::geometry::Vec3;
use thiserror::Error;

/// Logical state of one voxel. The discriminants are the on-disk codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum VoxelState {
    Unknown = 0,
    Free = 1,
    Occupied = 2,
}

impl VoxelState {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Unknown),
            1 => Some(Self::Free),
            2 => Some(Self::Occupied),
            _ => None,
        }
    }

    /// Aggregation priority used by [`OccupancyGrid::downsample`].
    fn priority(self) -> u8 {
        match self {
            Self::Unknown => 0,
            Self::Free => 1,
            Self::Occupied => 2,
        }
    }
}

/// Neighborhood used when deciding whether a free voxel touches unknown space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Connectivity {
    #[default]
    Six,
    TwentySix,
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("resolution must be positive and finite, got {0}")]
    BadResolution(f64),
    #[error("grid dimensions {0:?} are empty or too large")]
    BadDims([usize; 3]),
    #[error("state array has {got} entries, dims require {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Fixed-resolution voxel field, x-fastest ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    resolution: f64,
    origin: Vec3,
    dims: [usize; 3],
    states: Vec<VoxelState>,
}

/// Half-open voxel index box `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VoxelRange {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl VoxelRange {
    pub fn len(&self) -> usize {
        (0..3).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|a| self.hi[a] <= self.lo[a])
    }

    pub fn contains(&self, v: [usize; 3]) -> bool {
        (0..3).all(|a| v[a] >= self.lo[a] && v[a] < self.hi[a])
    }

    /// Iterates voxel indices x-fastest.
    pub fn iter(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let r = *self;
        (r.lo[2]..r.hi[2]).flat_map(move |k| {
            (r.lo[1]..r.hi[1]).flat_map(move |j| (r.lo[0]..r.hi[0]).map(move |i| [i, j, k]))
        })
    }
}

/// Axis-aligned cube around the vehicle that one update iteration may touch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateCube {
    pub center: Vec3,
    pub side: f64,
}

impl UpdateCube {
    pub fn new(center: Vec3, side: f64) -> Self {
        assert!(side > 0.0, "update cube side must be positive");
        Self { center, side }
    }

    pub fn half(&self) -> f64 {
        self.side / 2.0
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let h = self.half();
        (0..3).all(|a| (p[a] - self.center[a]).abs() <= h)
    }

    /// The same cube grown by `margin` on every side.
    pub fn inflated(&self, margin: f64) -> UpdateCube {
        UpdateCube::new(self.center, self.side + 2.0 * margin)
    }

    /// Voxels whose centroids lie in the cube, clipped to the grid.
    pub fn voxel_range(&self, grid: &OccupancyGrid) -> Option<VoxelRange> {
        let h = self.half();
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..3 {
            let min = (self.center[a] - h - grid.origin[a]) / grid.resolution - 0.5;
            let max = (self.center[a] + h - grid.origin[a]) / grid.resolution - 0.5;
            let l = min.ceil().max(0.0);
            let u = max.floor();
            if u < 0.0 || l > (grid.dims[a] - 1) as f64 || l > u {
                return None;
            }
            lo[a] = l as usize;
            hi[a] = (u as usize).min(grid.dims[a] - 1) + 1;
        }
        Some(VoxelRange { lo, hi })
    }
}

const NEIGHBORS_6: [[i64; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

fn neighbors_26() -> impl Iterator<Item = [i64; 3]> {
    (-1..=1i64).flat_map(|dz| {
        (-1..=1i64).flat_map(move |dy| {
            (-1..=1i64)
                .map(move |dx| [dx, dy, dz])
                .filter(|d| *d != [0, 0, 0])
        })
    })
}

impl OccupancyGrid {
    pub fn new(
        resolution: f64,
        origin: Vec3,
        dims: [usize; 3],
        fill: VoxelState,
    ) -> Result<Self, GridError> {
        let len = Self::checked_len(resolution, dims)?;
        Ok(Self {
            resolution,
            origin,
            dims,
            states: vec![fill; len],
        })
    }

    pub fn from_states(
        resolution: f64,
        origin: Vec3,
        dims: [usize; 3],
        states: Vec<VoxelState>,
    ) -> Result<Self, GridError> {
        let len = Self::checked_len(resolution, dims)?;
        if states.len() != len {
            return Err(GridError::LengthMismatch {
                expected: len,
                got: states.len(),
            });
        }
        Ok(Self {
            resolution,
            origin,
            dims,
            states,
        })
    }

    fn checked_len(resolution: f64, dims: [usize; 3]) -> Result<usize, GridError> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(GridError::BadResolution(resolution));
        }
        if dims.contains(&0) {
            return Err(GridError::BadDims(dims));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(GridError::BadDims(dims))
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[VoxelState] {
        &self.states
    }

    /// World-space extent of the grid volume.
    pub fn extent(&self) -> Vec3 {
        Vec3::new(
            self.dims[0] as f64 * self.resolution,
            self.dims[1] as f64 * self.resolution,
            self.dims[2] as f64 * self.resolution,
        )
    }

    pub fn full_range(&self) -> VoxelRange {
        VoxelRange {
            lo: [0, 0, 0],
            hi: self.dims,
        }
    }

    pub fn linear_index(&self, v: [usize; 3]) -> usize {
        v[0] + self.dims[0] * (v[1] + self.dims[1] * v[2])
    }

    pub fn voxel_from_linear(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let k = idx / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    /// Signed voxel coordinates of the voxel containing `p`; may lie outside.
    pub fn voxel_coords(&self, p: &Vec3) -> [i64; 3] {
        let mut out = [0i64; 3];
        for a in 0..3 {
            out[a] = ((p[a] - self.origin[a]) / self.resolution).floor() as i64;
        }
        out
    }

    pub fn in_bounds(&self, v: [i64; 3]) -> bool {
        (0..3).all(|a| v[a] >= 0 && (v[a] as usize) < self.dims[a])
    }

    pub fn voxel_of(&self, p: &Vec3) -> Option<[usize; 3]> {
        let v = self.voxel_coords(p);
        self.in_bounds(v)
            .then(|| [v[0] as usize, v[1] as usize, v[2] as usize])
    }

    pub fn centroid(&self, v: [usize; 3]) -> Vec3 {
        Vec3::new(
            self.origin.x + self.resolution * (v[0] as f64 + 0.5),
            self.origin.y + self.resolution * (v[1] as f64 + 0.5),
            self.origin.z + self.resolution * (v[2] as f64 + 0.5),
        )
    }

    pub fn get(&self, v: [usize; 3]) -> VoxelState {
        self.states[self.linear_index(v)]
    }

    /// State with the outside of the array reading as unknown.
    pub fn get_or_unknown(&self, v: [i64; 3]) -> VoxelState {
        if self.in_bounds(v) {
            self.get([v[0] as usize, v[1] as usize, v[2] as usize])
        } else {
            VoxelState::Unknown
        }
    }

    pub fn set(&mut self, v: [usize; 3], state: VoxelState) {
        let idx = self.linear_index(v);
        self.states[idx] = state;
    }

    pub fn fill_range(&mut self, range: &VoxelRange, state: VoxelState) {
        for v in range.iter() {
            self.set(v, state);
        }
    }

    /// Sets every voxel whose centroid lies in the world-space box.
    pub fn fill_box(&mut self, min: Vec3, max: Vec3, state: VoxelState) {
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..3 {
            let l = ((min[a] - self.origin[a]) / self.resolution - 0.5).ceil().max(0.0);
            let u = ((max[a] - self.origin[a]) / self.resolution - 0.5).floor();
            if u < l || u < 0.0 || l >= self.dims[a] as f64 {
                return;
            }
            lo[a] = l as usize;
            hi[a] = (u as usize).min(self.dims[a] - 1) + 1;
        }
        self.fill_range(&VoxelRange { lo, hi }, state);
    }

    /// State of the voxel containing `p`, `None` outside the grid volume.
    pub fn state_at(&self, p: &Vec3) -> Option<VoxelState> {
        self.voxel_of(p).map(|v| self.get(v))
    }

    pub fn count(&self, state: VoxelState) -> usize {
        self.states.iter().filter(|s| **s == state).count()
    }

    /// Centroids of every occupied voxel in the clipped cube.
    pub fn obstacle_points(&self, cube: &UpdateCube) -> Vec<Vec3> {
        let Some(range) = cube.voxel_range(self) else {
            return Vec::new();
        };
        range
            .iter()
            .filter(|v| self.get(*v) == VoxelState::Occupied)
            .map(|v| self.centroid(v))
            .collect()
    }

    /// Occupied voxels in the cube that have a non-occupied in-bounds
    /// 6-neighbor.
    ///
    /// For any query point outside occupied voxels the nearest occupied
    /// centroid is always one of these, so distance queries stay exact while
    /// the point set shrinks to the obstacle surface.
    pub fn surface_obstacle_points(&self, cube: &UpdateCube) -> Vec<Vec3> {
        let Some(range) = cube.voxel_range(self) else {
            return Vec::new();
        };
        range
            .iter()
            .filter(|v| {
                if self.get(*v) != VoxelState::Occupied {
                    return false;
                }
                let s = [v[0] as i64, v[1] as i64, v[2] as i64];
                NEIGHBORS_6.iter().any(|d| {
                    let n = [s[0] + d[0], s[1] + d[1], s[2] + d[2]];
                    self.in_bounds(n) && self.get_or_unknown(n) != VoxelState::Occupied
                })
            })
            .map(|v| self.centroid(v))
            .collect()
    }

    fn is_frontier(&self, v: [usize; 3], connectivity: Connectivity) -> bool {
        if self.get(v) != VoxelState::Free {
            return false;
        }
        let s = [v[0] as i64, v[1] as i64, v[2] as i64];
        let touches_unknown =
            |d: [i64; 3]| self.get_or_unknown([s[0] + d[0], s[1] + d[1], s[2] + d[2]]) == VoxelState::Unknown;
        match connectivity {
            Connectivity::Six => NEIGHBORS_6.iter().any(|d| touches_unknown(*d)),
            Connectivity::TwentySix => neighbors_26().any(touches_unknown),
        }
    }

    /// Centroids of free voxels in the cube bordering unknown space; voxels
    /// outside the grid count as unknown.
    pub fn frontier_points(&self, cube: &UpdateCube, connectivity: Connectivity) -> Vec<Vec3> {
        let Some(range) = cube.voxel_range(self) else {
            return Vec::new();
        };
        range
            .iter()
            .filter(|v| self.is_frontier(*v, connectivity))
            .map(|v| self.centroid(v))
            .collect()
    }

    /// Voxels visited by the segment `from`-`to`, in traversal order.
    ///
    /// Steps one voxel boundary at a time along the parameterization of the
    /// segment, so the walk has exactly `|di| + |dj| + |dk| + 1` entries.
    /// Endpoints are put into a canonical order first which makes the set of
    /// traversed voxels symmetric.
    pub fn traverse(&self, from: &Vec3, to: &Vec3) -> Vec<[i64; 3]> {
        let (a, b) = if lexicographic_le(from, to) {
            (from, to)
        } else {
            (to, from)
        };
        let start = self.voxel_coords(a);
        let end = self.voxel_coords(b);
        let dir = b - a;
        let mut step = [0i64; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for ax in 0..3 {
            if end[ax] > start[ax] {
                step[ax] = 1;
            } else if end[ax] < start[ax] {
                step[ax] = -1;
            }
            if step[ax] != 0 && dir[ax] != 0.0 {
                let boundary_index = if step[ax] > 0 { start[ax] + 1 } else { start[ax] };
                let boundary = self.origin[ax] + boundary_index as f64 * self.resolution;
                t_max[ax] = ((boundary - a[ax]) / dir[ax]).max(0.0);
                t_delta[ax] = (self.resolution / dir[ax]).abs();
            }
        }
        let total: i64 = (0..3).map(|ax| (end[ax] - start[ax]).abs()).sum();
        let mut out = Vec::with_capacity(total as usize + 1);
        let mut cur = start;
        let mut remaining = [
            (end[0] - start[0]).abs(),
            (end[1] - start[1]).abs(),
            (end[2] - start[2]).abs(),
        ];
        out.push(cur);
        for _ in 0..total {
            let mut axis = 3;
            let mut best = f64::INFINITY;
            for ax in 0..3 {
                if remaining[ax] > 0 && (axis == 3 || t_max[ax] < best) {
                    best = t_max[ax];
                    axis = ax;
                }
            }
            cur[axis] += step[axis];
            remaining[axis] -= 1;
            t_max[axis] += t_delta[axis];
            out.push(cur);
        }
        out
    }

    /// True iff every voxel traversed by the segment is free.
    pub fn raycast_free(&self, from: &Vec3, to: &Vec3) -> bool {
        self.traverse(from, to)
            .into_iter()
            .all(|v| self.get_or_unknown(v) == VoxelState::Free)
    }

    /// Coarse grid where each parent takes the highest-priority child state
    /// (occupied over free over unknown).
    pub fn downsample(&self, factor: usize) -> OccupancyGrid {
        assert!(factor >= 1, "downsample factor must be at least 1");
        if factor == 1 {
            return self.clone();
        }
        let dims = [
            self.dims[0].div_ceil(factor),
            self.dims[1].div_ceil(factor),
            self.dims[2].div_ceil(factor),
        ];
        let mut out = OccupancyGrid::new(
            self.resolution * factor as f64,
            self.origin,
            dims,
            VoxelState::Unknown,
        )
        .expect("coarse dims derive from valid dims");
        for v in self.full_range().iter() {
            let s = self.get(v);
            let p = [v[0] / factor, v[1] / factor, v[2] / factor];
            let idx = out.linear_index(p);
            if s.priority() > out.states[idx].priority() {
                out.states[idx] = s;
            }
        }
        out
    }

    /// Encodes the grid in the `VXG1` format.
    pub fn save(&self) -> Vec<u8> {
        io::encode(self)
    }

    pub fn load(bytes: &[u8]) -> Result<Self, GridParseError> {
        io::decode(bytes)
    }
}

fn lexicographic_le(a: &Vec3, b: &Vec3) -> bool {
    for ax in 0..3 {
        if a[ax] < b[ax] {
            return true;
        }
        if a[ax] > b[ax] {
            return false;
        }
    }
    true
}
