use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{NodeId, SphereMap};
use crate::geometry::{quantize, quantize_point, Vec3};
use crate::spatial::ObstacleIndex;
use crate::voxel::{OccupancyGrid, UpdateCube, VoxelState};

/// Counts of what one iteration changed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChangeSummary {
    pub nodes_added: usize,
    pub nodes_removed: usize,
    pub radii_changed: usize,
    pub edges_added: usize,
    pub edges_removed: usize,
    pub segments_created: usize,
    pub segments_removed: usize,
    pub segments_split: usize,
    pub segments_merged: usize,
    pub paths_cached: usize,
}

impl ChangeSummary {
    /// True when the sphere graph itself did not change.
    pub fn is_quiet(&self) -> bool {
        self.nodes_added == 0
            && self.nodes_removed == 0
            && self.radii_changed == 0
            && self.edges_added == 0
            && self.edges_removed == 0
    }

    fn absorb(&mut self, o: &ChangeSummary) {
        self.nodes_added += o.nodes_added;
        self.nodes_removed += o.nodes_removed;
        self.radii_changed += o.radii_changed;
        self.edges_added += o.edges_added;
        self.edges_removed += o.edges_removed;
        self.segments_created += o.segments_created;
        self.segments_removed += o.segments_removed;
        self.segments_split += o.segments_split;
        self.segments_merged += o.segments_merged;
        self.paths_cached += o.paths_cached;
    }
}

/// Wall-clock time of each step of an iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepTimings {
    pub extraction: Duration,
    pub index_build: Duration,
    pub prune: Duration,
    pub expand: Duration,
    pub segmentation: Duration,
    pub total: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationReport {
    pub iteration: u64,
    pub uav: Vec3,
    pub timings: StepTimings,
    pub obstacle_points: usize,
    pub frontier_points: usize,
    pub candidates: usize,
    pub changes: ChangeSummary,
    pub nodes: usize,
    pub edges: usize,
    pub segments: usize,
}

impl IterationReport {
    /// The report with all timings zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: StepTimings::default(),
            ..self.clone()
        }
    }
}

impl SphereMap {
    /// Runs one update iteration in the cube centered on `uav`: obstacle and
    /// frontier extraction, radius update and pruning, expansion, and
    /// segmentation.
    ///
    /// A cube that misses the grid leaves the map untouched.
    pub fn update_iteration(&mut self, grid: &OccupancyGrid, uav: &Vec3) -> IterationReport {
        self.update_with_phase(grid, uav, self.iteration)
    }

    /// `phase` picks the offset of the voxel sampling lattice.
    pub(super) fn update_with_phase(&mut self, grid: &OccupancyGrid, uav: &Vec3, phase: u64) -> IterationReport {
        let start = Instant::now();
        let cube = UpdateCube::new(*uav, self.params.cube_side);
        let mut report = IterationReport {
            iteration: self.iteration,
            uav: *uav,
            timings: StepTimings::default(),
            obstacle_points: 0,
            frontier_points: 0,
            candidates: 0,
            changes: ChangeSummary::default(),
            nodes: self.graph.len(),
            edges: self.graph.edge_count(),
            segments: self.segments.len(),
        };
        let Some(_) = cube.voxel_range(grid) else {
            self.iteration += 1;
            report.timings.total = start.elapsed();
            return report;
        };

        let t = Instant::now();
        let region = cube.inflated(self.params.max_radius);
        let obstacles = grid.surface_obstacle_points(&region);
        let frontiers = grid.frontier_points(&region, self.params.frontier_connectivity);
        let inside: Vec<Vec3> = frontiers.iter().filter(|p| cube.contains(p)).copied().collect();
        self.frontiers.replace(&cube, &inside);
        report.obstacle_points = obstacles.len();
        report.frontier_points = inside.len();
        report.timings.extraction = t.elapsed();

        let t = Instant::now();
        let index = ObstacleIndex::build(&obstacles, &frontiers);
        report.timings.index_build = t.elapsed();

        let t = Instant::now();
        let c = self.recompute_and_prune(&index, &cube);
        report.changes.absorb(&c);
        report.timings.prune = t.elapsed();

        let t = Instant::now();
        let (c, candidates) = self.expand(&index, grid, &cube, phase);
        report.changes.absorb(&c);
        report.candidates = candidates;
        report.timings.expand = t.elapsed();

        let t = Instant::now();
        let c = self.segment_update(grid, &cube);
        report.changes.absorb(&c);
        report.timings.segmentation = t.elapsed();

        self.last_cube = Some(cube);
        self.iteration += 1;
        report.nodes = self.graph.len();
        report.edges = self.graph.edge_count();
        report.segments = self.segments.len();
        report.timings.total = start.elapsed();
        report
    }

    /// Clearance-derived radius at `p`, capped and rounded down to `f32`.
    fn radius_at(&self, index: &ObstacleIndex, p: &Vec3) -> f64 {
        quantize(index.nearest_distance(p).min(self.params.max_radius))
    }

    /// Recomputes the radius of every node in the cube, drops nodes that
    /// became too small, refreshes edges of the others and finally prunes
    /// redundant nodes from the smallest up.
    pub(super) fn recompute_and_prune(&mut self, index: &ObstacleIndex, cube: &UpdateCube) -> ChangeSummary {
        let mut s = ChangeSummary::default();
        let ids = self.graph.nodes_in_cube(cube);
        let mut changed = Vec::new();
        for id in &ids {
            let node = self.graph.get(*id);
            let r = self.radius_at(index, &node.position);
            if r < self.params.r_min {
                self.remove_node(*id);
                s.nodes_removed += 1;
            } else if (r - node.radius).abs() > self.params.radius_tolerance {
                self.graph.set_radius(*id, r);
                self.mark_node_segment(*id);
                changed.push(*id);
                s.radii_changed += 1;
            }
        }
        for id in changed {
            let delta = self.graph.reconnect(id);
            s.edges_added += delta.added.len();
            s.edges_removed += delta.removed.len();
            for n in delta.added.iter().chain(&delta.removed) {
                self.mark_node_segment(*n);
            }
        }

        let mut order: Vec<(f64, NodeId)> = ids
            .iter()
            .filter_map(|id| self.graph.node(*id).map(|n| (n.radius, *id)))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, id) in order {
            if self.graph.is_redundant(id, self.params.redundancy_coverage) {
                self.remove_node(id);
                s.nodes_removed += 1;
            }
        }
        s
    }

    /// A sphere that overlaps existing ones without meeting the edge rule
    /// with any of them would stay an isolated island.
    fn dangling(&self, p: &Vec3, r: f64) -> bool {
        let overlapping = self.graph.overlapping(p, r);
        !overlapping.is_empty()
            && overlapping.iter().all(|id| {
                let n = self.graph.get(*id);
                crate::geometry::intersection_radius(p, r, &n.position, n.radius) <= self.params.r_min
            })
    }

    /// Candidate sphere centers: a lattice of free-voxel centroids and
    /// samples along random rays from the cube center.
    fn candidates(&self, grid: &OccupancyGrid, cube: &UpdateCube, phase: u64) -> Vec<Vec3> {
        let mut out = Vec::new();
        let uav = cube.center;
        if grid.state_at(&uav) == Some(VoxelState::Free) {
            out.push(uav);
        }
        if self.params.sample_voxels {
            if let Some(range) = cube.voxel_range(grid) {
                let s = self.params.voxel_stride;
                let o = (phase % (s * s * s) as u64) as usize;
                let offset = [o % s, (o / s) % s, o / (s * s)];
                for v in range.iter() {
                    if (0..3).all(|a| v[a] % s == offset[a]) && grid.get(v) == VoxelState::Free {
                        out.push(grid.centroid(v));
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed ^ self.iteration.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let len = cube.half();
        for _ in 0..self.params.ray_count {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let rho = (1.0 - z * z).sqrt();
            let dir = Vec3::new(rho * phi.cos(), rho * phi.sin(), z);
            let n = self.params.samples_per_ray.max(1);
            for k in 1..=n {
                let p = uav + dir * (len * k as f64 / n as f64);
                if !cube.contains(&p) || grid.state_at(&p) != Some(VoxelState::Free) {
                    break;
                }
                out.push(p);
            }
        }
        out
    }

    /// Inserts non-redundant candidate spheres, largest first, and prunes
    /// whatever each insertion made redundant. Returns the summary and the
    /// number of candidates considered.
    pub(super) fn expand(
        &mut self,
        index: &ObstacleIndex,
        grid: &OccupancyGrid,
        cube: &UpdateCube,
        phase: u64,
    ) -> (ChangeSummary, usize) {
        let mut s = ChangeSummary::default();
        let core = self.params.insertion_core;
        let raw = self.candidates(grid, cube, phase);
        let total = raw.len();
        let mut hint = None;
        let mut scored: Vec<(f64, usize, Vec3)> = raw
            .into_iter()
            .map(quantize_point)
            .filter(|p| match self.graph.core_containing(p, core, hint) {
                Some(h) => {
                    hint = Some(h);
                    false
                }
                None => true,
            })
            .enumerate()
            .filter_map(|(i, p)| {
                let r = self.radius_at(index, &p);
                (r >= self.params.r_min).then_some((r, i, p))
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

        let kappa = self.params.redundancy_coverage;
        for (r, _, p) in scored {
            if self.graph.in_core(&p, core) || self.graph.ball_is_redundant(&p, r, None, kappa) || self.dangling(&p, r) {
                continue;
            }
            let id = self.graph.insert(p, r);
            s.nodes_added += 1;
            let nbrs = self.graph.neighbors(id).to_vec();
            s.edges_added += nbrs.len();
            for n in &nbrs {
                self.mark_node_segment(*n);
            }
            for other in self.graph.overlapping(&p, r) {
                if other == id || self.graph.get(other).radius >= r {
                    continue;
                }
                if self.graph.is_redundant(other, kappa) {
                    s.edges_removed += self.graph.neighbors(other).len();
                    self.remove_node(other);
                    s.nodes_removed += 1;
                }
            }
        }
        (s, total)
    }
}
