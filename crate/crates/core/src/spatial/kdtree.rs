use crate::geometry::Vec3;

const LEAF_SIZE: usize = 8;
const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct KdNode {
    start: u32,
    end: u32,
    left: u32,
    right: u32,
    axis: u8,
    split: f64,
}

/// Static balanced k-D tree over obstacle and frontier points.
///
/// Rebuilt from scratch every update iteration. All queries are exact.
#[derive(Clone, Debug, Default)]
pub struct ObstacleIndex {
    points: Vec<Vec3>,
    nodes: Vec<KdNode>,
}

impl ObstacleIndex {
    /// Builds an index over the union of both point sets.
    pub fn build(obstacles: &[Vec3], frontiers: &[Vec3]) -> Self {
        let mut points = Vec::with_capacity(obstacles.len() + frontiers.len());
        points.extend_from_slice(obstacles);
        points.extend_from_slice(frontiers);
        Self::from_points(points)
    }

    pub fn from_points(mut points: Vec<Vec3>) -> Self {
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1);
        if !points.is_empty() {
            let n = points.len();
            build_recursive(&mut points, 0, n, &mut nodes);
        }
        Self { points, nodes }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Exact distance to the nearest indexed point, `+inf` when empty.
    pub fn nearest_distance(&self, q: &Vec3) -> f64 {
        self.nearest(q).map_or(f64::INFINITY, |(_, d)| d)
    }

    /// Nearest point and its distance.
    pub fn nearest(&self, q: &Vec3) -> Option<(Vec3, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best_d2 = f64::INFINITY;
        let mut best = usize::MAX;
        let mut stack: Vec<(u32, f64)> = Vec::with_capacity(64);
        stack.push((0, 0.0));
        while let Some((idx, bound)) = stack.pop() {
            if bound >= best_d2 {
                continue;
            }
            let node = self.nodes[idx as usize];
            if node.left == NONE {
                for i in node.start as usize..node.end as usize {
                    let d2 = (self.points[i] - q).norm_squared();
                    if d2 < best_d2 {
                        best_d2 = d2;
                        best = i;
                    }
                }
                continue;
            }
            let diff = q[node.axis as usize] - node.split;
            let (near, far) = if diff < 0.0 {
                (node.left, node.right)
            } else {
                (node.right, node.left)
            };
            stack.push((far, diff * diff));
            stack.push((near, bound));
        }
        Some((self.points[best], best_d2.sqrt()))
    }

    /// Points within distance `r` (inclusive) of `q`, unordered.
    pub fn within_radius(&self, q: &Vec3, r: f64) -> Vec<Vec3> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let r2 = r * r;
        let mut stack = vec![0u32];
        while let Some(idx) = stack.pop() {
            let node = self.nodes[idx as usize];
            if node.left == NONE {
                for p in &self.points[node.start as usize..node.end as usize] {
                    if (p - q).norm_squared() <= r2 {
                        out.push(*p);
                    }
                }
                continue;
            }
            let diff = q[node.axis as usize] - node.split;
            if diff - r <= 0.0 {
                stack.push(node.left);
            }
            if diff + r >= 0.0 {
                stack.push(node.right);
            }
        }
        out
    }

    pub fn count_within(&self, q: &Vec3, r: f64) -> usize {
        self.within_radius(q, r).len()
    }
}

fn build_recursive(points: &mut [Vec3], start: usize, end: usize, nodes: &mut Vec<KdNode>) -> u32 {
    let idx = nodes.len() as u32;
    nodes.push(KdNode {
        start: start as u32,
        end: end as u32,
        left: NONE,
        right: NONE,
        axis: 0,
        split: 0.0,
    });
    if end - start <= LEAF_SIZE {
        return idx;
    }
    let slice = &mut points[start..end];
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in slice.iter() {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let spread = hi - lo;
    let axis = spread.imax();
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    let split = slice[mid][axis];
    // Left holds coordinates <= split, right holds >= split; both sides are
    // searched when the query sits on the plane, so the invariant is loose.
    let left = build_recursive(points, start, start + mid, nodes);
    let right = build_recursive(points, start + mid, end, nodes);
    let node = &mut nodes[idx as usize];
    node.left = left;
    node.right = right;
    node.axis = axis as u8;
    node.split = split;
    idx
}
