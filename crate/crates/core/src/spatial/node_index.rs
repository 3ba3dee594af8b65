use rustc_hash::FxHashMap as HashMap;

use thiserror::Error;

use crate::geometry::Vec3;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("id {0} is not in the index")]
pub struct NotFound(pub u32);

type Cell = [i64; 3];

/// Dynamic point index over sphere centers: a bucketed uniform spatial hash
/// with exact post-filtering.
///
/// Query results are sorted by distance with ties broken by lower id.
#[derive(Clone, Debug)]
pub struct NodeIndex {
    cell_size: f64,
    cells: HashMap<Cell, Vec<(u32, Vec3)>>,
    entries: HashMap<u32, Vec3>,
}

impl NodeIndex {
    pub fn new(cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        Self {
            cell_size,
            cells: HashMap::default(),
            entries: HashMap::default(),
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn position(&self, id: u32) -> Option<Vec3> {
        self.entries.get(&id).copied()
    }

    fn cell_of(&self, p: &Vec3) -> Cell {
        [
            (p.x / self.cell_size).floor() as i64,
            (p.y / self.cell_size).floor() as i64,
            (p.z / self.cell_size).floor() as i64,
        ]
    }

    /// Inserts or moves `id` to `p`.
    pub fn insert(&mut self, id: u32, p: Vec3) {
        if self.entries.contains_key(&id) {
            self.remove(id).expect("checked above");
        }
        let cell = self.cell_of(&p);
        self.cells.entry(cell).or_default().push((id, p));
        self.entries.insert(id, p);
    }

    pub fn remove(&mut self, id: u32) -> Result<(), NotFound> {
        let p = self.entries.remove(&id).ok_or(NotFound(id))?;
        let cell = self.cell_of(&p);
        if let Some(bucket) = self.cells.get_mut(&cell) {
            if let Some(pos) = bucket.iter().position(|x| x.0 == id) {
                bucket.swap_remove(pos);
            }
            if bucket.is_empty() {
                self.cells.remove(&cell);
            }
        }
        Ok(())
    }

    /// Calls `f(id, position)` for every entry within `r` of `q`, unordered.
    pub fn for_each_within<F: FnMut(u32, &Vec3)>(&self, q: &Vec3, r: f64, mut f: F) {
        if self.entries.is_empty() || r < 0.0 {
            return;
        }
        let lo = self.cell_of(&(q - Vec3::repeat(r)));
        let hi = self.cell_of(&(q + Vec3::repeat(r)));
        let span: i64 = (0..3).map(|a| hi[a] - lo[a] + 1).product();
        let r2 = r * r;
        if span as usize > self.cells.len() {
            // sparse index: scanning buckets beats probing empty cells
            for (cell, ids) in &self.cells {
                if (0..3).any(|a| cell[a] < lo[a] || cell[a] > hi[a]) {
                    continue;
                }
                for (id, p) in ids {
                    if (p - q).norm_squared() <= r2 {
                        f(*id, p);
                    }
                }
            }
            return;
        }
        for cz in lo[2]..=hi[2] {
            for cy in lo[1]..=hi[1] {
                for cx in lo[0]..=hi[0] {
                    if let Some(ids) = self.cells.get(&[cx, cy, cz]) {
                        for (id, p) in ids {
                            if (p - q).norm_squared() <= r2 {
                                f(*id, p);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Ids within distance `r` (inclusive), sorted by (distance, id).
    pub fn within_radius(&self, q: &Vec3, r: f64) -> Vec<u32> {
        let mut found: Vec<(f64, u32)> = Vec::new();
        self.for_each_within(q, r, |id, p| found.push(((p - q).norm(), id)));
        sort_hits(&mut found);
        found.into_iter().map(|(_, id)| id).collect()
    }

    /// The `k` nearest ids, sorted by (distance, id).
    pub fn nearest_k(&self, q: &Vec3, k: usize) -> Vec<u32> {
        if k == 0 || self.entries.is_empty() {
            return Vec::new();
        }
        let center = self.cell_of(q);
        let mut found: Vec<(f64, u32)> = Vec::new();
        let mut seen = 0usize;
        let mut ring: i64 = 0;
        loop {
            for cz in center[2] - ring..=center[2] + ring {
                for cy in center[1] - ring..=center[1] + ring {
                    for cx in center[0] - ring..=center[0] + ring {
                        let cheb = (cx - center[0])
                            .abs()
                            .max((cy - center[1]).abs())
                            .max((cz - center[2]).abs());
                        if cheb != ring {
                            continue;
                        }
                        if let Some(ids) = self.cells.get(&[cx, cy, cz]) {
                            for (id, p) in ids {
                                found.push(((p - q).norm(), *id));
                                seen += 1;
                            }
                        }
                    }
                }
            }
            if seen == self.entries.len() {
                break;
            }
            if found.len() >= k {
                sort_hits(&mut found);
                // anything in ring + 1 is at least `ring * cell_size` away
                if found[k - 1].0 <= ring as f64 * self.cell_size {
                    break;
                }
            }
            ring += 1;
        }
        sort_hits(&mut found);
        found.truncate(k);
        found.into_iter().map(|(_, id)| id).collect()
    }
}

fn sort_hits(hits: &mut [(f64, u32)]) {
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
}
