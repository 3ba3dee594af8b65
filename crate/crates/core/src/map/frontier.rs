use std::collections::BTreeMap;

use crate::geometry::Vec3;
use crate::voxel::UpdateCube;

const CHUNK: f64 = 10.0;

type Chunk = [i64; 3];

/// Frontier points seen by the most recent iteration covering each place.
///
/// Every iteration replaces the points inside its cube, so the registry
/// always reflects the latest extraction there.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrontierRegistry {
    chunks: BTreeMap<Chunk, Vec<Vec3>>,
    len: usize,
}

fn chunk_of(p: &Vec3) -> Chunk {
    [
        (p.x / CHUNK).floor() as i64,
        (p.y / CHUNK).floor() as i64,
        (p.z / CHUNK).floor() as i64,
    ]
}

impl FrontierRegistry {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Drops the points inside `cube` and stores `points` (which should all
    /// lie inside it).
    pub fn replace(&mut self, cube: &UpdateCube, points: &[Vec3]) {
        let h = cube.half();
        let lo = chunk_of(&(cube.center - Vec3::repeat(h)));
        let hi = chunk_of(&(cube.center + Vec3::repeat(h)));
        let keys: Vec<Chunk> = self
            .chunks
            .range(lo..=hi)
            .map(|(k, _)| *k)
            .filter(|k| (0..3).all(|a| k[a] >= lo[a] && k[a] <= hi[a]))
            .collect();
        for k in keys {
            let bucket = self.chunks.get_mut(&k).expect("key listed above");
            let before = bucket.len();
            bucket.retain(|p| !cube.contains(p));
            self.len -= before - bucket.len();
            if bucket.is_empty() {
                self.chunks.remove(&k);
            }
        }
        for p in points {
            self.chunks.entry(chunk_of(p)).or_default().push(*p);
            self.len += 1;
        }
    }

    pub fn count_within(&self, q: &Vec3, r: f64) -> usize {
        let mut n = 0;
        self.for_each_within(q, r, |_| n += 1);
        n
    }

    pub fn for_each_within<F: FnMut(&Vec3)>(&self, q: &Vec3, r: f64, mut f: F) {
        let lo = chunk_of(&(q - Vec3::repeat(r)));
        let hi = chunk_of(&(q + Vec3::repeat(r)));
        for (k, pts) in self.chunks.range(lo..=hi) {
            if (0..3).any(|a| k[a] < lo[a] || k[a] > hi[a]) {
                continue;
            }
            for p in pts {
                if (p - q).norm() <= r {
                    f(p);
                }
            }
        }
    }

    /// All points, in chunk order.
    pub fn points(&self) -> impl Iterator<Item = &Vec3> + '_ {
        self.chunks.values().flatten()
    }
}
