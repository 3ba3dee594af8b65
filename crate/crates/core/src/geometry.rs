//! Sphere geometry shared by the map, the planners and the box fitter.

use std::f64::consts::PI;

pub type Vec3 = nalgebra::Vector3<f64>;

/// Rounds toward zero onto the nearest `f32`-representable value.
///
/// Node positions and radii live on the `f32` lattice so that snapshots
/// round-trip exactly. Rounding toward zero keeps radii conservative.
pub fn quantize(x: f64) -> f64 {
    let f = x as f32;
    let q = f as f64;
    if q.abs() > x.abs() {
        let toward_zero = if x > 0.0 { f.next_down() } else { f.next_up() };
        toward_zero as f64
    } else {
        q
    }
}

pub fn quantize_point(p: Vec3) -> Vec3 {
    Vec3::new(p.x as f32 as f64, p.y as f32 as f64, p.z as f32 as f64)
}

/// Radius of the circle in which the surfaces of two spheres intersect.
///
/// Disjoint or tangent spheres give 0, a sphere contained in the other gives
/// the smaller radius.
///
/// The result is bitwise symmetric in the two spheres.
pub fn intersection_radius(pa: &Vec3, ra: f64, pb: &Vec3, rb: f64) -> f64 {
    let (ra, rb) = if ra <= rb { (ra, rb) } else { (rb, ra) };
    let d = (pa - pb).norm();
    if d >= ra + rb {
        return 0.0;
    }
    if d <= (ra - rb).abs() {
        return ra.min(rb);
    }
    let t = d * d - rb * rb + ra * ra;
    let radicand = 4.0 * d * d * ra * ra - t * t;
    radicand.max(0.0).sqrt() / (2.0 * d)
}

pub fn sphere_volume(r: f64) -> f64 {
    4.0 / 3.0 * PI * r * r * r
}

/// Volume of the intersection of two balls with radii `r1`, `r2` and center
/// distance `d`.
pub fn lens_volume(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        return sphere_volume(r1.min(r2));
    }
    let (big, small) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    PI * (big + small - d).powi(2)
        * (d * d + 2.0 * d * small - 3.0 * small * small + 2.0 * d * big + 6.0 * small * big
            - 3.0 * big * big)
        / (12.0 * d)
}

/// Fraction of the ball `(p, r)` covered by the ball `(q, big_r)`.
pub fn covered_fraction(p: &Vec3, r: f64, q: &Vec3, big_r: f64) -> f64 {
    let d = (p - q).norm();
    if d + r <= big_r {
        return 1.0;
    }
    if d >= r + big_r {
        return 0.0;
    }
    (lens_volume(r, big_r, d) / sphere_volume(r)).min(1.0)
}

/// A ball given by center and radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec3,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec3, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        (self.center - other.center).norm() + other.radius <= self.radius
    }

    /// Smallest ball enclosing both `self` and `other`.
    pub fn union(&self, other: &Ball) -> Ball {
        if self.contains_ball(other) {
            return *self;
        }
        if other.contains_ball(self) {
            return *other;
        }
        let delta = other.center - self.center;
        let d = delta.norm();
        let radius = (d + self.radius + other.radius) / 2.0;
        // d > 0 here, otherwise one ball would contain the other
        let center = self.center + delta * ((radius - self.radius) / d);
        Ball { center, radius }
    }

    /// Enclosing ball seeded at the centroid of the member centers.
    ///
    /// Not minimal, but cheap, deterministic and always enclosing.
    pub fn enclosing<'a, I>(balls: I) -> Option<Ball>
    where
        I: IntoIterator<Item = &'a Ball>,
        I::IntoIter: Clone,
    {
        let iter = balls.into_iter();
        let mut sum = Vec3::zeros();
        let mut n = 0usize;
        for b in iter.clone() {
            sum += b.center;
            n += 1;
        }
        if n == 0 {
            return None;
        }
        let center = sum / n as f64;
        let radius = iter
            .map(|b| (b.center - center).norm() + b.radius)
            .fold(0.0, f64::max);
        Some(Ball { center, radius })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn intersection_radius_is_bitwise_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let pa = Vec3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let pb = Vec3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let (ra, rb) = (rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0));
            assert_eq!(intersection_radius(&pa, ra, &pb, rb).to_bits(), intersection_radius(&pb, rb, &pa, ra).to_bits());
        }
    }

    #[test]
    fn unit_spheres_at_unit_distance() {
        let r = intersection_radius(&Vec3::zeros(), 1.0, &Vec3::new(1.0, 0.0, 0.0), 1.0);
        assert!((r - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn intersection_circle_matches_sampled_boundary() {
        // Points on sphere A that are also (numerically) on sphere B lie on
        // the intersection circle; their distance from the center line is the
        // circle radius.
        let pa = Vec3::zeros();
        let pb = Vec3::new(1.0, 0.0, 0.0);
        let mut best = 0.0f64;
        let n = 20000;
        for i in 0..n {
            let theta = PI * i as f64 / n as f64;
            let p = Vec3::new(theta.cos(), theta.sin(), 0.0);
            if ((p - pb).norm() - 1.0).abs() < 1e-3 {
                best = best.max(p.y);
            }
        }
        assert!((best - 0.8660).abs() < 1e-3);
        let r = intersection_radius(&pa, 1.0, &pb, 1.0);
        assert!((r - best).abs() < 1e-3);
    }

    #[test]
    fn disjoint_and_contained() {
        let o = Vec3::zeros();
        assert_eq!(intersection_radius(&o, 1.0, &Vec3::new(2.0, 0.0, 0.0), 1.0), 0.0);
        assert_eq!(intersection_radius(&o, 1.0, &Vec3::new(5.0, 0.0, 0.0), 1.0), 0.0);
        assert_eq!(intersection_radius(&o, 3.0, &Vec3::new(0.5, 0.0, 0.0), 1.0), 1.0);
    }

    #[test]
    fn lens_volume_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (r, big_r, d) = (1.0, 1.5, 1.2);
        let q = Vec3::new(d, 0.0, 0.0);
        let n = 400_000;
        let mut inside = 0usize;
        let mut total = 0usize;
        while total < n {
            let p = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if p.norm() > r {
                continue;
            }
            total += 1;
            if (p - q).norm() <= big_r {
                inside += 1;
            }
        }
        let mc = inside as f64 / total as f64;
        let exact = covered_fraction(&Vec3::zeros(), r, &q, big_r);
        assert!((mc - exact).abs() < 5e-3, "mc {mc} exact {exact}");
    }

    #[test]
    fn quantize_rounds_toward_zero() {
        for x in [0.1f64, 1.0 / 3.0, 2.718281828, 123.456789] {
            let q = quantize(x);
            assert!(q <= x);
            assert_eq!(q as f32 as f64, q);
        }
    }

    #[test]
    fn union_encloses_both() {
        let a = Ball::new(Vec3::zeros(), 1.0);
        let b = Ball::new(Vec3::new(4.0, 0.0, 0.0), 2.0);
        let u = a.union(&b);
        assert!((u.radius - 3.5).abs() < 1e-12);
        assert!(u.contains_ball(&Ball::new(a.center, a.radius - 1e-9)));
        assert!(u.contains_ball(&Ball::new(b.center, b.radius - 1e-9)));
    }
}
