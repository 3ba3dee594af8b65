use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::geometry::{Ball, Vec3};

/// Box rotated about the vertical axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedBox {
    pub center: Vec3,
    /// Rotation about z, in `[-pi/2, pi/2)`.
    pub yaw: f64,
    pub half_extents: Vec3,
}

impl OrientedBox {
    /// Coordinates of `p` in the box frame.
    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        let d = p - self.center;
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        let l = self.to_local(p);
        (0..3).all(|a| l[a].abs() <= self.half_extents[a])
    }

    pub fn contains_ball(&self, b: &Ball) -> bool {
        let l = self.to_local(&b.center);
        (0..3).all(|a| l[a].abs() + b.radius <= self.half_extents[a])
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }
}

/// `(min_u, max_u, min_v, max_v)` of the discs projected on the rotated axes.
fn projected_bounds(balls: &[Ball], yaw: f64) -> [f64; 4] {
    let (s, c) = yaw.sin_cos();
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for ball in balls {
        let u = c * ball.center.x + s * ball.center.y;
        let v = -s * ball.center.x + c * ball.center.y;
        b[0] = b[0].min(u - ball.radius);
        b[1] = b[1].max(u + ball.radius);
        b[2] = b[2].min(v - ball.radius);
        b[3] = b[3].max(v + ball.radius);
    }
    b
}

fn area(balls: &[Ball], yaw: f64) -> f64 {
    let b = projected_bounds(balls, yaw);
    (b[1] - b[0]) * (b[3] - b[2])
}

const COARSE_STEPS: usize = 36;
const GOLDEN_ITERS: usize = 40;

/// Fits a yaw-rotated box around a set of spheres.
///
/// The yaw minimizes the area of the rectangle enclosing the projected
/// discs; it is found by a coarse scan refined with a golden-section search.
/// Rectangle area has period pi/2 in the yaw, so only `[-pi/4, pi/4)` is
/// searched and the result is rotated so that `hx >= hy`.
///
/// # Panics
///
/// Panics on an empty slice.
pub fn fit_box(balls: &[Ball]) -> OrientedBox {
    assert!(!balls.is_empty(), "cannot fit a box around nothing");
    let step = FRAC_PI_2 / COARSE_STEPS as f64;
    let mut best = (area(balls, 0.0), 0.0);
    for i in 0..COARSE_STEPS {
        let yaw = -FRAC_PI_4 + i as f64 * step;
        let a = area(balls, yaw);
        if a < best.0 {
            best = (a, yaw);
        }
    }
    let (mut lo, mut hi) = (best.1 - step, best.1 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = area(balls, x1);
    let mut f2 = area(balls, x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = area(balls, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = area(balls, x2);
        }
    }
    let refined = (lo + hi) / 2.0;
    let refined_area = area(balls, refined);
    // keep yaw 0 unless rotating is a real improvement
    let mut yaw = if refined_area < best.0 { refined } else { best.1 };
    let zero_area = area(balls, 0.0);
    if area(balls, yaw) >= zero_area * (1.0 - 1e-9) {
        yaw = 0.0;
    }

    let b = projected_bounds(balls, yaw);
    let (mut hx, mut hy) = ((b[1] - b[0]) / 2.0, (b[3] - b[2]) / 2.0);
    let (mu, mv) = ((b[0] + b[1]) / 2.0, (b[2] + b[3]) / 2.0);
    let (s, c) = yaw.sin_cos();
    let cx = c * mu - s * mv;
    let cy = s * mu + c * mv;
    if hx < hy {
        std::mem::swap(&mut hx, &mut hy);
        yaw += FRAC_PI_2;
    }
    if yaw >= FRAC_PI_2 {
        yaw -= PI;
    }
    if yaw < -FRAC_PI_2 {
        yaw += PI;
    }

    let zmin = balls.iter().map(|b| b.center.z - b.radius).fold(f64::INFINITY, f64::min);
    let zmax = balls.iter().map(|b| b.center.z + b.radius).fold(f64::NEG_INFINITY, f64::max);
    let hz = (zmax - zmin) / 2.0;
    // absorb rounding from the frame change so containment holds exactly
    let pad = 1e-9 * (1.0 + hx.max(hz));
    OrientedBox {
        center: Vec3::new(cx, cy, (zmin + zmax) / 2.0),
        yaw,
        half_extents: Vec3::new(hx + pad, hy + pad, hz + pad),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sphere_is_axis_aligned_cube() {
        let b = fit_box(&[Ball::new(Vec3::zeros(), 2.0)]);
        assert_eq!(b.yaw, 0.0);
        assert!((b.center).norm() < 1e-12);
        assert!((b.half_extents - Vec3::repeat(2.0)).norm() < 1e-6);
    }

    #[test]
    fn diagonal_pair() {
        let balls = [
            Ball::new(Vec3::zeros(), 1.0),
            Ball::new(Vec3::new(10.0, 10.0, 0.0), 1.0),
        ];
        let b = fit_box(&balls);
        assert!((b.yaw - FRAC_PI_4).abs() < 0.05, "yaw {}", b.yaw);
        assert!((b.half_extents.x - (5.0 * 2f64.sqrt() + 1.0)).abs() < 0.05);
        assert!((b.half_extents.y - 1.0).abs() < 0.05);
        assert!(balls.iter().all(|s| b.contains_ball(s)));
    }

    #[test]
    fn row_along_y_turns_to_canonical_yaw() {
        let balls: Vec<Ball> = (0..5).map(|i| Ball::new(Vec3::new(0.0, 2.0 * i as f64, 0.0), 1.0)).collect();
        let b = fit_box(&balls);
        assert!((b.yaw.abs() - FRAC_PI_2).abs() < 1e-9 || (b.yaw + FRAC_PI_2).abs() < 1e-9);
        assert!((b.half_extents.x - 5.0).abs() < 1e-6);
        assert!(balls.iter().all(|s| b.contains_ball(s)));
    }

    #[test]
    fn row_along_x() {
        let balls: Vec<Ball> = (0..4).map(|i| Ball::new(Vec3::new(3.0 * i as f64, 0.0, 1.0), 0.5)).collect();
        let b = fit_box(&balls);
        assert_eq!(b.yaw, 0.0);
        assert!((b.half_extents.x - 5.0).abs() < 1e-6);
        assert!((b.center - Vec3::new(4.5, 0.0, 1.0)).norm() < 1e-9);
    }
}
