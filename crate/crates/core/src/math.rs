//! Small numeric helpers shared across modules.

use core::f64::consts::PI;
use nalgebra::Vector3;

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = libm::remainder(a, 2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    libm::atan2(a.cross(b).norm(), a.dot(b))
}

/// Rotate `v` about the unit axis `k` by `angle` (Rodrigues).
pub fn rotate_about(v: &Vector3<f64>, k: &Vector3<f64>, angle: f64) -> Vector3<f64> {
    let (s, c) = libm::sincos(angle);
    v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c))
}

/// Camera image axes `(right, down)` for an optical axis, keeping image
/// right horizontal. `None` when the axis is (anti)parallel to world z.
pub fn image_axes(l: &Vector3<f64>) -> Option<(Vector3<f64>, Vector3<f64>)> {
    let right = l.cross(&Vector3::z());
    let n = right.norm();
    if n < 1e-9 {
        return None;
    }
    let right = right / n;
    let down = l.cross(&right);
    Some((right, down))
}

/// Linearly spaced fractions in `[-1, 1]`, endpoints included; a single
/// sample sits at 0.
pub fn grid_fraction(i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        -1.0 + 2.0 * i as f64 / (n - 1) as f64
    }
}

/// Ray directions of a pinhole grid spanning the full field of view, row-major
/// (rows top to bottom, columns left to right).
pub fn pinhole_rays(
    l: &Vector3<f64>,
    right: &Vector3<f64>,
    down: &Vector3<f64>,
    fov_deg: (f64, f64),
    grid: (usize, usize),
) -> alloc::vec::Vec<Vector3<f64>> {
    let th = libm::tan(fov_deg.0.to_radians() / 2.0);
    let tv = libm::tan(fov_deg.1.to_radians() / 2.0);
    let (w, h) = grid;
    let mut out = alloc::vec::Vec::with_capacity(w * h);
    for row in 0..h {
        let y = tv * grid_fraction(row, h);
        for col in 0..w {
            let x = th * grid_fraction(col, w);
            out.push((l + right * x + down * y).normalize());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
        assert!((wrap_angle(0.3) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn pinhole_corners_and_center() {
        let l = Vector3::x();
        let (r, d) = image_axes(&l).unwrap();
        let rays = pinhole_rays(&l, &r, &d, (90.0, 90.0), (3, 3));
        assert!((rays[4] - l).norm() < 1e-15);
        let corner = angle_between(&rays[0], &l);
        assert!((corner - libm::atan(2f64.sqrt())).abs() < 1e-12);
        assert_eq!(pinhole_rays(&l, &r, &d, (90.0, 90.0), (1, 1))[0], l);
    }
}
