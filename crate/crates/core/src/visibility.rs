//! Camera field-of-view planes and the visibility Jacobian.
//!
//! Each plane passes through the camera centre with a unit normal pointing
//! into the viewing pyramid, so a point is in view iff all four signed
//! distances are non-negative.

use nalgebra::{Isometry3, SMatrix, Vector3, Vector4};

use crate::kinematics::{
    attached_point_jacobian, attached_vector_jacobian, chain_poses, Configuration, RobotModel, DOF,
};

pub type VisibilityJacobian = SMatrix<f64, 4, DOF>;

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
pub const TOP: usize = 2;
pub const BOTTOM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FovPlanes {
    /// Inward normals: left, right, top, bottom.
    pub normals: [Vector3<f64>; 4],
    pub apex: Vector3<f64>,
}

/// Normals in the camera frame (`+z` optical axis, `+x` right, `+y` down).
fn local_normals(fov_deg: (f64, f64)) -> [Vector3<f64>; 4] {
    let (sh, ch) = libm::sincos(fov_deg.0.to_radians() / 2.0);
    let (sv, cv) = libm::sincos(fov_deg.1.to_radians() / 2.0);
    [
        Vector3::new(ch, 0.0, sh),
        Vector3::new(-ch, 0.0, sh),
        Vector3::new(0.0, cv, sv),
        Vector3::new(0.0, -cv, sv),
    ]
}

pub fn fov_planes(camera: &Isometry3<f64>, fov_deg: (f64, f64)) -> FovPlanes {
    let normals = local_normals(fov_deg).map(|n| camera.rotation * n);
    FovPlanes { normals, apex: camera.translation.vector }
}

pub fn plane_distances(planes: &FovPlanes, point: &Vector3<f64>) -> Vector4<f64> {
    let rel = point - planes.apex;
    Vector4::from_fn(|i, _| planes.normals[i].dot(&rel))
}

/// Plane distances and their derivative with respect to `q` for a point
/// fixed in the world.
pub fn visibility_jacobian(
    model: &RobotModel,
    q: &Configuration,
    point: &Vector3<f64>,
    fov_deg: (f64, f64),
) -> (Vector4<f64>, VisibilityJacobian) {
    let poses = chain_poses(model, q);
    let planes = fov_planes(&poses.camera, fov_deg);
    let rel = point - planes.apex;
    let jp = attached_point_jacobian(&poses, &planes.apex);
    let mut jac = VisibilityJacobian::zeros();
    for (i, n) in planes.normals.iter().enumerate() {
        let jn = attached_vector_jacobian(&poses, n);
        // d/dq [n . (p_f - p_c)] = (dn/dq) . (p_f - p_c) - n . dp_c/dq
        jac.set_row(i, &(rel.transpose() * jn - n.transpose() * jp));
    }
    (plane_distances(&planes, point), jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::UnitQuaternion;

    fn looking_along_x() -> Isometry3<f64> {
        // camera z -> world x, camera x -> world -y, camera y -> world -z
        let r = nalgebra::Rotation3::from_basis_unchecked(&[-Vector3::y(), -Vector3::z(), Vector3::x()]);
        Isometry3::from_parts(Vector3::new(1.0, 2.0, 0.5).into(), UnitQuaternion::from_rotation_matrix(&r))
    }

    #[test]
    fn horizontal_normals_at_53_degrees() {
        let cam = looking_along_x();
        let planes = fov_planes(&cam, (74.0, 60.0));
        for i in [LEFT, RIGHT] {
            let n = planes.normals[i];
            assert!(n.z.abs() < 1e-12);
            assert!((libm::acos(n.x).to_degrees() - 53.0).abs() < 1e-9);
        }
        assert!((planes.normals[LEFT].y + planes.normals[RIGHT].y).abs() < 1e-12);
        // left plane normal points right (towards world -y)
        assert!(planes.normals[LEFT].y < 0.0);
        assert!(planes.normals.iter().all(|n| (n.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn distances() {
        let cam = looking_along_x();
        let planes = fov_planes(&cam, (74.0, 60.0));
        let apex = planes.apex;
        assert_eq!(plane_distances(&planes, &apex), Vector4::zeros());
        let d = plane_distances(&planes, &(apex + Vector3::x() * 2.5));
        let h = 2.5 * libm::sin(37f64.to_radians());
        assert!((d[LEFT] - h).abs() < 1e-12 && (d[RIGHT] - h).abs() < 1e-12);
        assert!((h - 1.504).abs() < 1e-3);
        let behind = plane_distances(&planes, &(apex - Vector3::x()));
        assert!(behind.iter().all(|&v| v < 0.0));
        // a point on the left boundary of the image (camera -x side = world +y)
        let edge = apex + Vector3::new(libm::cos(0.6457718232379019), libm::sin(0.6457718232379019), 0.0);
        assert!(plane_distances(&planes, &edge)[LEFT].abs() < 1e-12);
    }

    #[test]
    fn threshold_ratio() {
        let dr = 2.5 * libm::sin(37f64.to_radians());
        let ratio = 0.75 / dr;
        assert!((0.49..=0.52).contains(&ratio));
    }
}
