//! Kinematic model of the holonomic-base mobile manipulator.
//!
//! The configuration is `q = [x, y, theta, q1..q5]`: a planar base pose
//! followed by five revolute arm joints. The camera is rigidly attached to
//! the last link; its optical axis is the local `+z` axis of the camera
//! frame, image right is `+x` and image down is `+y`.

use nalgebra::{Isometry3, Matrix3, SMatrix, SVector, Translation3, Unit, UnitQuaternion, Vector3};

use crate::math::wrap_angle;

/// Total number of generalized coordinates.
pub const DOF: usize = 8;
/// Base coordinates `(x, y, theta)`.
pub const BASE_DOF: usize = 3;
/// Revolute arm joints.
pub const ARM_DOF: usize = 5;

pub type Vec8 = SVector<f64, DOF>;
pub type Jacobian3 = SMatrix<f64, 3, DOF>;

/// One revolute joint: a fixed transform from the parent frame followed by a
/// rotation about `axis` (expressed in the joint frame).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointSpec {
    pub origin: Isometry3<f64>,
    pub axis: Unit<Vector3<f64>>,
}

impl JointSpec {
    pub fn new(xyz: [f64; 3], rpy: [f64; 3], axis: [f64; 3]) -> Self {
        JointSpec {
            origin: Isometry3::from_parts(
                Translation3::new(xyz[0], xyz[1], xyz[2]),
                UnitQuaternion::from_euler_angles(rpy[0], rpy[1], rpy[2]),
            ),
            axis: Unit::new_normalize(Vector3::new(axis[0], axis[1], axis[2])),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RobotModel {
    /// Radius of the circle enclosing the base footprint, m.
    pub base_footprint_radius: f64,
    pub arm: [JointSpec; ARM_DOF],
    /// Fixed transform from the last link to the camera frame.
    pub camera_offset: Isometry3<f64>,
    /// Per-coordinate velocity bound (m/s for x, y; rad/s otherwise).
    pub qdot_lim: [f64; DOF],
    pub q_lower: [f64; ARM_DOF],
    pub q_upper: [f64; ARM_DOF],
    /// Preferred arm posture; puts the camera near view height looking
    /// horizontally forward.
    pub ready: [f64; ARM_DOF],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    JointLimits { joint: usize },
    VelocityLimit { coordinate: usize },
    FootprintRadius,
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::JointLimits { joint } => {
                write!(f, "joint {joint}: limits must satisfy -pi < lower < upper < pi")
            }
            ModelError::VelocityLimit { coordinate } => {
                write!(f, "velocity limit of coordinate {coordinate} must be positive")
            }
            ModelError::FootprintRadius => write!(f, "base footprint radius must be positive"),
        }
    }
}

impl RobotModel {
    /// youBot-like default: a yaw joint, three pitch joints and a roll joint
    /// about the tool axis, with the camera 0.1 m past the last joint.
    pub fn youbot_like() -> Self {
        use core::f64::consts::FRAC_PI_2;
        RobotModel {
            base_footprint_radius: 0.25,
            arm: [
                JointSpec::new([0.16, 0.0, 0.12], [0.0; 3], [0.0, 0.0, 1.0]),
                JointSpec::new([0.033, 0.0, 0.147], [0.0; 3], [0.0, 1.0, 0.0]),
                JointSpec::new([0.0, 0.0, 0.155], [0.0; 3], [0.0, 1.0, 0.0]),
                JointSpec::new([0.0, 0.0, 0.135], [0.0; 3], [0.0, 1.0, 0.0]),
                JointSpec::new([0.0, 0.0, 0.11], [0.0; 3], [0.0, 0.0, 1.0]),
            ],
            camera_offset: Isometry3::from_parts(
                Translation3::new(0.0, 0.0, 0.1),
                UnitQuaternion::from_euler_angles(0.0, 0.0, -FRAC_PI_2),
            ),
            qdot_lim: [0.5, 0.5, 0.8, 1.0, 1.0, 1.0, 1.0, 1.0],
            q_lower: [-2.9, -1.1, -2.6, -1.9, -2.9],
            q_upper: [2.9, 1.5, 2.5, 1.9, 2.9],
            ready: [0.0, 0.6, 0.552, 0.419, 0.0],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        use core::f64::consts::PI;
        if !(self.base_footprint_radius > 0.0) {
            return Err(ModelError::FootprintRadius);
        }
        for (i, v) in self.qdot_lim.iter().enumerate() {
            if !(*v > 0.0) {
                return Err(ModelError::VelocityLimit { coordinate: i });
            }
        }
        for j in 0..ARM_DOF {
            let (l, u) = (self.q_lower[j], self.q_upper[j]);
            if !(l > -PI && u < PI && l < u) {
                return Err(ModelError::JointLimits { joint: j });
            }
        }
        Ok(())
    }

    pub fn ready_arm(&self) -> [f64; ARM_DOF] {
        self.ready
    }
}

/// Generalized coordinates: planar base pose and arm joint angles.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Configuration {
    pub base: [f64; BASE_DOF],
    pub arm: [f64; ARM_DOF],
}

impl Configuration {
    pub fn new(base: [f64; BASE_DOF], arm: [f64; ARM_DOF]) -> Self {
        Configuration { base, arm }
    }

    pub fn zero() -> Self {
        Configuration { base: [0.0; BASE_DOF], arm: [0.0; ARM_DOF] }
    }

    pub fn to_vector(&self) -> Vec8 {
        let mut v = Vec8::zeros();
        v.as_mut_slice()[..BASE_DOF].copy_from_slice(&self.base);
        v.as_mut_slice()[BASE_DOF..].copy_from_slice(&self.arm);
        v
    }

    pub fn from_vector(v: &Vec8) -> Self {
        let s = v.as_slice();
        let mut c = Configuration::zero();
        c.base.copy_from_slice(&s[..BASE_DOF]);
        c.arm.copy_from_slice(&s[BASE_DOF..]);
        c
    }

    pub fn base_position(&self) -> Vector3<f64> {
        Vector3::new(self.base[0], self.base[1], 0.0)
    }
}

/// Camera position and unit optical-axis direction, world frame.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TaskVector {
    pub p: Vector3<f64>,
    pub l: Vector3<f64>,
}

impl TaskVector {
    pub fn new(p: Vector3<f64>, l: Vector3<f64>) -> Self {
        TaskVector { p, l: l.normalize() }
    }

    pub fn to_vector(&self) -> SVector<f64, 6> {
        SVector::<f64, 6>::new(self.p.x, self.p.y, self.p.z, self.l.x, self.l.y, self.l.z)
    }

    /// Angle between the two optical axes, rad.
    pub fn angle_to(&self, other: &TaskVector) -> f64 {
        crate::math::angle_between(&self.l, &other.l)
    }
}

/// World-frame pose of every joint plus the camera, reused by the
/// Jacobian routines.
#[derive(Clone, Debug)]
pub struct ChainPoses {
    pub base: Isometry3<f64>,
    /// World-frame joint axes.
    pub axes: [Vector3<f64>; ARM_DOF],
    /// World-frame joint origins.
    pub origins: [Vector3<f64>; ARM_DOF],
    pub camera: Isometry3<f64>,
}

impl ChainPoses {
    pub fn camera_position(&self) -> Vector3<f64> {
        self.camera.translation.vector
    }

    pub fn camera_rotation(&self) -> Matrix3<f64> {
        self.camera.rotation.to_rotation_matrix().into_inner()
    }

    /// Rotation axis (world frame) and a point on it for every coordinate
    /// that rotates the camera; `None` for the prismatic base coordinates.
    fn revolute(&self, coordinate: usize) -> Option<(Vector3<f64>, Vector3<f64>)> {
        match coordinate {
            0 | 1 => None,
            2 => Some((Vector3::z(), self.base.translation.vector)),
            j => Some((self.axes[j - BASE_DOF], self.origins[j - BASE_DOF])),
        }
    }
}

pub fn chain_poses(model: &RobotModel, q: &Configuration) -> ChainPoses {
    let [x, y, theta] = q.base;
    let base = Isometry3::from_parts(
        Translation3::new(x, y, 0.0),
        UnitQuaternion::from_axis_angle(&Vector3::z_axis(), theta),
    );
    let mut frame = base;
    let mut axes = [Vector3::zeros(); ARM_DOF];
    let mut origins = [Vector3::zeros(); ARM_DOF];
    for (j, joint) in model.arm.iter().enumerate() {
        frame *= joint.origin;
        axes[j] = frame.rotation * joint.axis.into_inner();
        origins[j] = frame.translation.vector;
        frame *= Isometry3::from_parts(
            Translation3::identity(),
            UnitQuaternion::from_axis_angle(&joint.axis, q.arm[j]),
        );
    }
    let camera = frame * model.camera_offset;
    ChainPoses { base, axes, origins, camera }
}

/// Camera pose in the world frame.
pub fn forward_kinematics(model: &RobotModel, q: &Configuration) -> Isometry3<f64> {
    chain_poses(model, q).camera
}

pub fn task_vector(model: &RobotModel, q: &Configuration) -> TaskVector {
    let pose = forward_kinematics(model, q);
    TaskVector::new(pose.translation.vector, pose.rotation * Vector3::z())
}

/// Derivative of a vector rigidly attached to the camera with respect to
/// each coordinate.
pub fn attached_vector_jacobian(poses: &ChainPoses, v: &Vector3<f64>) -> Jacobian3 {
    let mut jac = Jacobian3::zeros();
    for c in 0..DOF {
        if let Some((axis, _)) = poses.revolute(c) {
            jac.set_column(c, &axis.cross(v));
        }
    }
    jac
}

/// Derivative of a point rigidly attached to the camera frame.
pub fn attached_point_jacobian(poses: &ChainPoses, point: &Vector3<f64>) -> Jacobian3 {
    let mut jac = Jacobian3::zeros();
    jac[(0, 0)] = 1.0;
    jac[(1, 1)] = 1.0;
    for c in BASE_DOF - 1..DOF {
        if let Some((axis, origin)) = poses.revolute(c) {
            jac.set_column(c, &axis.cross(&(point - origin)));
        }
    }
    jac
}

/// `J_p = dp/dq`, 3x8.
pub fn translation_jacobian(model: &RobotModel, q: &Configuration) -> Jacobian3 {
    let poses = chain_poses(model, q);
    attached_point_jacobian(&poses, &poses.camera_position())
}

/// `J_l = dl/dq`, 3x8.
pub fn direction_jacobian(model: &RobotModel, q: &Configuration) -> Jacobian3 {
    let poses = chain_poses(model, q);
    let l = poses.camera.rotation * Vector3::z();
    attached_vector_jacobian(&poses, &l)
}

/// Explicit Euler step with angle wrapping on theta and the arm joints.
pub fn integrate(q: &Configuration, qdot: &Vec8, dt: f64) -> Configuration {
    let mut next = Configuration::from_vector(&(q.to_vector() + qdot * dt));
    next.base[2] = wrap_angle(next.base[2]);
    for a in next.arm.iter_mut() {
        *a = wrap_angle(*a);
    }
    next
}
