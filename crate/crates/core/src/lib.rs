//! Visibility-aware view planning for object reconstruction with a mobile
//! manipulator: kinematics, occupancy mapping, next-best-view scoring,
//! focus-point maintenance and a QP whole-body controller.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod kinematics;
pub mod math;
pub mod voxel;
pub mod nbv;
pub mod focus;
pub mod visibility;
pub mod qp;
pub mod controller;
pub mod sampling;
pub mod metrics;
pub mod objects;
pub mod scenario;
pub mod bayes;
