//! Desk-scale object suite built from primitive unions, centred on the
//! origin and resting on the floor.

use alloc::vec;
use alloc::vec::Vec;

use crate::voxel::Primitive;

pub const SUITE_SIZE: usize = 10;

pub const SUITE_NAMES: [&str; SUITE_SIZE] =
    ["chair", "table", "l_block", "tower", "tank", "arch", "t_block", "lamp", "shelf", "sofa"];

fn cuboid(min: [f64; 3], max: [f64; 3]) -> Primitive {
    Primitive::Box { min, max }
}

fn post(x: f64, y: f64, radius: f64, z_min: f64, z_max: f64) -> Primitive {
    Primitive::Cylinder { center: [x, y], radius, z_min, z_max }
}

/// Object `index` of the suite (wrapping modulo the suite size).
pub fn suite_object(index: usize) -> Vec<Primitive> {
    match index % SUITE_SIZE {
        0 => {
            let mut p = vec![
                cuboid([-0.25, -0.25, 0.45], [0.25, 0.25, 0.51]),
                cuboid([-0.25, 0.19, 0.51], [0.25, 0.25, 1.05]),
            ];
            for (x, y) in [(-0.21, -0.21), (0.21, -0.21), (-0.21, 0.21), (0.21, 0.21)] {
                p.push(post(x, y, 0.03, 0.0, 0.45));
            }
            p
        }
        1 => {
            let mut p = vec![cuboid([-0.6, -0.35, 0.7], [0.6, 0.35, 0.76])];
            for (x, y) in [(-0.54, -0.29), (0.54, -0.29), (-0.54, 0.29), (0.54, 0.29)] {
                p.push(post(x, y, 0.04, 0.0, 0.7));
            }
            p
        }
        2 => vec![Primitive::Extrusion {
            polygon: vec![[-0.5, -0.4], [0.5, -0.4], [0.5, -0.1], [-0.2, -0.1], [-0.2, 0.5], [-0.5, 0.5]],
            z_min: 0.0,
            z_max: 1.2,
        }],
        3 => vec![
            cuboid([-0.45, -0.45, 0.0], [0.45, 0.45, 0.5]),
            cuboid([-0.3, -0.2, 0.5], [0.35, 0.3, 1.0]),
            cuboid([-0.1, -0.15, 1.0], [0.2, 0.15, 1.5]),
        ],
        4 => vec![
            post(0.0, 0.0, 0.4, 0.0, 1.0),
            cuboid([-0.15, -0.15, 1.0], [0.15, 0.15, 1.25]),
            cuboid([0.4, -0.08, 0.3], [0.65, 0.08, 0.45]),
        ],
        5 => vec![
            cuboid([-0.6, -0.2, 0.0], [-0.35, 0.2, 1.1]),
            cuboid([0.35, -0.2, 0.0], [0.6, 0.2, 1.1]),
            cuboid([-0.6, -0.2, 1.1], [0.6, 0.2, 1.35]),
        ],
        6 => vec![Primitive::Extrusion {
            polygon: vec![
                [-0.55, 0.2],
                [-0.12, 0.2],
                [-0.12, -0.55],
                [0.12, -0.55],
                [0.12, 0.2],
                [0.55, 0.2],
                [0.55, 0.45],
                [-0.55, 0.45],
            ],
            z_min: 0.0,
            z_max: 0.9,
        }],
        7 => vec![
            post(0.0, 0.0, 0.25, 0.0, 0.06),
            post(0.0, 0.0, 0.03, 0.06, 1.45),
            post(0.0, 0.0, 0.22, 1.45, 1.75),
        ],
        8 => vec![
            cuboid([-0.5, 0.15, 0.0], [0.5, 0.2, 1.8]),
            cuboid([-0.5, -0.2, 0.0], [-0.45, 0.15, 1.8]),
            cuboid([0.45, -0.2, 0.0], [0.5, 0.15, 1.8]),
            cuboid([-0.45, -0.2, 0.0], [0.45, 0.15, 0.05]),
            cuboid([-0.45, -0.2, 0.6], [0.45, 0.15, 0.65]),
            cuboid([-0.45, -0.2, 1.2], [0.45, 0.15, 1.25]),
        ],
        _ => vec![
            cuboid([-0.7, -0.35, 0.1], [0.7, 0.35, 0.45]),
            cuboid([-0.7, 0.2, 0.45], [0.7, 0.35, 0.85]),
            cuboid([-0.7, -0.35, 0.45], [-0.55, 0.2, 0.65]),
            cuboid([0.55, -0.35, 0.45], [0.7, 0.2, 0.65]),
            cuboid([-0.65, -0.3, 0.0], [-0.55, -0.2, 0.1]),
            cuboid([0.55, -0.3, 0.0], [0.65, -0.2, 0.1]),
            cuboid([-0.65, 0.2, 0.0], [-0.55, 0.3, 0.1]),
            cuboid([0.55, 0.2, 0.0], [0.65, 0.3, 0.1]),
        ],
    }
}

/// Axis-aligned bounds `(min, max)` of a primitive union.
pub fn primitives_bounds(prims: &[Primitive]) -> ([f64; 3], [f64; 3]) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in prims {
        let (a, b) = p.bounds();
        for i in 0..3 {
            lo[i] = lo[i].min(a[i]);
            hi[i] = hi[i].max(b[i]);
        }
    }
    (lo, hi)
}
