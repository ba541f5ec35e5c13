//! Ground-truth scene and simulated depth sensing.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{Isometry3, Vector2, Vector3};

use super::grid::{Aabb, GridSpec, VoxelIndex};
use crate::math::pinhole_rays;

/// Building block of a synthetic object; a cell belongs to the object when
/// its centre lies inside any primitive.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Primitive {
    Box { min: [f64; 3], max: [f64; 3] },
    Cylinder { center: [f64; 2], radius: f64, z_min: f64, z_max: f64 },
    /// Vertical prism over a simple polygon (counter-clockwise or not).
    Extrusion { polygon: Vec<[f64; 2]>, z_min: f64, z_max: f64 },
}

impl Primitive {
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        match self {
            Primitive::Box { min, max } => (0..3).all(|i| p[i] >= min[i] && p[i] <= max[i]),
            Primitive::Cylinder { center, radius, z_min, z_max } => {
                p.z >= *z_min
                    && p.z <= *z_max
                    && (Vector2::new(p.x - center[0], p.y - center[1])).norm_squared()
                        <= radius * radius
            }
            Primitive::Extrusion { polygon, z_min, z_max } => {
                p.z >= *z_min && p.z <= *z_max && point_in_polygon(polygon, p.x, p.y)
            }
        }
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        match self {
            Primitive::Box { min, max } => (*min, *max),
            Primitive::Cylinder { center, radius, z_min, z_max } => (
                [center[0] - radius, center[1] - radius, *z_min],
                [center[0] + radius, center[1] + radius, *z_max],
            ),
            Primitive::Extrusion { polygon, z_min, z_max } => {
                let mut lo = [f64::INFINITY, f64::INFINITY, *z_min];
                let mut hi = [f64::NEG_INFINITY, f64::NEG_INFINITY, *z_max];
                for v in polygon {
                    for i in 0..2 {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Horizontal footprint radius about `center`.
    pub fn footprint_radius(&self, center: [f64; 2]) -> f64 {
        let d = |x: f64, y: f64| libm::hypot(x - center[0], y - center[1]);
        match self {
            Primitive::Box { min, max } => [
                d(min[0], min[1]),
                d(min[0], max[1]),
                d(max[0], min[1]),
                d(max[0], max[1]),
            ]
            .into_iter()
            .fold(0.0, f64::max),
            Primitive::Cylinder { center: c, radius, .. } => d(c[0], c[1]) + radius,
            Primitive::Extrusion { polygon, .. } => {
                polygon.iter().map(|v| d(v[0], v[1])).fold(0.0, f64::max)
            }
        }
    }
}

fn point_in_polygon(poly: &[[f64; 2]], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (xi, yi) = (poly[i][0], poly[i][1]);
        let (xj, yj) = (poly[j][0], poly[j][1]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Circle on the ground plane.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Circle {
    pub fn new(center: [f64; 2], radius: f64) -> Self {
        Circle { center, radius }
    }

    pub fn center_vec(&self) -> Vector2<f64> {
        Vector2::new(self.center[0], self.center[1])
    }
}

/// The hidden object plus the static environment around it.
#[derive(Clone, Debug)]
pub struct GroundTruthScene {
    pub grid: GridSpec,
    occupied: Vec<bool>,
    pub object_voxels: Vec<VoxelIndex>,
    pub bounding_box: Aabb,
    pub forbidden_cylinder: Circle,
    pub obstacles: Vec<Circle>,
    /// Rays terminate on the ground plane `z = floor_z`.
    pub floor_z: Option<f64>,
}

impl GroundTruthScene {
    pub fn from_voxels(
        grid: GridSpec,
        voxels: impl IntoIterator<Item = VoxelIndex>,
        forbidden_cylinder: Circle,
        obstacles: Vec<Circle>,
    ) -> Self {
        let mut occupied = vec![false; grid.len()];
        for v in voxels {
            if let Some(i) = grid.linear(v) {
                occupied[i] = true;
            }
        }
        let object_voxels = occupied
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(i, _)| grid.from_linear(i))
            .collect();
        GroundTruthScene {
            bounding_box: grid.bounds(),
            grid,
            occupied,
            object_voxels,
            forbidden_cylinder,
            obstacles,
            floor_z: Some(grid.origin.z),
        }
    }

    pub fn from_primitives(
        grid: GridSpec,
        primitives: &[Primitive],
        forbidden_cylinder: Circle,
        obstacles: Vec<Circle>,
    ) -> Self {
        let mut cells = Vec::new();
        // only cells whose centre can fall inside some primitive
        let mut lo = [i32::MAX; 3];
        let mut hi = [i32::MIN; 3];
        for p in primitives {
            let (a, b) = p.bounds();
            for i in 0..3 {
                let k0 = libm::floor((a[i] - grid.origin[i]) / grid.resolution - 0.5) as i32;
                let k1 = libm::ceil((b[i] - grid.origin[i]) / grid.resolution - 0.5) as i32;
                lo[i] = lo[i].min(k0.max(0));
                hi[i] = hi[i].max(k1.min(grid.dims[i] as i32 - 1));
            }
        }
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    let v = VoxelIndex::new(x, y, z);
                    let c = grid.center_of(v);
                    if primitives.iter().any(|p| p.contains(&c)) {
                        cells.push(v);
                    }
                }
            }
        }
        Self::from_voxels(grid, cells, forbidden_cylinder, obstacles)
    }

    pub fn is_occupied(&self, v: VoxelIndex) -> bool {
        self.grid.linear(v).is_some_and(|i| self.occupied[i])
    }

    /// Object voxels with at least one empty face neighbour: the observable
    /// surface.
    pub fn surface_voxels(&self) -> Vec<VoxelIndex> {
        const N: [(i32, i32, i32); 6] =
            [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];
        self.object_voxels
            .iter()
            .copied()
            .filter(|v| {
                N.iter().any(|(dx, dy, dz)| {
                    let n = VoxelIndex::new(v.x + dx, v.y + dy, v.z + dz);
                    // cells under the floor are never visible
                    if n.z < 0 && self.floor_z.is_some() {
                        return false;
                    }
                    !self.is_occupied(n)
                })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Surface {
    Object,
    Floor,
}

/// One sensor ray. `range` is the distance along the ray to the surface it
/// hit (the entry face of the hit voxel), or the sensor range on a miss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayRecord {
    pub origin: Vector3<f64>,
    pub direction: Vector3<f64>,
    pub surface: Option<Surface>,
    pub range: f64,
}

impl RayRecord {
    pub fn is_hit(&self) -> bool {
        self.surface.is_some()
    }

    /// Ray parameter just inside the hit voxel.
    pub fn hit_cell_t(&self) -> f64 {
        self.range + 1e-7
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DepthScan {
    pub rays: Vec<RayRecord>,
}

impl DepthScan {
    pub fn hits(&self) -> usize {
        self.rays.iter().filter(|r| r.is_hit()).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SensorParams {
    /// Horizontal, vertical field of view, degrees.
    pub fov_deg: (f64, f64),
    /// Rays per row, rows.
    pub grid: (usize, usize),
    pub max_range: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        SensorParams { fov_deg: (74.0, 60.0), grid: (64, 48), max_range: 4.5 }
    }
}

/// Cast the sensor ray grid from the camera pose (optical axis `+z`, image
/// right `+x`, image down `+y`) against the ground truth. Row-major order.
pub fn simulate_depth_scan(
    scene: &GroundTruthScene,
    camera: &Isometry3<f64>,
    params: &SensorParams,
) -> DepthScan {
    let origin = camera.translation.vector;
    let l = camera.rotation * Vector3::z();
    let right = camera.rotation * Vector3::x();
    let down = camera.rotation * Vector3::y();
    let dirs = pinhole_rays(&l, &right, &down, params.fov_deg, params.grid);
    let rays = dirs.into_iter().map(|d| cast_ray(scene, &origin, &d, params.max_range)).collect();
    DepthScan { rays }
}

pub fn cast_ray(
    scene: &GroundTruthScene,
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
    max_range: f64,
) -> RayRecord {
    let mut limit = max_range;
    let mut surface = None;
    if let Some(fz) = scene.floor_z {
        if dir.z < 0.0 && origin.z > fz {
            let t = (fz - origin.z) / dir.z;
            if t <= limit {
                limit = t;
                surface = Some(Surface::Floor);
            }
        }
    }
    let mut hit_t = None;
    scene.grid.walk(origin, dir, limit, |cell, t_in, _| {
        if scene.is_occupied(cell) {
            hit_t = Some(t_in.max(0.0));
            false
        } else {
            true
        }
    });
    match hit_t {
        Some(t) if t > 0.0 => RayRecord { origin: *origin, direction: *dir, surface: Some(Surface::Object), range: t },
        // camera inside an occupied voxel sees nothing
        Some(_) => RayRecord { origin: *origin, direction: *dir, surface: None, range: 0.0 },
        None => RayRecord { origin: *origin, direction: *dir, surface, range: limit },
    }
}
