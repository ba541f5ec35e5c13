//! Ground truth, occupancy mapping, ray traversal and information measures.

pub mod entropy;
pub mod grid;
pub mod map;
pub mod scan;

pub use entropy::{ray_information, voxel_entropy};
pub use grid::{Aabb, GridSpec, VoxelIndex};
pub use map::{CellState, MapParams, OccupancyMap};
pub use scan::{
    cast_ray, simulate_depth_scan, Circle, DepthScan, GroundTruthScene, Primitive, RayRecord,
    SensorParams, Surface,
};
