//! Voxel and ray information measures.

use nalgebra::Vector3;

use super::map::{CellState, OccupancyMap};

/// Binary entropy in nats, with `0 ln 0 = 0`.
pub fn voxel_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * libm::log(x) };
    term(p) + term(1.0 - p)
}

/// Entropy accumulated along a ray. Traversal stops at the first occupied
/// cell, which does not contribute.
pub fn ray_information(
    map: &OccupancyMap,
    origin: &Vector3<f64>,
    direction: &Vector3<f64>,
    max_dist: f64,
) -> f64 {
    let grid = *map.grid();
    let params = *map.params();
    let mut total = 0.0;
    grid.walk(origin, direction, max_dist, |cell, _, _| {
        let p = map.probability_at(grid.linear(cell).expect("walk stays in grid"));
        if params.classify(p) == CellState::Occupied {
            return false;
        }
        total += voxel_entropy(p);
        true
    });
    total
}
