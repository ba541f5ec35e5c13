//! Focus point: a point at fixed range along the most informative ray of a
//! virtual field of view aimed at the search cylinder.

use alloc::vec::Vec;
use nalgebra::Vector3;

use crate::math::{image_axes, pinhole_rays};
use crate::voxel::{ray_information, OccupancyMap};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct FocusParams {
    pub fov_deg: (f64, f64),
    /// Rays per side of the square ray grid.
    pub grid: usize,
    pub distance: f64,
    pub recompute_threshold: f64,
    pub max_range: f64,
    /// Aim the virtual FoV horizontally instead of at the box centre height.
    pub horizontal_axis: bool,
}

impl Default for FocusParams {
    fn default() -> Self {
        FocusParams {
            fov_deg: (90.0, 90.0),
            grid: 16,
            distance: 2.5,
            recompute_threshold: 0.3,
            max_range: 4.5,
            horizontal_axis: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FocusState {
    pub point: Vector3<f64>,
    pub anchor: Vector3<f64>,
    pub direction: Vector3<f64>,
    pub best_ray_gain: f64,
    pub ray_index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FocusError {
    /// The camera sits on, or vertically above, the aim point.
    DegenerateAxis,
}

/// `grid x grid` unit rays spanning the virtual FoV, row-major. `target` is
/// the cylinder centre at the height the axis should aim at.
pub fn generate_focus_rays(
    camera_position: &Vector3<f64>,
    target: &Vector3<f64>,
    params: &FocusParams,
) -> Result<Vec<Vector3<f64>>, FocusError> {
    let mut axis = target - camera_position;
    if params.horizontal_axis {
        axis.z = 0.0;
    }
    let n = axis.norm();
    if n < 1e-9 {
        return Err(FocusError::DegenerateAxis);
    }
    let axis = axis / n;
    let (right, down) = image_axes(&axis).ok_or(FocusError::DegenerateAxis)?;
    Ok(pinhole_rays(&axis, &right, &down, params.fov_deg, (params.grid, params.grid)))
}

/// Index and gain of the most informative ray; ties go to the lowest index.
pub fn best_ray(map: &OccupancyMap, origin: &Vector3<f64>, rays: &[Vector3<f64>], max_range: f64) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, r) in rays.iter().enumerate() {
        let g = ray_information(map, origin, r, max_range);
        if g > best.1 {
            best = (i, g);
        }
    }
    best
}

/// Recompute the focus point when there is none yet or the camera moved
/// more than the threshold from the anchor. Returns the state and whether it
/// was recomputed.
pub fn update_focus(
    state: Option<&FocusState>,
    camera_position: &Vector3<f64>,
    target: &Vector3<f64>,
    map: &OccupancyMap,
    params: &FocusParams,
) -> Result<(FocusState, bool), FocusError> {
    if let Some(s) = state {
        if (camera_position - s.anchor).norm() <= params.recompute_threshold {
            return Ok((*s, false));
        }
    }
    let rays = generate_focus_rays(camera_position, target, params)?;
    let (i, gain) = best_ray(map, camera_position, &rays, params.max_range);
    let fresh = FocusState {
        point: camera_position + rays[i] * params.distance,
        anchor: *camera_position,
        direction: rays[i],
        best_ray_gain: gain,
        ray_index: i,
    };
    Ok((fresh, true))
}
