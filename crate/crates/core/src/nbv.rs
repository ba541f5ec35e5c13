//! Candidate views on a vertical cylinder and rear-side-voxel scoring.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_6, TAU};
use nalgebra::{Vector2, Vector3};

use crate::math::{image_axes, pinhole_rays, rotate_about};
use crate::voxel::{voxel_entropy, CellState, OccupancyMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Orientation {
    Forward,
    Up,
    Down,
    Left,
    Right,
}

impl Orientation {
    pub const ALL: [Orientation; 5] = [
        Orientation::Forward,
        Orientation::Up,
        Orientation::Down,
        Orientation::Left,
        Orientation::Right,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Orientation::Forward => "forward",
            Orientation::Up => "up",
            Orientation::Down => "down",
            Orientation::Left => "left",
            Orientation::Right => "right",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateView {
    pub id: usize,
    pub position: Vector3<f64>,
    pub direction: Vector3<f64>,
    pub orientation: Orientation,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SearchCylinder {
    pub center: [f64; 2],
    pub radius: f64,
    pub positions: usize,
    pub view_height: f64,
    /// Angle between forward and the four tilted orientations, rad.
    pub tilt: f64,
}

impl Default for SearchCylinder {
    fn default() -> Self {
        SearchCylinder { center: [0.0, 0.0], radius: 3.0, positions: 40, view_height: 0.45, tilt: FRAC_PI_6 }
    }
}

/// `positions x 5` views; id = `5 * position_index + orientation_index`.
pub fn generate_candidates(cyl: &SearchCylinder) -> Vec<CandidateView> {
    let mut out = Vec::with_capacity(cyl.positions * 5);
    for k in 0..cyl.positions {
        let phi = TAU * k as f64 / cyl.positions as f64;
        let (s, c) = libm::sincos(phi);
        let radial = Vector3::new(c, s, 0.0);
        let position = Vector3::new(cyl.center[0], cyl.center[1], cyl.view_height) + radial * cyl.radius;
        let forward = -radial;
        // image right for a horizontal forward axis; pitching about it tilts up/down
        let right = forward.cross(&Vector3::z());
        for (o_idx, &orientation) in Orientation::ALL.iter().enumerate() {
            let direction = match orientation {
                Orientation::Forward => forward,
                Orientation::Up => rotate_about(&forward, &right, cyl.tilt),
                Orientation::Down => rotate_about(&forward, &right, -cyl.tilt),
                Orientation::Left => rotate_about(&forward, &Vector3::z(), cyl.tilt),
                Orientation::Right => rotate_about(&forward, &Vector3::z(), -cyl.tilt),
            };
            out.push(CandidateView { id: 5 * k + o_idx, position, direction, orientation, score: 0.0 });
        }
    }
    out
}

impl SearchCylinder {
    pub fn center_xy(&self) -> Vector2<f64> {
        Vector2::new(self.center[0], self.center[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GainWeighting {
    Count,
    Entropy,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RsvParams {
    pub fov_deg: (f64, f64),
    pub grid: (usize, usize),
    pub max_range: f64,
    /// Closed probability band treated as unknown.
    pub unknown_band: (f64, f64),
    pub weighting: GainWeighting,
}

impl Default for RsvParams {
    fn default() -> Self {
        RsvParams {
            fov_deg: (74.0, 60.0),
            grid: (32, 24),
            max_range: 4.5,
            unknown_band: (0.45, 0.55),
            weighting: GainWeighting::Count,
        }
    }
}

/// Scoring rays of a view; empty for a vertical optical axis.
pub fn view_rays(direction: &Vector3<f64>, fov_deg: (f64, f64), grid: (usize, usize)) -> Vec<Vector3<f64>> {
    match image_axes(direction) {
        Some((right, down)) => pinhole_rays(direction, &right, &down, fov_deg, grid),
        None => Vec::new(),
    }
}

/// Linear indices of the distinct rear-side voxels seen from a view: along
/// each ray, the cell right after the first occupied cell, if unknown.
pub fn rear_side_voxels(map: &OccupancyMap, position: &Vector3<f64>, direction: &Vector3<f64>, params: &RsvParams) -> Vec<usize> {
    let grid = *map.grid();
    let mp = *map.params();
    let (lo, hi) = params.unknown_band;
    let mut found = Vec::new();
    for ray in view_rays(direction, params.fov_deg, params.grid) {
        let mut after_occupied = false;
        grid.walk(position, &ray, params.max_range, |cell, _, _| {
            let i = grid.linear(cell).expect("walk stays in grid");
            let p = map.probability_at(i);
            if after_occupied {
                if p >= lo && p <= hi {
                    found.push(i);
                }
                return false;
            }
            after_occupied = mp.classify(p) == CellState::Occupied;
            true
        });
    }
    found.sort_unstable();
    found.dedup();
    found
}

pub fn rear_side_voxel_gain(map: &OccupancyMap, view: &CandidateView, params: &RsvParams) -> f64 {
    let cells = rear_side_voxels(map, &view.position, &view.direction, params);
    match params.weighting {
        GainWeighting::Count => cells.len() as f64,
        GainWeighting::Entropy => cells.iter().map(|&i| voxel_entropy(map.probability_at(i))).sum(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AllVisited;

/// Index into `candidates` of the best-scoring unvisited view, ties to the
/// lowest id. Scores must already be filled in.
pub fn select_best(candidates: &[CandidateView], visited: &BTreeSet<usize>) -> Result<usize, AllVisited> {
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if visited.contains(&c.id) {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let cb = &candidates[b];
                if c.score > cb.score || (c.score == cb.score && c.id < cb.id) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.ok_or(AllVisited)
}

/// Score every unvisited candidate against the map and pick the best.
pub fn select_nbv(
    map: &OccupancyMap,
    candidates: &mut [CandidateView],
    visited: &BTreeSet<usize>,
    params: &RsvParams,
) -> Result<usize, AllVisited> {
    for c in candidates.iter_mut() {
        c.score = if visited.contains(&c.id) { 0.0 } else { rear_side_voxel_gain(map, c, params) };
    }
    select_best(candidates, visited)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::angle_between;
    use crate::voxel::{GridSpec, MapParams, VoxelIndex};

    fn map() -> OccupancyMap {
        OccupancyMap::new(GridSpec::centered([0.0, 0.0], 0.0, [7.5, 7.5, 2.4], 0.03), MapParams::default())
    }

    #[test]
    fn two_hundred_views_on_cylinder() {
        let cyl = SearchCylinder { center: [0.4, -0.2], ..Default::default() };
        let c = generate_candidates(&cyl);
        assert_eq!(c.len(), 200);
        for (i, v) in c.iter().enumerate() {
            assert_eq!(v.id, i);
            let r = Vector2::new(v.position.x - 0.4, v.position.y + 0.2);
            assert!((r.norm() - 3.0).abs() < 1e-12);
            assert!((v.position.z - 0.45).abs() < 1e-15);
            assert!((v.direction.norm() - 1.0).abs() < 1e-12);
        }
        for k in 0..40 {
            let f = &c[5 * k];
            let outward = (f.position - Vector3::new(0.4, -0.2, 0.45)).normalize();
            assert!((f.direction.dot(&outward) + 1.0).abs() < 1e-9);
            for o in 1..5 {
                assert!((angle_between(&f.direction, &c[5 * k + o].direction) - FRAC_PI_6).abs() < 1e-9);
            }
            assert!(c[5 * k + 1].direction.z > 0.0 && c[5 * k + 2].direction.z < 0.0);
            // left is counter-clockwise from forward, seen from above
            assert!(f.direction.cross(&c[5 * k + 3].direction).z > 0.0);
            let next = &c[5 * ((k + 1) % 40)];
            let a = libm::atan2(f.position.y + 0.2, f.position.x - 0.4);
            let b = libm::atan2(next.position.y + 0.2, next.position.x - 0.4);
            assert!((crate::math::wrap_angle(b - a) - TAU / 40.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fresh_map_scores_zero() {
        let m = map();
        let cands = generate_candidates(&SearchCylinder::default());
        for c in cands.iter().step_by(17) {
            assert_eq!(rear_side_voxel_gain(&m, c, &RsvParams::default()), 0.0);
        }
    }

    #[test]
    fn single_rear_side_voxel() {
        let mut m = map();
        let view = CandidateView {
            id: 0,
            position: Vector3::new(-2.0, 0.015, 0.615),
            direction: Vector3::x(),
            orientation: Orientation::Forward,
            score: 0.0,
        };
        let v = m.grid().index_of(&Vector3::new(0.0, 0.015, 0.615));
        m.set_probability(v, 0.9);
        // ray spacing at 2 m exceeds a voxel, so only the central ray hits
        let params = RsvParams { grid: (33, 25), ..Default::default() };
        assert_eq!(rear_side_voxel_gain(&m, &view, &params), 1.0);
        let behind = VoxelIndex::new(v.x + 1, v.y, v.z);
        m.set_probability(behind, 0.1);
        assert_eq!(rear_side_voxel_gain(&m, &view, &params), 0.0);
        let entropy = RsvParams { weighting: GainWeighting::Entropy, ..params };
        m.set_probability(behind, 0.5);
        assert!((rear_side_voxel_gain(&m, &view, &entropy) - core::f64::consts::LN_2).abs() < 1e-6);
    }

    fn view(id: usize, score: f64) -> CandidateView {
        CandidateView { id, position: Vector3::zeros(), direction: Vector3::x(), orientation: Orientation::Forward, score }
    }

    #[test]
    fn selection_rules() {
        let none = BTreeSet::new();
        assert_eq!(select_best(&[view(0, 5.0), view(1, 3.0)], &none), Ok(0));
        assert_eq!(select_best(&[view(0, 2.0), view(1, 2.0), view(2, 2.0)], &none), Ok(0));
        let visited: BTreeSet<usize> = [0, 2].into_iter().collect();
        assert_eq!(select_best(&[view(0, 9.0), view(1, 0.0), view(2, 9.0)], &visited), Ok(1));
        let all: BTreeSet<usize> = [0, 1].into_iter().collect();
        assert_eq!(select_best(&[view(0, 1.0), view(1, 1.0)], &all), Err(AllVisited));
    }
}
