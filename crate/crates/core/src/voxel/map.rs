//! Log-odds occupancy map over a bounded voxel grid.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::Vector3;

use super::entropy::voxel_entropy;
use super::grid::{Aabb, GridSpec, VoxelIndex};
use super::scan::{DepthScan, Surface};

pub fn logit(p: f64) -> f64 {
    libm::log(p / (1.0 - p))
}

pub fn sigmoid(l: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-l))
}

/// Sensor model and the tri-state interpretation of cell probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct MapParams {
    pub resolution: f64,
    pub p_hit: f64,
    pub p_miss: f64,
    pub clamp_min: f64,
    pub clamp_max: f64,
    /// Cells below this probability are free.
    pub free_below: f64,
    /// Cells above this probability are occupied.
    pub occupied_above: f64,
}

impl Default for MapParams {
    fn default() -> Self {
        MapParams {
            resolution: 0.03,
            p_hit: 0.85,
            p_miss: 0.40,
            clamp_min: 0.12,
            clamp_max: 0.97,
            free_below: 0.2,
            occupied_above: 0.7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

impl MapParams {
    pub fn classify(&self, p: f64) -> CellState {
        if p < self.free_below {
            CellState::Free
        } else if p > self.occupied_above {
            CellState::Occupied
        } else {
            CellState::Unknown
        }
    }
}

/// Probabilistic voxel map. Cells never updated hold log-odds 0 (P = 0.5).
#[derive(Clone, Debug)]
pub struct OccupancyMap {
    grid: GridSpec,
    params: MapParams,
    log_odds: Vec<f32>,
    /// Per-scan update marks: `2s` = miss applied in scan `s`, `2s + 1` = hit.
    stamps: Vec<u32>,
    scans: u32,
    l_hit: f32,
    l_miss: f32,
    l_min: f32,
    l_max: f32,
}

impl OccupancyMap {
    pub fn new(grid: GridSpec, params: MapParams) -> Self {
        let n = grid.len();
        OccupancyMap {
            grid,
            params,
            log_odds: vec![0.0; n],
            stamps: vec![u32::MAX; n],
            scans: 0,
            l_hit: logit(params.p_hit) as f32,
            l_miss: logit(params.p_miss) as f32,
            l_min: logit(params.clamp_min) as f32,
            l_max: logit(params.clamp_max) as f32,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn log_odds(&self, v: VoxelIndex) -> Option<f32> {
        self.grid.linear(v).map(|i| self.log_odds[i])
    }

    /// Occupancy probability; cells outside the grid report 0.5.
    pub fn probability(&self, v: VoxelIndex) -> f64 {
        self.grid.linear(v).map_or(0.5, |i| sigmoid(self.log_odds[i] as f64))
    }

    #[inline]
    pub(crate) fn probability_at(&self, linear: usize) -> f64 {
        sigmoid(self.log_odds[linear] as f64)
    }

    pub fn state(&self, v: VoxelIndex) -> CellState {
        self.params.classify(self.probability(v))
    }

    /// Overwrite a cell's probability, bypassing clamping; P = 0 and P = 1
    /// are stored as infinite log-odds. Intended for tests and tools.
    pub fn set_probability(&mut self, v: VoxelIndex, p: f64) {
        if let Some(i) = self.grid.linear(v) {
            self.log_odds[i] = logit(p.clamp(0.0, 1.0)) as f32;
        }
    }

    /// Apply one hit (`true`) or miss update to a cell, with clamping.
    pub fn update_cell(&mut self, v: VoxelIndex, hit: bool) {
        if let Some(i) = self.grid.linear(v) {
            self.update_linear(i, hit);
        }
    }

    fn update_linear(&mut self, i: usize, hit: bool) {
        let delta = if hit { self.l_hit } else { self.l_miss };
        self.log_odds[i] = (self.log_odds[i] + delta).clamp(self.l_min, self.l_max);
    }

    /// Fuse a depth scan. Within one scan each cell is updated at most once
    /// and a hit takes precedence over misses from other rays. Rays are
    /// processed in scan order.
    pub fn integrate_scan(&mut self, scan: &DepthScan) {
        let s = self.scans;
        self.scans = self.scans.wrapping_add(1);
        let hit_mark = s.wrapping_mul(2).wrapping_add(1);
        let miss_mark = s.wrapping_mul(2);
        let grid = self.grid;
        for ray in &scan.rays {
            if ray.surface == Some(Surface::Object) {
                let p = ray.origin + ray.direction * ray.hit_cell_t();
                if let Some(i) = grid.linear(grid.index_of(&p)) {
                    if self.stamps[i] != hit_mark {
                        self.stamps[i] = hit_mark;
                        self.update_linear(i, true);
                    }
                }
            }
        }
        for ray in &scan.rays {
            let end = ray.range;
            let hit_cell = (ray.surface == Some(Surface::Object))
                .then(|| grid.index_of(&(ray.origin + ray.direction * ray.hit_cell_t())));
            grid.walk(&ray.origin, &ray.direction, end, |cell, _, _| {
                if Some(cell) == hit_cell {
                    return false;
                }
                let i = grid.linear(cell).expect("walk stays in grid");
                if self.stamps[i] != hit_mark && self.stamps[i] != miss_mark {
                    self.stamps[i] = miss_mark;
                    self.update_linear(i, false);
                }
                true
            });
        }
    }

    /// Ordered cells along a ray with their occupancy probability.
    pub fn traverse(
        &self,
        origin: &Vector3<f64>,
        direction: &Vector3<f64>,
        max_dist: f64,
    ) -> Vec<(VoxelIndex, f64)> {
        let mut out = Vec::new();
        self.grid.walk(origin, direction, max_dist, |c, _, _| {
            out.push((c, self.probability(c)));
            true
        });
        out
    }

    /// Sum of voxel entropies over the grid cells whose centres lie in `bounds`.
    pub fn total_entropy(&self, bounds: &Aabb) -> f64 {
        let g = &self.grid;
        let lo = g.index_of(&bounds.min);
        let hi = g.index_of(&bounds.max);
        let clampi = |v: i32, n: usize| v.clamp(0, n as i32 - 1);
        let mut total = 0.0;
        for z in clampi(lo.z, g.dims[2])..=clampi(hi.z, g.dims[2]) {
            for y in clampi(lo.y, g.dims[1])..=clampi(hi.y, g.dims[1]) {
                for x in clampi(lo.x, g.dims[0])..=clampi(hi.x, g.dims[0]) {
                    let v = VoxelIndex::new(x, y, z);
                    let c = g.center_of(v);
                    if !bounds.contains(&c) {
                        continue;
                    }
                    let i = g.linear(v).unwrap();
                    total += voxel_entropy(self.probability_at(i));
                }
            }
        }
        total
    }

    /// Entropy of every cell in the grid.
    pub fn grid_entropy(&self) -> f64 {
        // untouched cells dominate; count them instead of evaluating each
        let mut untouched = 0usize;
        let mut total = 0.0;
        for &l in &self.log_odds {
            if l == 0.0 {
                untouched += 1;
            } else {
                total += voxel_entropy(sigmoid(l as f64));
            }
        }
        total + untouched as f64 * core::f64::consts::LN_2
    }

    /// Centres of occupied cells, in storage order.
    pub fn occupied_centers(&self) -> Vec<Vector3<f64>> {
        let threshold = logit(self.params.occupied_above) as f32;
        self.log_odds
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > threshold)
            .map(|(i, _)| self.grid.center_of(self.grid.from_linear(i)))
            .collect()
    }

    /// Non-default cells as `(index, log_odds)`, storage order.
    pub fn nonzero_cells(&self) -> impl Iterator<Item = (VoxelIndex, f32)> + '_ {
        self.log_odds
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0.0)
            .map(|(i, &l)| (self.grid.from_linear(i), l))
    }

    pub fn count_state(&self, state: CellState) -> usize {
        (0..self.grid.len())
            .filter(|&i| self.params.classify(self.probability_at(i)) == state)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::scan::RayRecord;

    fn small_map(params: MapParams) -> OccupancyMap {
        OccupancyMap::new(GridSpec::new(Vector3::zeros(), 0.03, [20, 20, 20]), params)
    }

    #[test]
    fn single_hit_at_p07() {
        let mut m = small_map(MapParams { p_hit: 0.7, ..MapParams::default() });
        let v = VoxelIndex::new(3, 3, 3);
        m.update_cell(v, true);
        assert!((m.probability(v) - 0.7).abs() < 1e-6);
    }

    #[test]
    fn repeated_misses_reach_free() {
        let params = MapParams::default();
        let mut m = small_map(params);
        let v = VoxelIndex::new(1, 1, 1);
        // closed form: k misses give log-odds k * logit(0.4); free needs
        // logit < logit(0.2)
        let expected = libm::ceil(logit(0.2) / logit(0.4)) as usize;
        let mut k = 0;
        while m.state(v) != CellState::Free {
            m.update_cell(v, false);
            k += 1;
            assert!(k < 100);
        }
        assert_eq!(k, expected);
        for _ in 0..50 {
            m.update_cell(v, false);
        }
        assert!((m.probability(v) - 0.12).abs() < 1e-6);
    }

    #[test]
    fn scan_leaves_cells_behind_hit_untouched() {
        let mut m = small_map(MapParams::default());
        let origin = Vector3::new(0.015, 0.315, 0.315);
        let ray = RayRecord {
            origin,
            direction: Vector3::x(),
            surface: Some(Surface::Object),
            range: 0.3 - 0.015,
        };
        m.integrate_scan(&DepthScan { rays: alloc::vec![ray] });
        // one miss each: P = 0.4
        for x in 0..10 {
            assert!((m.probability(VoxelIndex::new(x, 10, 10)) - 0.4).abs() < 1e-6, "cell {x}");
        }
        assert!(m.probability(VoxelIndex::new(10, 10, 10)) > 0.7);
        for x in 11..20 {
            assert_eq!(m.probability(VoxelIndex::new(x, 10, 10)), 0.5);
        }
    }

    #[test]
    fn hit_wins_over_miss_within_scan() {
        let mut m = small_map(MapParams::default());
        let target = 0.3 - 0.015;
        let a = RayRecord {
            origin: Vector3::new(0.015, 0.315, 0.315),
            direction: Vector3::x(),
            surface: None,
            range: 0.5,
        };
        let b = RayRecord { surface: Some(Surface::Object), range: target, ..a };
        m.integrate_scan(&DepthScan { rays: alloc::vec![a, b] });
        assert!(m.probability(VoxelIndex::new(10, 10, 10)) > 0.7);
        assert!((m.probability(VoxelIndex::new(3, 10, 10)) - 0.4).abs() < 1e-6);
    }

    #[test]
    fn total_entropy_of_fresh_map() {
        let m = small_map(MapParams::default());
        let b = m.grid().bounds();
        let v = m.grid().len() as f64;
        assert!((m.total_entropy(&b) - v * core::f64::consts::LN_2).abs() < 1e-6);
    }
}
