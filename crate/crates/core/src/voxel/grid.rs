//! Axis-aligned voxel grid geometry and exact ray traversal.

use alloc::vec::Vec;
use nalgebra::Vector3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VoxelIndex {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl VoxelIndex {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        VoxelIndex { x, y, z }
    }

    fn get(&self, axis: usize) -> i32 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    fn add(&mut self, axis: usize, step: i32) {
        match axis {
            0 => self.x += step,
            1 => self.y += step,
            _ => self.z += step,
        }
    }
}

/// Axis-aligned box, `min` inclusive, `max` exclusive for cell lookup.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn new(min: Vector3<f64>, max: Vector3<f64>) -> Self {
        Aabb { min, max }
    }

    pub fn center(&self) -> Vector3<f64> {
        (self.min + self.max) * 0.5
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Parametric interval `[t0, t1]` of the ray inside the box, if any.
    pub fn ray_interval(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for i in 0..3 {
            if dir[i] == 0.0 {
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
            } else {
                let a = (self.min[i] - origin[i]) / dir[i];
                let b = (self.max[i] - origin[i]) / dir[i];
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                t0 = t0.max(lo);
                t1 = t1.min(hi);
            }
        }
        (t0 <= t1).then_some((t0, t1))
    }
}

/// Regular grid of cubic cells.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    /// World position of the minimum corner of cell (0, 0, 0).
    pub origin: Vector3<f64>,
    pub resolution: f64,
    pub dims: [usize; 3],
}

impl GridSpec {
    pub fn new(origin: Vector3<f64>, resolution: f64, dims: [usize; 3]) -> Self {
        GridSpec { origin, resolution, dims }
    }

    /// Grid covering `extent` metres, centred on `center` in x/y and starting
    /// at `floor_z` in z.
    pub fn centered(center_xy: [f64; 2], floor_z: f64, extent: [f64; 3], resolution: f64) -> Self {
        let dims = [
            libm::round(extent[0] / resolution) as usize,
            libm::round(extent[1] / resolution) as usize,
            libm::round(extent[2] / resolution) as usize,
        ];
        // snap the origin to a multiple of the resolution so that cells
        // line up across grids sharing a resolution
        let snap = |v: f64| libm::round(v / resolution) * resolution;
        let origin = Vector3::new(
            snap(center_xy[0] - dims[0] as f64 * resolution / 2.0),
            snap(center_xy[1] - dims[1] as f64 * resolution / 2.0),
            floor_z,
        );
        GridSpec { origin, resolution, dims }
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self) -> Aabb {
        let size = Vector3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64)
            * self.resolution;
        Aabb::new(self.origin, self.origin + size)
    }

    pub fn contains(&self, v: VoxelIndex) -> bool {
        v.x >= 0
            && v.y >= 0
            && v.z >= 0
            && (v.x as usize) < self.dims[0]
            && (v.y as usize) < self.dims[1]
            && (v.z as usize) < self.dims[2]
    }

    /// Flat storage offset, x fastest.
    pub fn linear(&self, v: VoxelIndex) -> Option<usize> {
        self.contains(v).then(|| {
            v.x as usize + self.dims[0] * (v.y as usize + self.dims[1] * v.z as usize)
        })
    }

    pub fn from_linear(&self, i: usize) -> VoxelIndex {
        let x = i % self.dims[0];
        let y = (i / self.dims[0]) % self.dims[1];
        let z = i / (self.dims[0] * self.dims[1]);
        VoxelIndex::new(x as i32, y as i32, z as i32)
    }

    /// Index of the cell containing `p` (may lie outside the grid).
    pub fn index_of(&self, p: &Vector3<f64>) -> VoxelIndex {
        let f = |i: usize| libm::floor((p[i] - self.origin[i]) / self.resolution) as i32;
        VoxelIndex::new(f(0), f(1), f(2))
    }

    pub fn center_of(&self, v: VoxelIndex) -> Vector3<f64> {
        self.origin
            + Vector3::new(v.x as f64 + 0.5, v.y as f64 + 0.5, v.z as f64 + 0.5) * self.resolution
    }

    /// Walk the cells pierced by the segment `origin + t * dir`,
    /// `t in [0, max_dist]`, clipped to the grid, in order of increasing `t`.
    ///
    /// The visitor receives the cell and the ray parameters where the ray
    /// enters and leaves it; returning `false` stops the walk. Each cell is
    /// visited exactly once. A cell is entered only if the ray spends a
    /// positive length in it.
    pub fn walk<F>(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, max_dist: f64, mut visit: F)
    where
        F: FnMut(VoxelIndex, f64, f64) -> bool,
    {
        const EPS: f64 = 1e-12;
        let Some((enter, exit)) = self.bounds().ray_interval(origin, dir) else {
            return;
        };
        let t_start = enter.max(0.0);
        let t_end = exit.min(max_dist);
        if t_end - t_start <= EPS {
            return;
        }
        let r = self.resolution;
        // a start exactly on a cell face belongs to the cell the ray moves into
        let start = origin + dir * t_start;
        let mut cell = VoxelIndex::new(0, 0, 0);
        let mut step = [0i32; 3];
        let mut t_next = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..3 {
            let rel = (start[a] - self.origin[a]) / r;
            let mut c = libm::floor(rel);
            if dir[a] < 0.0 && rel == c {
                c -= 1.0;
            }
            let c = (c as i32).clamp(0, self.dims[a] as i32 - 1);
            match a {
                0 => cell.x = c,
                1 => cell.y = c,
                _ => cell.z = c,
            }
            if dir[a] > 0.0 {
                step[a] = 1;
                let boundary = self.origin[a] + (c + 1) as f64 * r;
                t_next[a] = (boundary - origin[a]) / dir[a];
                t_delta[a] = r / dir[a];
            } else if dir[a] < 0.0 {
                step[a] = -1;
                let boundary = self.origin[a] + c as f64 * r;
                t_next[a] = (boundary - origin[a]) / dir[a];
                t_delta[a] = -r / dir[a];
            }
        }
        let mut t_in = t_start;
        loop {
            let axis = if t_next[0] <= t_next[1] && t_next[0] <= t_next[2] {
                0
            } else if t_next[1] <= t_next[2] {
                1
            } else {
                2
            };
            let t_out = t_next[axis].min(t_end);
            if !visit(cell, t_in, t_out) {
                return;
            }
            if t_next[axis] >= t_end - EPS {
                return;
            }
            t_in = t_next[axis];
            cell.add(axis, step[axis]);
            t_next[axis] += t_delta[axis];
            let c = cell.get(axis);
            if c < 0 || c >= self.dims[axis] as i32 {
                return;
            }
        }
    }

    pub fn traverse_cells(
        &self,
        origin: &Vector3<f64>,
        dir: &Vector3<f64>,
        max_dist: f64,
    ) -> Vec<VoxelIndex> {
        let mut out = Vec::new();
        self.walk(origin, dir, max_dist, |c, _, _| {
            out.push(c);
            true
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use proptest::prelude::*;

    fn grid() -> GridSpec {
        GridSpec::new(Vector3::zeros(), 0.03, [40, 40, 40])
    }

    /// Independent oracle: sample the segment densely and collect the cells.
    fn fine_sample(g: &GridSpec, o: &Vector3<f64>, d: &Vector3<f64>, len: f64) -> BTreeSet<VoxelIndex> {
        let step = g.resolution / 100.0;
        let n = (len / step) as usize;
        let mut set = BTreeSet::new();
        for i in 0..=n {
            let t = (i as f64 * step).min(len);
            let c = g.index_of(&(o + d * t));
            if g.contains(c) {
                set.insert(c);
            }
        }
        set
    }

    #[test]
    fn axis_aligned_three_cells() {
        let g = grid();
        let cells = g.traverse_cells(&Vector3::new(0.03, 0.1, 0.1), &Vector3::x(), 0.09);
        assert_eq!(
            cells,
            alloc::vec![
                VoxelIndex::new(1, 3, 3),
                VoxelIndex::new(2, 3, 3),
                VoxelIndex::new(3, 3, 3)
            ]
        );
    }

    #[test]
    fn single_cell_segment() {
        let g = grid();
        let cells = g.traverse_cells(&Vector3::new(0.101, 0.101, 0.101), &Vector3::y(), 0.005);
        assert_eq!(cells.len(), 1);
    }

    #[test]
    fn diagonal_matches_fine_sampling() {
        let g = grid();
        let o = Vector3::new(0.013, 0.021, 0.5);
        let d = Vector3::new(0.8, 0.6, 0.0);
        let mine: BTreeSet<_> = g.traverse_cells(&o, &d, 0.9).into_iter().collect();
        assert_eq!(mine, fine_sample(&g, &o, &d, 0.9));
    }

    #[test]
    fn starts_outside_grid() {
        let g = grid();
        let o = Vector3::new(-1.0, 0.5, 0.5);
        let cells = g.traverse_cells(&o, &Vector3::x(), 10.0);
        assert_eq!(cells.len(), 40);
        assert_eq!(cells[0].x, 0);
        assert!(g.traverse_cells(&o, &(-Vector3::x()), 10.0).is_empty());
    }

    proptest! {
        #[test]
        fn walk_equals_fine_sampling(
            ox in 0.05f64..1.15, oy in 0.05f64..1.15, oz in 0.05f64..1.15,
            theta in 0.0f64..6.28, phi in -1.5f64..1.5, len in 0.01f64..0.8
        ) {
            let g = grid();
            let o = Vector3::new(ox, oy, oz);
            let d = Vector3::new(libm::cos(theta) * libm::cos(phi), libm::sin(theta) * libm::cos(phi), libm::sin(phi));
            let walked = g.traverse_cells(&o, &d, len);
            let set: BTreeSet<_> = walked.iter().copied().collect();
            prop_assert_eq!(set.len(), walked.len(), "duplicate cells");
            // the oracle may miss cells clipped by less than its sampling step
            let oracle = fine_sample(&g, &o, &d, len);
            prop_assert!(oracle.is_subset(&set));
            for c in set.difference(&oracle) {
                // any extra cell must be one the segment only grazes
                let mut seg = 0.0;
                g.walk(&o, &d, len, |cc, a, b| { if cc == *c { seg = b - a; } true });
                prop_assert!(seg < g.resolution / 50.0);
            }
            for w in walked.windows(2) {
                let diff = (w[0].x - w[1].x).abs() + (w[0].y - w[1].y).abs() + (w[0].z - w[1].z).abs();
                prop_assert_eq!(diff, 1);
            }
        }

        #[test]
        fn forward_and_reverse_visit_same_cells(
            ax in 0.0f64..1.2, ay in 0.0f64..1.2, az in 0.0f64..1.2,
            bx in 0.0f64..1.2, by in 0.0f64..1.2, bz in 0.0f64..1.2,
        ) {
            let g = grid();
            let a = Vector3::new(ax, ay, az);
            let b = Vector3::new(bx, by, bz);
            let len = (b - a).norm();
            prop_assume!(len > 1e-6);
            let d = (b - a) / len;
            let fwd: BTreeSet<_> = g.traverse_cells(&a, &d, len).into_iter().collect();
            let bwd: BTreeSet<_> = g.traverse_cells(&b, &(-d), len).into_iter().collect();
            prop_assert_eq!(fwd, bwd);
        }
    }
}
