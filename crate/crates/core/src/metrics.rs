//! Reconstruction coverage against a reference cloud.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::Vector3;

use crate::voxel::OccupancyMap;

/// Greedy incremental coverage: partial points are taken in order, each
/// claiming the nearest still-uncovered reference point within `eps`
/// (distance `<= eps`, lowest index on ties). Returns the covered fraction.
pub fn coverage(partial: &[Vector3<f64>], reference: &[Vector3<f64>], eps: f64) -> f64 {
    if reference.is_empty() {
        return 0.0;
    }
    covered_mask(partial, reference, eps).iter().filter(|&&c| c).count() as f64 / reference.len() as f64
}

pub fn covered_mask(partial: &[Vector3<f64>], reference: &[Vector3<f64>], eps: f64) -> Vec<bool> {
    let key = |p: &Vector3<f64>| {
        (
            libm::floor(p.x / eps) as i64,
            libm::floor(p.y / eps) as i64,
            libm::floor(p.z / eps) as i64,
        )
    };
    let mut buckets: BTreeMap<(i64, i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, r) in reference.iter().enumerate() {
        buckets.entry(key(r)).or_default().push(i);
    }
    let mut covered = vec![false; reference.len()];
    for p in partial {
        let (kx, ky, kz) = key(p);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(list) = buckets.get(&(kx + dx, ky + dy, kz + dz)) else {
                        continue;
                    };
                    for &i in list {
                        if covered[i] {
                            continue;
                        }
                        let d = (p - reference[i]).norm();
                        if d <= eps && best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                            best = Some((d, i));
                        }
                    }
                }
            }
        }
        if let Some((_, i)) = best {
            covered[i] = true;
        }
    }
    covered
}

/// Centres of the occupied cells, in storage order.
pub fn reconstruct_cloud(map: &OccupancyMap) -> Vec<Vector3<f64>> {
    map.occupied_centers()
}
