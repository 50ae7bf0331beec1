//! Functional spatial signs for the sign-based baseline index.
//!
//! `sgn(f) = f / ‖f‖` in `L²(𝒯, R^p)` with the trapezoid norm and
//! `sgn(0) = 0`. The double sum over window/complement pairs collapses to
//! `Σ_{i∈w} D_i` with `D_i = Σ_k sgn(X_k − X_i)`, because the pairs inside
//! the window cancel.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::fdata::{FunctionalDataset, TimeGrid};
use crate::geometry::ScanWindow;

fn l2_norm_sq(f: &[f64], grid: &TimeGrid, p: usize) -> f64 {
    f.chunks_exact(p)
        .zip(grid.weights())
        .map(|(x, w)| w * x.iter().map(|v| v * v).sum::<f64>())
        .sum()
}

/// `sgn(X_j − X_i)` as a `T × p` block.
pub fn functional_sign(data: &FunctionalDataset, i: usize, j: usize) -> Vec<f64> {
    let diff: Vec<f64> = data
        .curve(j)
        .iter()
        .zip(data.curve(i))
        .map(|(a, b)| a - b)
        .collect();
    let norm = l2_norm_sq(&diff, data.grid(), data.n_vars()).sqrt();
    if norm > 0.0 {
        diff.into_iter().map(|d| d / norm).collect()
    } else {
        alloc::vec![0.0; diff.len()]
    }
}

/// `D_i = Σ_k sgn(X_k − X_i)` for every site.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSigns {
    n_sites: usize,
    block: usize,
    sums: Vec<f64>,
}

impl FunctionalSigns {
    pub fn new(data: &FunctionalDataset) -> Self {
        let n = data.n_sites();
        let block = data.n_vars() * data.n_times();
        // Canonical summation order: curves sorted lexicographically.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            data.curve(a)
                .iter()
                .zip(data.curve(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut sorted = alloc::vec![0.0; n * block];
        for a in 0..n {
            for b in (a + 1)..n {
                // sgn(X_b − X_a) adds to D_a and its negation to D_b.
                let s = functional_sign(data, order[a], order[b]);
                for (k, v) in s.iter().enumerate() {
                    sorted[a * block + k] += v;
                    sorted[b * block + k] -= v;
                }
            }
        }
        let mut sums = alloc::vec![0.0; n * block];
        for (slot, &i) in order.iter().enumerate() {
            sums[i * block..(i + 1) * block]
                .copy_from_slice(&sorted[slot * block..(slot + 1) * block]);
        }
        Self {
            n_sites: n,
            block,
            sums,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// `D_i` as a `T × p` block.
    #[inline]
    pub fn site_block(&self, i: usize) -> &[f64] {
        &self.sums[i * self.block..(i + 1) * self.block]
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut sums = Vec::with_capacity(self.sums.len());
        for &src in perm {
            sums.extend_from_slice(self.site_block(src));
        }
        Self {
            sums,
            ..self.clone()
        }
    }
}

/// `‖Σ_{i∈w} Σ_{j∉w} sgn(X_j − X_i)‖`, without the `1/√(|w||w^c|)` factor.
pub fn npfss_raw_norm(
    signs: &FunctionalSigns,
    grid: &TimeGrid,
    p: usize,
    window: &ScanWindow,
) -> f64 {
    let mut acc = alloc::vec![0.0; signs.block];
    for &i in &window.members {
        for (a, d) in acc.iter_mut().zip(signs.site_block(i)) {
            *a += d;
        }
    }
    l2_norm_sq(&acc, grid, p).sqrt()
}

/// `U(w) = ‖Σ_{i∈w} Σ_{j∉w} sgn(X_j − X_i)‖ / √(|w||w^c|)` from precomputed
/// signs.
///
/// Under random labelling the double sum has covariance proportional to
/// `|w||w^c|`, so this scaling puts windows of every size on the same
/// footing. Dividing by `|w||w^c|` instead makes single sites dominate, and
/// the maximum over single sites does not change under relabelling.
pub fn npfss_with_signs(
    signs: &FunctionalSigns,
    grid: &TimeGrid,
    p: usize,
    window: &ScanWindow,
) -> Option<f64> {
    let (n, nw) = (signs.n_sites(), window.size());
    if nw == 0 || nw >= n {
        return None;
    }
    Some(npfss_raw_norm(signs, grid, p, window) / ((nw * (n - nw)) as f64).sqrt())
}

pub fn npfss_statistic(data: &FunctionalDataset, window: &ScanWindow) -> Option<f64> {
    let signs = FunctionalSigns::new(data);
    npfss_with_signs(&signs, data.grid(), data.n_vars(), window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identical_curves_are_neutral() {
        let grid = TimeGrid::uniform(0.0, 1.0, 3).unwrap();
        let d = FunctionalDataset::from_values(
            3,
            1,
            grid,
            vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 0.0, 0.0, 5.0],
        )
        .unwrap();
        assert!(functional_sign(&d, 0, 1).iter().all(|v| *v == 0.0));
        // w = {0}: only the pair (0, 2) contributes.
        let w = ScanWindow {
            center: 0,
            radius: 0.0,
            members: vec![0],
        };
        let s = functional_sign(&d, 0, 2);
        let norm = l2_norm_sq(&s, d.grid(), 1).sqrt();
        let u = npfss_statistic(&d, &w).unwrap();
        assert!((u - norm / 2f64.sqrt()).abs() < 1e-14);
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn signs_are_unit_or_zero() {
        let grid = TimeGrid::uniform(0.0, 2.0, 5).unwrap();
        let d = FunctionalDataset::from_values(
            2,
            2,
            grid,
            (0..20).map(|k| (k * k % 7) as f64).collect(),
        )
        .unwrap();
        let s = functional_sign(&d, 0, 1);
        assert!((l2_norm_sq(&s, d.grid(), 2) - 1.0).abs() < 1e-14);
    }
}
