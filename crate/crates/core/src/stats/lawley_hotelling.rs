use alloc::vec::Vec;

use crate::fdata::{integrate_matrix_curve, TimeGrid, WindowSummaries};
use crate::linalg::{spd_inverse, trace_of_product};

/// Lawley–Hotelling trace `Trace(H_w E_w⁻¹)` of the two-group functional
/// MANOVA, or `None` when `E_w` is singular.
///
/// `H_w` is the integrated between-group scatter around the grand mean and
/// `E_w = Σ_i ∫ X_i X_iᵀ − |w| ∫ X̄_w X̄_wᵀ − |w^c| ∫ X̄_{w^c} X̄_{w^c}ᵀ`.
pub fn lh_statistic(summ: &WindowSummaries<'_>, grid: &TimeGrid) -> Option<f64> {
    let m = summ.moments;
    let p = m.integrated_second.len().isqrt();
    let t_len = grid.len();
    let (nw, nc, n) = (summ.inside as f64, summ.outside as f64, summ.n() as f64);
    if summ.inside == 0 || summ.outside == 0 {
        return None;
    }
    let comp = summ.complement_sum();

    let mut between = Vec::with_capacity(t_len * p * p);
    let mut group_means = Vec::with_capacity(t_len * p * p);
    for t in 0..t_len {
        let mw: Vec<f64> = (0..p).map(|a| summ.window_sum[t * p + a] / nw).collect();
        let mc: Vec<f64> = (0..p).map(|a| comp[t * p + a] / nc).collect();
        let mg: Vec<f64> = (0..p).map(|a| m.total[t * p + a] / n).collect();
        for a in 0..p {
            for b in 0..p {
                between.push(
                    nw * (mw[a] - mg[a]) * (mw[b] - mg[b]) + nc * (mc[a] - mg[a]) * (mc[b] - mg[b]),
                );
                group_means.push(nw * mw[a] * mw[b] + nc * mc[a] * mc[b]);
            }
        }
    }
    let h = integrate_matrix_curve(&between, grid).ok()?;
    let g = integrate_matrix_curve(&group_means, grid).ok()?;
    let e: Vec<f64> = m
        .integrated_second
        .iter()
        .zip(&g)
        .map(|(s, g)| s - g)
        .collect();
    let e_inv = spd_inverse(&e, p)?;
    Some(trace_of_product(&h, &e_inv, p))
}
