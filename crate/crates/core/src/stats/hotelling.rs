use alloc::vec::Vec;

use crate::fdata::{FunctionalDataset, WindowSummaries};
use crate::linalg::{quadratic_form, spd_inverse};

/// `max_t T_n(t)` where `T_n(t)` is the two-sample Hotelling T² between the
/// window and its complement with the pooled covariance (divisor `n − 2`).
///
/// Grid points with a singular pooled covariance are skipped; `None` when
/// every grid point is skipped or `n < 3`.
pub fn hotelling_sup_statistic(
    summ: &WindowSummaries<'_>,
    data: &FunctionalDataset,
) -> Option<f64> {
    let p = data.n_vars();
    let n = summ.n();
    if n < 3 || summ.inside == 0 || summ.outside == 0 {
        return None;
    }
    let (nw, nc) = (summ.inside as f64, summ.outside as f64);
    let comp = summ.complement_sum();
    let mut best: Option<f64> = None;
    let mut pooled = alloc::vec![0.0; p * p];
    for t in 0..data.n_times() {
        let mw: Vec<f64> = (0..p).map(|a| summ.window_sum[t * p + a] / nw).collect();
        let mc: Vec<f64> = (0..p).map(|a| comp[t * p + a] / nc).collect();
        for a in 0..p {
            for b in 0..p {
                pooled[a * p + b] = (summ.moments.second[(t * p + a) * p + b]
                    - nw * mw[a] * mw[b]
                    - nc * mc[a] * mc[b])
                    / (n as f64 - 2.0);
            }
        }
        let Some(inv) = spd_inverse(&pooled, p) else {
            continue;
        };
        let diff: Vec<f64> = mw.iter().zip(&mc).map(|(a, b)| a - b).collect();
        let value = nw * nc / n as f64 * quadratic_form(&inv, &diff);
        best = Some(best.map_or(value, |b: f64| b.max(value)));
    }
    best
}
