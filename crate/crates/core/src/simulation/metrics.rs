use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectionMetrics {
    /// `|detected ∩ true| / |true|`.
    pub tpr: f64,
    /// `|detected \ true| / |true^c|`.
    pub fpr: f64,
    /// `|detected ∩ true| / |detected|`.
    pub ppv: f64,
    /// Harmonic mean of `ppv` and `tpr`; `0` when both vanish.
    pub f_measure: f64,
}

/// Detection quality of a cluster against the planted one. Metrics are only
/// recorded for rejected replications, so `None` is returned otherwise.
///
/// Both site lists must be ascending and within `0..n_sites`.
pub fn evaluate_detection(
    detected: Option<&[usize]>,
    true_cluster: &[usize],
    n_sites: usize,
    rejected: bool,
) -> Option<DetectionMetrics> {
    if !rejected {
        return None;
    }
    let detected = detected.unwrap_or(&[]);
    let hits = detected
        .iter()
        .filter(|s| true_cluster.binary_search(s).is_ok())
        .count();
    let false_hits = detected.len() - hits;
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let tpr = ratio(hits, true_cluster.len());
    let fpr = ratio(false_hits, n_sites - true_cluster.len());
    let ppv = ratio(hits, detected.len());
    let f_measure = if ppv + tpr > 0.0 {
        2.0 * ppv * tpr / (ppv + tpr)
    } else {
        0.0
    };
    Some(DetectionMetrics {
        tpr,
        fpr,
        ppv,
        f_measure,
    })
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties; `None` when either
/// series is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / num_traits::Float::sqrt(sxx * syy))
}
