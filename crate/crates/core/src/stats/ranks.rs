//! Pointwise multivariate spatial ranks with a sphericizing transform.
//!
//! At each grid point the rank of site `i` is the mean spatial sign of the
//! transformed differences `A (X_i − X_j)`. `A` is chosen by fixed-point
//! iteration so that the ranks look spherical:
//! `(p/n) Σ R_i R_iᵀ = ((1/n) Σ R_iᵀ R_i) I_p`.
//!
//! All sums run over the points sorted lexicographically, so relabelling the
//! sites permutes the ranks bit for bit.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fdata::FunctionalDataset;
use crate::geometry::ScanWindow;
use crate::linalg::{determinant, frobenius, inverse_sqrt_symmetric, mat_mul, mat_vec};

/// Relative Frobenius residual accepted by [`tyler_transform`].
pub const TYLER_TOLERANCE: f64 = 1e-6;
pub const TYLER_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SphericizingTransform {
    /// Row-major `p × p`, determinant 1.
    pub matrix: Vec<f64>,
    /// Fixed-point updates applied before the residual check passed.
    pub iterations: usize,
    pub residual: f64,
}

fn lexicographic(points: &[f64], p: usize) -> Vec<usize> {
    let n = points.len() / p;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&points[a * p..(a + 1) * p], &points[b * p..(b + 1) * p]);
        x.iter()
            .zip(y)
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Spatial ranks `R_i = (1/n) Σ_j sgn(A X_i − A X_j)` of `points` (`n × p`),
/// summed over `order`.
fn ranks_in_order(points: &[f64], p: usize, transform: &[f64], order: &[usize]) -> Vec<f64> {
    let n = order.len();
    let mut y = alloc::vec![0.0; n * p];
    for (slot, &i) in order.iter().enumerate() {
        mat_vec(
            transform,
            &points[i * p..(i + 1) * p],
            &mut y[slot * p..(slot + 1) * p],
        );
    }
    let mut sorted_ranks = alloc::vec![0.0; n * p];
    let mut diff = alloc::vec![0.0; p];
    for a in 0..n {
        for b in (a + 1)..n {
            let mut sq = 0.0;
            for v in 0..p {
                diff[v] = y[a * p + v] - y[b * p + v];
                sq += diff[v] * diff[v];
            }
            if sq > 0.0 {
                let inv = 1.0 / sq.sqrt();
                for v in 0..p {
                    let s = diff[v] * inv;
                    sorted_ranks[a * p + v] += s;
                    sorted_ranks[b * p + v] -= s;
                }
            }
        }
    }
    let mut ranks = alloc::vec![0.0; n * p];
    for (slot, &i) in order.iter().enumerate() {
        for v in 0..p {
            ranks[i * p + v] = sorted_ranks[slot * p + v] / n as f64;
        }
    }
    ranks
}

/// Spatial ranks of `points` (`n × p`) under `transform`.
pub fn spatial_ranks(points: &[f64], p: usize, transform: &[f64]) -> Vec<f64> {
    ranks_in_order(points, p, transform, &lexicographic(points, p))
}

/// `‖(p/n) Σ R_i R_iᵀ − ((1/n) Σ R_iᵀ R_i) I‖_F` divided by `(1/n) Σ R_iᵀ R_i`.
/// Returns `0` when every rank is zero.
pub fn sphericity_residual(ranks: &[f64], p: usize) -> f64 {
    let order: Vec<usize> = (0..ranks.len() / p).collect();
    let (outer, scale) = scatter(ranks, p, &order);
    if scale == 0.0 {
        return 0.0;
    }
    residual_of(&outer, scale, p)
}

/// `(Σ R_i R_iᵀ, Σ R_iᵀ R_i)`, summed over `order`.
fn scatter(ranks: &[f64], p: usize, order: &[usize]) -> (Vec<f64>, f64) {
    let mut outer = alloc::vec![0.0; p * p];
    let mut scale = 0.0;
    for &i in order {
        let r = &ranks[i * p..(i + 1) * p];
        for a in 0..p {
            scale += r[a] * r[a];
            for b in 0..p {
                outer[a * p + b] += r[a] * r[b];
            }
        }
    }
    (outer, scale)
}

fn residual_of(outer: &[f64], scale: f64, p: usize) -> f64 {
    // (p/n) outer − (scale/n) I, relative to scale/n.
    let mut m = alloc::vec![0.0; p * p];
    for a in 0..p {
        for b in 0..p {
            m[a * p + b] = p as f64 * outer[a * p + b] / scale - if a == b { 1.0 } else { 0.0 };
        }
    }
    frobenius(&m)
}

fn normalize_determinant(a: &mut [f64], p: usize) -> bool {
    let det = determinant(a, p);
    if !(det > 0.0) || !det.is_finite() {
        return false;
    }
    let c = det.powf(-1.0 / p as f64);
    a.iter_mut().for_each(|v| *v *= c);
    true
}

struct Fit {
    transform: SphericizingTransform,
    ranks: Vec<f64>,
}

fn fit(points: &[f64], p: usize) -> Result<Fit> {
    if p == 0 || points.len() % p != 0 {
        return Err(Error::DimensionMismatch("points are not n × p".into()));
    }
    let n = points.len() / p;
    if n <= p {
        return Err(Error::InvalidParameter(alloc::format!(
            "sphericizing transform needs n > p, got n = {n}, p = {p}"
        )));
    }
    let order = lexicographic(points, p);

    let mut mean = alloc::vec![0.0; p];
    for &i in &order {
        for v in 0..p {
            mean[v] += points[i * p + v];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = alloc::vec![0.0; p * p];
    for &i in &order {
        for a in 0..p {
            for b in 0..p {
                cov[a * p + b] += (points[i * p + a] - mean[a]) * (points[i * p + b] - mean[b]);
            }
        }
    }
    cov.iter_mut().for_each(|c| *c /= (n - 1) as f64);

    let rank_deficient = Error::RankDeficient { time_index: 0 };
    let mut a = inverse_sqrt_symmetric(&cov, p).ok_or(rank_deficient.clone())?;
    if !normalize_determinant(&mut a, p) {
        return Err(rank_deficient);
    }

    let mut iterations = 0;
    loop {
        let ranks = ranks_in_order(points, p, &a, &order);
        let (outer, scale) = scatter(&ranks, p, &order);
        if !(scale > 0.0) {
            return Err(Error::RankDeficient { time_index: 0 });
        }
        let residual = residual_of(&outer, scale, p);
        if residual <= TYLER_TOLERANCE {
            return Ok(Fit {
                transform: SphericizingTransform {
                    matrix: a,
                    iterations,
                    residual,
                },
                ranks,
            });
        }
        if iterations == TYLER_MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                iterations,
                residual,
            });
        }
        let m: Vec<f64> = outer.iter().map(|o| p as f64 * o / scale).collect();
        let step = inverse_sqrt_symmetric(&m, p).ok_or(Error::RankDeficient { time_index: 0 })?;
        a = mat_mul(&step, &a, p);
        if !normalize_determinant(&mut a, p) {
            return Err(Error::RankDeficient { time_index: 0 });
        }
        iterations += 1;
    }
}

/// Sphericizing transform of `n` points in `R^p` (row-major `n × p`).
///
/// Starts from the inverse square root of the sample covariance and iterates
/// `A ← M^{-1/2} A` with `M = p Σ R_i R_iᵀ / Σ R_iᵀ R_i`, renormalising to
/// determinant 1, until the relative sphericity residual is at most
/// [`TYLER_TOLERANCE`].
pub fn tyler_transform(points: &[f64], p: usize) -> Result<SphericizingTransform> {
    fit(points, p).map(|f| f.transform)
}

/// Per-grid-point transforms and ranks of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RankField {
    n_sites: usize,
    n_vars: usize,
    n_times: usize,
    transforms: Vec<SphericizingTransform>,
    /// Site-major `n × T × p`, like [`FunctionalDataset`].
    ranks: Vec<f64>,
    /// `Σ_i R_i(t)ᵀ R_i(t)` per grid point.
    norms: Vec<f64>,
    /// `Σ_i R_i(t)` per grid point (`T × p`).
    totals: Vec<f64>,
}

impl RankField {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn transform(&self, t: usize) -> &SphericizingTransform {
        &self.transforms[t]
    }

    #[inline]
    pub fn rank(&self, i: usize, t: usize) -> &[f64] {
        let p = self.n_vars;
        let start = (i * self.n_times + t) * p;
        &self.ranks[start..start + p]
    }

    /// All ranks of site `i` as a `T × p` block.
    #[inline]
    pub fn site_block(&self, i: usize) -> &[f64] {
        let len = self.n_times * self.n_vars;
        &self.ranks[i * len..(i + 1) * len]
    }

    pub fn norm(&self, t: usize) -> f64 {
        self.norms[t]
    }

    pub fn total(&self, t: usize) -> &[f64] {
        &self.totals[t * self.n_vars..(t + 1) * self.n_vars]
    }

    /// Ranks of every site at grid point `t`, `n × p`.
    pub fn ranks_at(&self, t: usize) -> Vec<f64> {
        (0..self.n_sites)
            .flat_map(|i| self.rank(i, t).iter().copied())
            .collect()
    }

    /// Rank field of the dataset whose site `i` carries the curve of site
    /// `perm[i]`. The transforms depend only on the point multiset and are
    /// kept as they are.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let len = self.n_times * self.n_vars;
        let mut ranks = Vec::with_capacity(self.ranks.len());
        for &src in perm {
            ranks.extend_from_slice(&self.ranks[src * len..(src + 1) * len]);
        }
        Self {
            ranks,
            ..self.clone()
        }
    }
}

/// Fits the sphericizing transform and the ranks at every grid point.
pub fn compute_pointwise_ranks(data: &FunctionalDataset) -> Result<RankField> {
    let (n, p, t_len) = (data.n_sites(), data.n_vars(), data.n_times());
    let mut transforms = Vec::with_capacity(t_len);
    let mut ranks = alloc::vec![0.0; n * t_len * p];
    let mut norms = Vec::with_capacity(t_len);
    let mut totals = Vec::with_capacity(t_len * p);
    let mut points = alloc::vec![0.0; n * p];
    for t in 0..t_len {
        for i in 0..n {
            points[i * p..(i + 1) * p].copy_from_slice(data.point(i, t));
        }
        let fitted = fit(&points, p).map_err(|e| match e {
            Error::RankDeficient { .. } => Error::RankDeficient { time_index: t },
            other => other,
        })?;
        let mut norm = 0.0;
        let mut total = alloc::vec![0.0; p];
        // Canonical order keeps the sums bit-identical under relabelling.
        for i in lexicographic(&points, p) {
            let r = &fitted.ranks[i * p..(i + 1) * p];
            ranks[(i * t_len + t) * p..(i * t_len + t + 1) * p].copy_from_slice(r);
            for v in 0..p {
                norm += r[v] * r[v];
                total[v] += r[v];
            }
        }
        norms.push(norm);
        totals.extend(total);
        transforms.push(fitted.transform);
    }
    Ok(RankField {
        n_sites: n,
        n_vars: p,
        n_times: t_len,
        transforms,
        ranks,
        norms,
        totals,
    })
}

/// `max_t W(t)` with
/// `W(t) = pn / Σ_i R_iᵀR_i · (|w| ‖R̄_w‖² + |w^c| ‖R̄_{w^c}‖²)`.
///
/// Grid points where every rank vanishes are skipped.
pub fn wilcoxon_sup_statistic(ranks: &RankField, window: &ScanWindow) -> Option<f64> {
    let (n, p) = (ranks.n_sites(), ranks.n_vars());
    let nw = window.size();
    if nw == 0 || nw >= n {
        return None;
    }
    let nc = n - nw;
    let mut best: Option<f64> = None;
    for t in 0..ranks.n_times() {
        let norm = ranks.norm(t);
        if !(norm > 0.0) {
            continue;
        }
        let mut sum_w = alloc::vec![0.0; p];
        let mut sum_c = alloc::vec![0.0; p];
        for i in 0..n {
            let target = if window.contains(i) {
                &mut sum_w
            } else {
                &mut sum_c
            };
            for (s, r) in target.iter_mut().zip(ranks.rank(i, t)) {
                *s += r;
            }
        }
        let sq = |s: &[f64], k: usize| s.iter().map(|v| (v / k as f64).powi(2)).sum::<f64>();
        let value =
            (p * n) as f64 / norm * (nw as f64 * sq(&sum_w, nw) + nc as f64 * sq(&sum_c, nc));
        best = Some(best.map_or(value, |b: f64| b.max(value)));
    }
    best
}
