//! One-pass evaluation of every window, optionally under a relabelling.
//!
//! The curves are centred on the grand mean once. With `C_w(t)` the centred
//! window sum and `k = n / (|w| |w^c|)` every index reduces to `C_w`:
//!
//! * `H_w = k ∫ C_w C_wᵀ`, `E_w = P − H_w` with `P = Σ_i ∫ X̃_i X̃_iᵀ`;
//! * the pooled covariance is `(Q(t) − k C_w C_wᵀ) / (n − 2)`, so by
//!   Sherman–Morrison `T_n(t) = (n − 2) k a / (1 − k a)` with
//!   `a = C_wᵀ Q(t)⁻¹ C_w`;
//! * rank and sign indices use window sums of the precomputed ranks/signs.
//!
//! `P`, `Q(t)⁻¹`, ranks and signs do not change under relabelling, so a
//! permutation replicate only re-accumulates prefix sums.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::ranks::{compute_pointwise_ranks, RankField};
use super::signs::FunctionalSigns;
use super::{most_likely_cluster, Method, ScanOutcome, StatisticValue};
use crate::error::{Error, Result};
use crate::fdata::FunctionalDataset;
use crate::geometry::WindowSet;
use crate::linalg::{spd_inverse, trace_of_product, RCOND_THRESHOLD};

/// Per-window values of every active method; `None` marks a degenerate
/// window or an inactive method.
pub type WindowValues = [Option<f64>; 4];

/// Site curves in variable-major blocks (`p` rows of length `T`), so that
/// every per-window reduction runs over long contiguous time loops.
fn variable_major(time_major: &[f64], n: usize, p: usize, t_len: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; n * p * t_len];
    for i in 0..n {
        let src = &time_major[i * t_len * p..(i + 1) * t_len * p];
        let dst = &mut out[i * p * t_len..(i + 1) * p * t_len];
        for t in 0..t_len {
            for v in 0..p {
                dst[v * t_len + t] = src[t * p + v];
            }
        }
    }
    out
}

struct Pmfss {
    total_scatter: Vec<f64>,
}

struct Mdffss {
    /// Entries of `Q(t)⁻¹` as `p × p` rows of length `T`; zero where
    /// singular.
    q_inv: Vec<f64>,
    regular: Vec<bool>,
}

struct Mrbfss {
    field: RankField,
    /// Variable-major rank blocks per site.
    blocks: Vec<f64>,
    /// Variable-major column sums `Σ_i R_i(t)`.
    total: Vec<f64>,
    /// `p n / Σ_i R_iᵀ R_i`, or `None` where every rank vanishes.
    scale: Vec<Option<f64>>,
}

struct Npfss {
    signs: FunctionalSigns,
    blocks: Vec<f64>,
}

pub struct ScanEngine<'a> {
    windows: &'a WindowSet,
    n: usize,
    p: usize,
    t_len: usize,
    weights: Vec<f64>,
    /// Centred curves, variable-major.
    centered: Vec<f64>,
    pmfss: Option<Pmfss>,
    mdffss: Option<Mdffss>,
    ranks: Option<Mrbfss>,
    signs: Option<Npfss>,
}

impl<'a> ScanEngine<'a> {
    /// Precomputes everything the requested methods need.
    pub fn new(
        data: &FunctionalDataset,
        windows: &'a WindowSet,
        methods: &[Method],
    ) -> Result<Self> {
        let (n, p, t_len) = (data.n_sites(), data.n_vars(), data.n_times());
        if windows.n_sites() != n {
            return Err(Error::DimensionMismatch(alloc::format!(
                "windows built for {} sites, dataset has {}",
                windows.n_sites(),
                n
            )));
        }
        if windows.is_empty() {
            return Err(Error::EmptyWindowSet);
        }
        let wants = |m: Method| methods.contains(&m);
        if wants(Method::Mdffss) && n < 3 {
            return Err(Error::InvalidParameter(
                "MDFFSS needs at least 3 sites".into(),
            ));
        }

        let mut mean = alloc::vec![0.0; t_len * p];
        for i in 0..n {
            for (m, x) in mean.iter_mut().zip(data.curve(i)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut centered = Vec::with_capacity(n * t_len * p);
        for i in 0..n {
            centered.extend(data.curve(i).iter().zip(&mean).map(|(x, m)| x - m));
        }

        let needs_scatter = wants(Method::Pmfss) || wants(Method::Mdffss);
        let mut q = Vec::new();
        if needs_scatter {
            q = alloc::vec![0.0; t_len * p * p];
            for i in 0..n {
                let block = &centered[i * t_len * p..(i + 1) * t_len * p];
                for t in 0..t_len {
                    let x = &block[t * p..(t + 1) * p];
                    let q_t = &mut q[t * p * p..(t + 1) * p * p];
                    for a in 0..p {
                        for b in 0..p {
                            q_t[a * p + b] += x[a] * x[b];
                        }
                    }
                }
            }
        }
        let weights = data.grid().weights().to_vec();

        let pmfss = wants(Method::Pmfss).then(|| {
            let mut total_scatter = alloc::vec![0.0; p * p];
            for t in 0..t_len {
                for (s, v) in total_scatter.iter_mut().zip(&q[t * p * p..(t + 1) * p * p]) {
                    *s += weights[t] * v;
                }
            }
            Pmfss { total_scatter }
        });
        let mdffss = wants(Method::Mdffss).then(|| {
            let mut q_inv = alloc::vec![0.0; p * p * t_len];
            let mut regular = alloc::vec![false; t_len];
            for t in 0..t_len {
                if let Some(inv) = spd_inverse(&q[t * p * p..(t + 1) * p * p], p) {
                    regular[t] = true;
                    for (ab, v) in inv.iter().enumerate() {
                        q_inv[ab * t_len + t] = *v;
                    }
                }
            }
            Mdffss { q_inv, regular }
        });
        let ranks = if wants(Method::Mrbfss) {
            let field = compute_pointwise_ranks(data)?;
            let mut flat = Vec::with_capacity(n * t_len * p);
            for i in 0..n {
                flat.extend_from_slice(field.site_block(i));
            }
            let mut totals = Vec::with_capacity(t_len * p);
            for t in 0..t_len {
                totals.extend_from_slice(field.total(t));
            }
            let scale = (0..t_len)
                .map(|t| {
                    let norm = field.norm(t);
                    (norm > 0.0).then(|| (p * n) as f64 / norm)
                })
                .collect();
            Some(Mrbfss {
                blocks: variable_major(&flat, n, p, t_len),
                total: variable_major(&totals, 1, p, t_len),
                scale,
                field,
            })
        } else {
            None
        };
        let signs = wants(Method::Npfss).then(|| {
            let signs = FunctionalSigns::new(data);
            let mut flat = Vec::with_capacity(n * t_len * p);
            for i in 0..n {
                flat.extend_from_slice(signs.site_block(i));
            }
            Npfss {
                blocks: variable_major(&flat, n, p, t_len),
                signs,
            }
        });

        let centered = variable_major(&centered, n, p, t_len);
        Ok(Self {
            windows,
            n,
            p,
            t_len,
            weights,
            centered,
            pmfss,
            mdffss,
            ranks,
            signs,
        })
    }

    pub fn windows(&self) -> &WindowSet {
        self.windows
    }

    pub fn has(&self, method: Method) -> bool {
        match method {
            Method::Pmfss => self.pmfss.is_some(),
            Method::Mdffss => self.mdffss.is_some(),
            Method::Mrbfss => self.ranks.is_some(),
            Method::Npfss => self.signs.is_some(),
        }
    }

    pub fn rank_field(&self) -> Option<&RankField> {
        self.ranks.as_ref().map(|r| &r.field)
    }

    pub fn signs(&self) -> Option<&FunctionalSigns> {
        self.signs.as_ref().map(|s| &s.signs)
    }

    /// Calls `visit(window index, values)` for every window, in window order.
    /// Under `perm`, site `s` carries the observation of site `perm[s]`.
    pub fn evaluate(&self, perm: Option<&[usize]>, mut visit: impl FnMut(usize, &WindowValues)) {
        let (n, p, t_len) = (self.n, self.p, self.t_len);
        let block = t_len * p;
        let row = |s: usize| perm.map_or(s, |q| q[s]);
        let need_x = self.pmfss.is_some() || self.mdffss.is_some();
        let sized = |on: bool| alloc::vec![0.0; if on { block } else { 0 }];
        let mut acc_x = sized(need_x);
        let mut acc_r = sized(self.ranks.is_some());
        let mut acc_d = sized(self.signs.is_some());
        let mut per_t = alloc::vec![0.0; t_len];
        let mut per_t2 = alloc::vec![0.0; t_len];
        let mut gram = alloc::vec![0.0; p * p];
        let mut e = alloc::vec![0.0; p * p];

        for (center, range) in self.windows.center_groups() {
            let order = self.windows.order(center);
            acc_x.iter_mut().for_each(|v| *v = 0.0);
            acc_r.iter_mut().for_each(|v| *v = 0.0);
            acc_d.iter_mut().for_each(|v| *v = 0.0);
            let mut len = 0;
            for index in range {
                let size = self.windows.get(index).size();
                while len < size {
                    let src = row(order[len]);
                    if need_x {
                        add(&mut acc_x, &self.centered[src * block..(src + 1) * block]);
                    }
                    if let Some(r) = &self.ranks {
                        add(&mut acc_r, &r.blocks[src * block..(src + 1) * block]);
                    }
                    if let Some(d) = &self.signs {
                        add(&mut acc_d, &d.blocks[src * block..(src + 1) * block]);
                    }
                    len += 1;
                }
                let (nw, nc) = (size, n - size);
                let k = n as f64 / (nw * nc) as f64;
                let mut values: WindowValues = [None; 4];

                if let Some(pm) = &self.pmfss {
                    for a in 0..p {
                        for b in a..p {
                            let g = weighted_dot(
                                &self.weights,
                                row_of(&acc_x, t_len, a),
                                row_of(&acc_x, t_len, b),
                            );
                            gram[a * p + b] = g;
                            gram[b * p + a] = g;
                        }
                    }
                    for ((e, s), g) in e.iter_mut().zip(&pm.total_scatter).zip(&gram) {
                        *e = s - k * g;
                    }
                    values[Method::Pmfss.slot()] =
                        spd_inverse(&e, p).map(|inv| k * trace_of_product(&gram, &inv, p));
                }

                if let Some(md) = &self.mdffss {
                    // per_t[t] = C(t)ᵀ Q(t)⁻¹ C(t)
                    per_t.iter_mut().for_each(|v| *v = 0.0);
                    for a in 0..p {
                        let ca = row_of(&acc_x, t_len, a);
                        for b in 0..p {
                            let cb = row_of(&acc_x, t_len, b);
                            let q = &md.q_inv[(a * p + b) * t_len..(a * p + b + 1) * t_len];
                            for t in 0..t_len {
                                per_t[t] += q[t] * ca[t] * cb[t];
                            }
                        }
                    }
                    let mut best = f64::NEG_INFINITY;
                    for t in 0..t_len {
                        let denom = 1.0 - k * per_t[t];
                        if md.regular[t] && denom > RCOND_THRESHOLD {
                            best = best.max((n - 2) as f64 * k * per_t[t] / denom);
                        }
                    }
                    values[Method::Mdffss.slot()] = (best > f64::NEG_INFINITY).then_some(best);
                }

                if let Some(r) = &self.ranks {
                    per_t.iter_mut().for_each(|v| *v = 0.0);
                    per_t2.iter_mut().for_each(|v| *v = 0.0);
                    for v in 0..p {
                        let (c, tot) = (row_of(&acc_r, t_len, v), row_of(&r.total, t_len, v));
                        for t in 0..t_len {
                            per_t[t] += c[t] * c[t];
                            let o = tot[t] - c[t];
                            per_t2[t] += o * o;
                        }
                    }
                    let mut best = f64::NEG_INFINITY;
                    for t in 0..t_len {
                        if let Some(scale) = r.scale[t] {
                            best = best.max(scale * (per_t[t] / nw as f64 + per_t2[t] / nc as f64));
                        }
                    }
                    values[Method::Mrbfss.slot()] = (best > f64::NEG_INFINITY).then_some(best);
                }

                if self.signs.is_some() {
                    let sq: f64 = (0..p)
                        .map(|v| {
                            weighted_dot(
                                &self.weights,
                                row_of(&acc_d, t_len, v),
                                row_of(&acc_d, t_len, v),
                            )
                        })
                        .sum();
                    values[Method::Npfss.slot()] = Some((sq / (nw * nc) as f64).sqrt());
                }

                visit(index, &values);
            }
        }
    }

    /// Every window's value under `method`.
    pub fn statistics(
        &self,
        method: Method,
        perm: Option<&[usize]>,
    ) -> Result<Vec<StatisticValue>> {
        self.require(method)?;
        let mut out = Vec::with_capacity(self.windows.len());
        self.evaluate(perm, |w, v| {
            out.push(StatisticValue::new(w, method, v[method.slot()]))
        });
        Ok(out)
    }

    /// Scan statistic `Λ` of every active method under `perm`;
    /// `-inf` when every window is degenerate or the method is inactive.
    pub fn maxima(&self, perm: Option<&[usize]>) -> [f64; 4] {
        let mut best = [f64::NEG_INFINITY; 4];
        self.evaluate(perm, |_, values| {
            for (b, v) in best.iter_mut().zip(values) {
                if let Some(v) = v {
                    if *v > *b {
                        *b = *v;
                    }
                }
            }
        });
        best
    }

    /// Most likely cluster under `method` on the original labelling.
    pub fn scan(&self, method: Method) -> Result<ScanOutcome> {
        let all = self.statistics(method, None)?;
        let mlc = most_likely_cluster(&all, self.windows)
            .ok_or(Error::AllWindowsDegenerate(method.name()))?;
        Ok(ScanOutcome {
            method,
            mlc,
            statistic: all[mlc].value,
            all,
        })
    }

    fn require(&self, method: Method) -> Result<()> {
        if self.has(method) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(alloc::format!(
                "engine was not prepared for {method}"
            )))
        }
    }
}

#[inline]
fn row_of(acc: &[f64], t_len: usize, v: usize) -> &[f64] {
    &acc[v * t_len..(v + 1) * t_len]
}

#[inline]
fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
}

#[inline]
fn add(acc: &mut [f64], x: &[f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += v;
    }
}
