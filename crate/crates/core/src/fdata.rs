//! Functional observations on a shared time grid.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{ScanWindow, WindowSet};

/// Strictly increasing observation times with trapezoid quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2
            || points.iter().any(|t| !t.is_finite())
            || points.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidTimeGrid);
        }
        let last = points.len() - 1;
        let weights = (0..points.len())
            .map(|k| {
                let left = if k == 0 {
                    0.0
                } else {
                    points[k] - points[k - 1]
                };
                let right = if k == last {
                    0.0
                } else {
                    points[k + 1] - points[k]
                };
                0.5 * (left + right)
            })
            .collect();
        Ok(Self { points, weights })
    }

    /// `len` equally spaced points on `[start, end]`, both ends included.
    pub fn uniform(start: f64, end: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidTimeGrid);
        }
        let step = (end - start) / (len - 1) as f64;
        let mut points: Vec<f64> = (0..len).map(|k| start + step * k as f64).collect();
        points[len - 1] = end;
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Trapezoid integral of a matrix-valued curve.
///
/// `values` holds one block of `m` entries per grid point, time-major; the
/// result is the entrywise integral (length `m`).
pub fn integrate_matrix_curve(values: &[f64], grid: &TimeGrid) -> Result<Vec<f64>> {
    let t = grid.len();
    if values.is_empty() || values.len() % t != 0 {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} values do not split into {} grid points",
            values.len(),
            t
        )));
    }
    let m = values.len() / t;
    let mut out = alloc::vec![0.0; m];
    for (block, &w) in values.chunks_exact(m).zip(grid.weights()) {
        for (o, v) in out.iter_mut().zip(block) {
            *o += w * v;
        }
    }
    Ok(out)
}

/// `n` sites × `p` variables × `T` grid points, stored site-major so that one
/// site's curve is a contiguous `T × p` block.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    n_sites: usize,
    n_vars: usize,
    grid: TimeGrid,
    values: Vec<f64>,
    var_names: Vec<String>,
}

impl FunctionalDataset {
    pub fn new(
        n_sites: usize,
        n_vars: usize,
        grid: TimeGrid,
        values: Vec<f64>,
        var_names: Vec<String>,
    ) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::InvalidParameter("need at least one variable".into()));
        }
        if values.len() != n_sites * n_vars * grid.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "expected {}x{}x{} values, got {}",
                n_sites,
                n_vars,
                grid.len(),
                values.len()
            )));
        }
        if var_names.len() != n_vars {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} variable names for {} variables",
                var_names.len(),
                n_vars
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "dataset contains non-finite values".into(),
            ));
        }
        Ok(Self {
            n_sites,
            n_vars,
            grid,
            values,
            var_names,
        })
    }

    /// Dataset with variables named `x1..xp`.
    pub fn from_values(
        n_sites: usize,
        n_vars: usize,
        grid: TimeGrid,
        values: Vec<f64>,
    ) -> Result<Self> {
        let names = (1..=n_vars).map(|v| alloc::format!("x{v}")).collect();
        Self::new(n_sites, n_vars, grid, values, names)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_times(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The `T × p` block of site `i`.
    #[inline]
    pub fn curve(&self, i: usize) -> &[f64] {
        let len = self.n_vars * self.grid.len();
        &self.values[i * len..(i + 1) * len]
    }

    /// `X_i(t)` as a `p`-vector.
    #[inline]
    pub fn point(&self, i: usize, t: usize) -> &[f64] {
        let p = self.n_vars;
        let start = (i * self.grid.len() + t) * p;
        &self.values[start..start + p]
    }

    #[inline]
    pub fn value(&self, i: usize, t: usize, v: usize) -> f64 {
        self.point(i, t)[v]
    }

    /// Dataset whose site `i` carries the curve of site `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_sites {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        let mut values = Vec::with_capacity(self.values.len());
        for &src in perm {
            if src >= self.n_sites {
                return Err(Error::IndexOutOfRange {
                    index: src,
                    n: self.n_sites,
                });
            }
            values.extend_from_slice(self.curve(src));
        }
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    /// Applies `f` to every `(site, time index, point)` and stores the result.
    pub fn map_points(&self, mut f: impl FnMut(usize, usize, &[f64]) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n_sites {
            for t in 0..self.grid.len() {
                let out = f(i, t, self.point(i, t));
                if out.len() != self.n_vars {
                    return Err(Error::DimensionMismatch("mapped point length".into()));
                }
                values.extend(out);
            }
        }
        Self::new(
            self.n_sites,
            self.n_vars,
            self.grid.clone(),
            values,
            self.var_names.clone(),
        )
    }
}

/// Window-independent dataset sums.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMoments {
    /// `S(t) = Σ_i X_i(t)`, `T × p`.
    pub total: Vec<f64>,
    /// `Q(t) = Σ_i X_i(t) X_i(t)ᵀ`, `T × p × p`.
    pub second: Vec<f64>,
    /// `Σ_i ∫ X_i X_iᵀ dt`, `p × p`.
    pub integrated_second: Vec<f64>,
}

impl DatasetMoments {
    pub fn new(data: &FunctionalDataset) -> Self {
        let (p, t_len) = (data.n_vars(), data.n_times());
        let mut total = alloc::vec![0.0; t_len * p];
        let mut second = alloc::vec![0.0; t_len * p * p];
        for i in 0..data.n_sites() {
            for t in 0..t_len {
                let x = data.point(i, t);
                for a in 0..p {
                    total[t * p + a] += x[a];
                    for b in 0..p {
                        second[(t * p + a) * p + b] += x[a] * x[b];
                    }
                }
            }
        }
        let integrated_second =
            integrate_matrix_curve(&second, data.grid()).expect("second moment has T blocks");
        Self {
            total,
            second,
            integrated_second,
        }
    }
}

/// Group sizes and per-time sums for a window and its complement.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSummaries<'a> {
    pub moments: &'a DatasetMoments,
    pub inside: usize,
    pub outside: usize,
    /// `C_w(t)`, `T × p`.
    pub window_sum: Vec<f64>,
}

impl WindowSummaries<'_> {
    /// `C_{w^c}(t) = S(t) − C_w(t)`.
    pub fn complement_sum(&self) -> Vec<f64> {
        self.moments
            .total
            .iter()
            .zip(&self.window_sum)
            .map(|(s, c)| s - c)
            .collect()
    }

    pub fn n(&self) -> usize {
        self.inside + self.outside
    }
}

/// Direct summation of the window's curves in ascending member order.
pub fn direct_window_sum(data: &FunctionalDataset, members: &[usize]) -> Vec<f64> {
    let mut sum = alloc::vec![0.0; data.n_times() * data.n_vars()];
    for &i in members {
        for (s, x) in sum.iter_mut().zip(data.curve(i)) {
            *s += x;
        }
    }
    sum
}

/// Walks every center's distance-sorted order once, adding one curve per step,
/// and yields the summaries of each window when its prefix is complete.
pub struct PrefixSummaries<'a> {
    data: &'a FunctionalDataset,
    windows: &'a WindowSet,
    moments: &'a DatasetMoments,
    next: usize,
    prefix_len: usize,
    current_center: Option<usize>,
    acc: Vec<f64>,
}

impl<'a> Iterator for PrefixSummaries<'a> {
    type Item = (&'a ScanWindow, WindowSummaries<'a>);

    fn next(&mut self) -> Option<Self::Item> {
        let window = self.windows.windows().get(self.next)?;
        self.next += 1;
        if self.current_center != Some(window.center) {
            self.current_center = Some(window.center);
            self.prefix_len = 0;
            self.acc.iter_mut().for_each(|v| *v = 0.0);
        }
        let order = self.windows.order(window.center);
        while self.prefix_len < window.size() {
            let site = order[self.prefix_len];
            for (a, x) in self.acc.iter_mut().zip(self.data.curve(site)) {
                *a += x;
            }
            self.prefix_len += 1;
        }
        let n = self.data.n_sites();
        Some((
            window,
            WindowSummaries {
                moments: self.moments,
                inside: window.size(),
                outside: n - window.size(),
                window_sum: self.acc.clone(),
            },
        ))
    }
}

pub fn window_prefix_summaries<'a>(
    data: &'a FunctionalDataset,
    windows: &'a WindowSet,
    moments: &'a DatasetMoments,
) -> Result<PrefixSummaries<'a>> {
    if windows.n_sites() != data.n_sites() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "windows built for {} sites, dataset has {}",
            windows.n_sites(),
            data.n_sites()
        )));
    }
    Ok(PrefixSummaries {
        data,
        windows,
        moments,
        next: 0,
        prefix_len: 0,
        current_center: None,
        acc: alloc::vec![0.0; data.n_times() * data.n_vars()],
    })
}
