//! Artificial bivariate functional data with a planted spatial cluster.
//!
//! `X_i(t) = μ(t) + Δ(t) 1{s_i ∈ w} + ε_i(t)` on `[0, 1]`, with
//! `μ(t) = (sin(2πt²)⁵, 1 + 2.3t + 3.4t² + 1.5t³)` and
//! `ε_i(t) = Σ_k Z_{i,k} √(1.5 · 0.2^k) θ_k(t)`.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fdata::{FunctionalDataset, TimeGrid};

pub const DEFAULT_GRID_POINTS: usize = 101;
pub const DEFAULT_EXPANSION_TERMS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NoiseDistribution {
    Normal,
    Student4,
    Chisq4,
}

impl NoiseDistribution {
    pub const ALL: [NoiseDistribution; 3] = [
        NoiseDistribution::Normal,
        NoiseDistribution::Student4,
        NoiseDistribution::Chisq4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseDistribution::Normal => "normal",
            NoiseDistribution::Student4 => "student4",
            NoiseDistribution::Chisq4 => "chisq4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ShiftType {
    /// `α (t, t)`.
    Delta1,
    /// `α (t(1−t), t(1−t))`.
    Delta2,
    /// `α (e^{−100(t−0.5)²}/3, e^{−100(t−0.5)²}/3)`.
    Delta3,
}

impl ShiftType {
    pub const ALL: [ShiftType; 3] = [ShiftType::Delta1, ShiftType::Delta2, ShiftType::Delta3];

    pub fn name(self) -> &'static str {
        match self {
            ShiftType::Delta1 => "delta1",
            ShiftType::Delta2 => "delta2",
            ShiftType::Delta3 => "delta3",
        }
    }

    /// Intensity grid used for this shift in the reference study.
    pub fn alpha_grid(self) -> [f64; 5] {
        match self {
            ShiftType::Delta1 => [0.0, 0.375, 0.75, 1.125, 1.5],
            ShiftType::Delta2 => [0.0, 1.0, 2.0, 3.0, 4.0],
            ShiftType::Delta3 => [0.0, 1.25, 2.5, 3.75, 5.0],
        }
    }
}

impl core::str::FromStr for ShiftType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShiftType::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown shift type `{s}`")))
    }
}

impl core::str::FromStr for NoiseDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseDistribution::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown distribution `{s}`")))
    }
}

pub fn delta_shift(shift: ShiftType, alpha: f64, t: f64) -> [f64; 2] {
    let v = match shift {
        ShiftType::Delta1 => alpha * t,
        ShiftType::Delta2 => alpha * t * (1.0 - t),
        ShiftType::Delta3 => alpha * (-100.0 * (t - 0.5).powi(2)).exp() / 3.0,
    };
    [v, v]
}

pub fn mean_curve(t: f64) -> [f64; 2] {
    [
        (2.0 * PI * t * t).sin().powi(5),
        1.0 + 2.3 * t + 3.4 * t * t + 1.5 * t * t * t,
    ]
}

/// `θ_k(t)` for `k ≥ 1`.
pub fn basis_function(k: usize, t: f64) -> f64 {
    if k == 1 {
        1.0
    } else if k % 2 == 0 {
        SQRT_2 * (k as f64 * PI * t).sin()
    } else {
        SQRT_2 * ((k - 1) as f64 * PI * t).cos()
    }
}

/// `√(1.5 · 0.2^k)`.
pub fn expansion_scale(k: usize) -> f64 {
    (1.5 * 0.2f64.powi(k as i32)).sqrt()
}

/// Closed-form pointwise variance of each noise component,
/// `1.5 Σ_k 0.2^k θ_k(t)²`.
pub fn noise_variance(t: f64, terms: usize) -> f64 {
    (1..=terms)
        .map(|k| expansion_scale(k).powi(2) * basis_function(k, t).powi(2))
        .sum()
}

fn correlated_normals<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> [f64; 2] {
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    [g1, rho * g1 + (1.0 - rho * rho).sqrt() * g2]
}

/// `n × K` pairs `Z_{i,k}`, row-major by site. Each pair has unit marginal
/// variances and correlation `ρ`.
///
/// * normal: `N(0, Σ)` with `Σ = [[1, ρ], [ρ, 1]]`;
/// * student4: `U (V/4)^{-1/2}` with `U ~ N(0, Σ/2)` and one `V ~ χ²(4)` per
///   site;
/// * chisq4: `(U − 4) / (2√2)` where each component of `U` sums four squared
///   normals whose pairwise correlation is `√ρ`.
pub fn sample_noise_coefficients<R: Rng + ?Sized>(
    distribution: NoiseDistribution,
    rho: f64,
    n: usize,
    terms: usize,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "correlation must lie in (-1, 1), got {rho}"
        )));
    }
    if distribution == NoiseDistribution::Chisq4 && rho < 0.0 {
        return Err(Error::InvalidParameter(
            "chisq4 noise needs a nonnegative correlation".into(),
        ));
    }
    let mut out = Vec::with_capacity(n * terms);
    match distribution {
        NoiseDistribution::Normal => {
            for _ in 0..n * terms {
                out.push(correlated_normals(rho, rng));
            }
        }
        NoiseDistribution::Student4 => {
            let chi = ChiSquared::new(4.0).expect("4 degrees of freedom");
            for _ in 0..n {
                let v: f64 = chi.sample(rng);
                let scale = (v / 4.0).powf(-0.5) / SQRT_2;
                for _ in 0..terms {
                    let u = correlated_normals(rho, rng);
                    out.push([u[0] * scale, u[1] * scale]);
                }
            }
        }
        NoiseDistribution::Chisq4 => {
            let r = rho.sqrt();
            for _ in 0..n * terms {
                let mut u = [0.0; 2];
                for _ in 0..4 {
                    let g = correlated_normals(r, rng);
                    u[0] += g[0] * g[0];
                    u[1] += g[1] * g[1];
                }
                out.push([(u[0] - 4.0) / (2.0 * SQRT_2), (u[1] - 4.0) / (2.0 * SQRT_2)]);
            }
        }
    }
    Ok(out)
}

/// Scaled basis `√(1.5 · 0.2^k) θ_k(t)` evaluated on a grid, `K × T`.
#[derive(Debug, Clone)]
pub struct NoiseBasis {
    terms: usize,
    n_times: usize,
    values: Vec<f64>,
}

impl NoiseBasis {
    pub fn new(grid: &TimeGrid, terms: usize) -> Self {
        let mut values = Vec::with_capacity(terms * grid.len());
        for k in 1..=terms {
            let s = expansion_scale(k);
            values.extend(grid.points().iter().map(|&t| s * basis_function(k, t)));
        }
        Self {
            terms,
            n_times: grid.len(),
            values,
        }
    }

    pub fn terms(&self) -> usize {
        self.terms
    }
}

/// Scenario of one artificial dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataModel {
    pub distribution: NoiseDistribution,
    pub rho: f64,
    pub shift: ShiftType,
    pub alpha: f64,
}

/// Draws one dataset on `grid`; sites flagged in `in_cluster` receive the
/// shift.
pub fn generate_dataset<R: Rng + ?Sized>(
    model: &DataModel,
    grid: &TimeGrid,
    basis: &NoiseBasis,
    in_cluster: &[bool],
    rng: &mut R,
) -> Result<FunctionalDataset> {
    if basis.n_times != grid.len() {
        return Err(Error::DimensionMismatch(
            "noise basis and grid lengths differ".into(),
        ));
    }
    let n = in_cluster.len();
    let t_len = grid.len();
    let terms = basis.terms;
    let z = sample_noise_coefficients(model.distribution, model.rho, n, terms, rng)?;
    let means: Vec<[f64; 2]> = grid.points().iter().map(|&t| mean_curve(t)).collect();
    let shifts: Vec<[f64; 2]> = grid
        .points()
        .iter()
        .map(|&t| delta_shift(model.shift, model.alpha, t))
        .collect();

    let mut values = alloc::vec![0.0; n * t_len * 2];
    for i in 0..n {
        let curve = &mut values[i * t_len * 2..(i + 1) * t_len * 2];
        for k in 0..terms {
            let zk = z[i * terms + k];
            let phi = &basis.values[k * t_len..(k + 1) * t_len];
            for t in 0..t_len {
                curve[2 * t] += zk[0] * phi[t];
                curve[2 * t + 1] += zk[1] * phi[t];
            }
        }
        for t in 0..t_len {
            curve[2 * t] += means[t][0];
            curve[2 * t + 1] += means[t][1];
            if in_cluster[i] {
                curve[2 * t] += shifts[t][0];
                curve[2 * t + 1] += shifts[t][1];
            }
        }
    }
    FunctionalDataset::from_values(n, 2, grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_values() {
        assert_eq!(delta_shift(ShiftType::Delta1, 1.5, 0.5), [0.75, 0.75]);
        assert_eq!(delta_shift(ShiftType::Delta2, 3.0, 0.0), [0.0, 0.0]);
        assert_eq!(delta_shift(ShiftType::Delta2, 3.0, 1.0), [0.0, 0.0]);
        assert_eq!(delta_shift(ShiftType::Delta3, 3.0, 0.5), [1.0, 1.0]);
        assert_eq!(delta_shift(ShiftType::Delta1, 0.0, 0.3), [0.0, 0.0]);
    }

    #[test]
    fn basis_pattern() {
        assert_eq!(basis_function(1, 0.3), 1.0);
        assert!((basis_function(2, 0.25) - SQRT_2).abs() < 1e-15); // sin(π/2)
        assert!((basis_function(3, 0.0) - SQRT_2).abs() < 1e-15); // cos(0)
        assert!((basis_function(3, 0.5) + SQRT_2).abs() < 1e-15); // cos(π)
    }

    #[test]
    fn mean_curve_at_origin() {
        assert_eq!(mean_curve(0.0), [0.0, 1.0]);
    }

    #[test]
    fn parse_names() {
        assert_eq!("Delta2".parse::<ShiftType>().unwrap(), ShiftType::Delta2);
        assert_eq!(
            "student4".parse::<NoiseDistribution>().unwrap(),
            NoiseDistribution::Student4
        );
        assert!("gamma".parse::<NoiseDistribution>().is_err());
    }
}
