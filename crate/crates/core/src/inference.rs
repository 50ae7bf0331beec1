//! Random-labelling permutation inference for the most likely cluster.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fdata::FunctionalDataset;
use crate::geometry::{ScanWindow, WindowSet};
use crate::rng;
use crate::stats::{Method, ScanEngine, StatisticValue};

pub const DEFAULT_PERMUTATIONS: usize = 999;
pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

/// Runs `count` independent jobs and returns their results in index order.
pub trait Executor: Sync {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(job).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationPlan {
    pub permutations: usize,
    pub master_seed: u64,
    /// Level used to stop the secondary cluster search.
    pub significance: f64,
}

impl PermutationPlan {
    pub fn new(permutations: usize, master_seed: u64) -> Result<Self> {
        Self::with_significance(permutations, master_seed, DEFAULT_SIGNIFICANCE)
    }

    pub fn with_significance(
        permutations: usize,
        master_seed: u64,
        significance: f64,
    ) -> Result<Self> {
        if permutations == 0 {
            return Err(Error::InvalidParameter(
                "number of permutations must be at least 1".into(),
            ));
        }
        if !(significance > 0.0 && significance < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "significance level must lie in (0, 1), got {significance}"
            )));
        }
        Ok(Self {
            permutations,
            master_seed,
            significance,
        })
    }

    pub fn replicate_seed(&self, replicate: usize) -> u64 {
        rng::derive_seed(self.master_seed, replicate as u64)
    }

    /// Relabelling used by replicate `replicate`: site `s` takes the
    /// observation of site `perm[s]`.
    pub fn replicate_permutation(&self, n: usize, replicate: usize) -> Vec<usize> {
        rng::permutation(n, self.replicate_seed(replicate))
    }
}

/// `(1 + #{Λ⁽ᵐ⁾ ≥ Λ}) / (M + 1)`.
pub fn p_value(observed: f64, null: &[f64]) -> f64 {
    let exceed = null.iter().filter(|&&v| v >= observed).count();
    (1 + exceed) as f64 / (null.len() + 1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryCluster {
    pub window: usize,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub method: Method,
    /// Index of the most likely cluster in the window set.
    pub mlc: usize,
    pub mlc_window: ScanWindow,
    pub statistic: f64,
    pub p_value: f64,
    /// `Λ⁽ᵐ⁾` in replicate order; `-inf` for replicates where every window was
    /// degenerate.
    pub null_distribution: Vec<f64>,
    pub secondary: Vec<SecondaryCluster>,
    pub statistics: Vec<StatisticValue>,
    pub permutations: usize,
    pub master_seed: u64,
}

/// Greedy secondary clusters: windows in decreasing order of their index,
/// site-disjoint from the MLC and from each other, each tested against the
/// MLC's permutation distribution. Stops at the first p-value above `level`.
pub fn secondary_clusters(
    all: &[StatisticValue],
    windows: &WindowSet,
    mlc: usize,
    null: &[f64],
    level: f64,
) -> Vec<SecondaryCluster> {
    let mut candidates: Vec<&StatisticValue> = all
        .iter()
        .filter(|v| !v.degenerate && v.window != mlc)
        .collect();
    candidates.sort_by(|a, b| {
        let (wa, wb) = (windows.get(a.window), windows.get(b.window));
        b.value
            .total_cmp(&a.value)
            .then((wa.size(), wa.center).cmp(&(wb.size(), wb.center)))
    });
    let mlc_window = windows.get(mlc);
    let mut chosen: Vec<SecondaryCluster> = Vec::new();
    for cand in candidates {
        let w = windows.get(cand.window);
        if !w.is_disjoint(mlc_window)
            || chosen.iter().any(|c| !windows.get(c.window).is_disjoint(w))
        {
            continue;
        }
        let p = p_value(cand.value, null);
        if p > level {
            break;
        }
        chosen.push(SecondaryCluster {
            window: cand.window,
            statistic: cand.value,
            p_value: p,
        });
    }
    chosen
}

/// Scans with every method in `methods` and tests each MLC against the same
/// `plan.permutations` relabellings.
pub fn permutation_test_engine<E: Executor>(
    engine: &ScanEngine<'_>,
    methods: &[Method],
    plan: &PermutationPlan,
    executor: &E,
) -> Result<Vec<ScanReport>> {
    let windows = engine.windows();
    let n = windows.n_sites();
    if n < 4 {
        return Err(Error::TooFewSites(n));
    }
    let mut observed = Vec::with_capacity(methods.len());
    for &m in methods {
        observed.push(engine.scan(m)?);
    }
    let replicates: Vec<[f64; 4]> = executor.map(plan.permutations, |m| {
        let perm = plan.replicate_permutation(n, m);
        engine.maxima(Some(&perm))
    });
    Ok(observed
        .into_iter()
        .map(|outcome| {
            let null: Vec<f64> = replicates
                .iter()
                .map(|r| r[outcome.method as usize])
                .collect();
            let p = p_value(outcome.statistic, &null);
            let secondary =
                secondary_clusters(&outcome.all, windows, outcome.mlc, &null, plan.significance);
            ScanReport {
                method: outcome.method,
                mlc: outcome.mlc,
                mlc_window: windows.get(outcome.mlc).clone(),
                statistic: outcome.statistic,
                p_value: p,
                null_distribution: null,
                secondary,
                statistics: outcome.all,
                permutations: plan.permutations,
                master_seed: plan.master_seed,
            }
        })
        .collect())
}

pub fn permutation_test<E: Executor>(
    data: &FunctionalDataset,
    windows: &WindowSet,
    method: Method,
    plan: &PermutationPlan,
    executor: &E,
) -> Result<ScanReport> {
    let engine = ScanEngine::new(data, windows, &[method])?;
    let mut reports = permutation_test_engine(&engine, &[method], plan, executor)?;
    Ok(reports.remove(0))
}
