//! Simulation study: planted clusters, permutation tests, detection metrics.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fdata::TimeGrid;
use crate::geometry::{
    build_distance_matrix, enumerate_windows, window_around, CoordinateMode, SiteMap, WindowSet,
};
use crate::inference::{
    permutation_test_engine, Executor, PermutationPlan, Sequential, DEFAULT_SIGNIFICANCE,
};
use crate::rng;
use crate::stats::{Method, ScanEngine};

mod metrics;
mod model;

pub use metrics::{evaluate_detection, spearman, DetectionMetrics};
pub use model::{
    basis_function, delta_shift, expansion_scale, generate_dataset, mean_curve, noise_variance,
    sample_noise_coefficients, DataModel, NoiseBasis, NoiseDistribution, ShiftType,
    DEFAULT_EXPANSION_TERMS, DEFAULT_GRID_POINTS,
};

const DEPARTEMENTS_CSV: &str = include_str!("../../data/departements.csv");

/// Département codes forming the planted Paris-region cluster.
pub const PARIS_REGION: [&str; 8] = ["75", "77", "78", "91", "92", "93", "94", "95"];

pub const REFERENCE_RHOS: [f64; 3] = [0.2, 0.5, 0.8];

/// Capitals of the 94 mainland French départements (Corsica excluded) as a
/// geodetic site map.
pub fn departement_sites() -> SiteMap {
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    for line in DEPARTEMENTS_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
    {
        let fields: Vec<&str> = line.split(',').collect();
        ids.push(fields[0].to_string());
        coords.push([
            fields[2].trim().parse().expect("longitude"),
            fields[3].trim().parse().expect("latitude"),
        ]);
    }
    SiteMap::new(ids, coords, CoordinateMode::Geodetic).expect("shipped site table is valid")
}

/// Raw CSV of the shipped département table (`site_id,name,lon,lat`).
pub fn departement_csv() -> &'static str {
    DEPARTEMENTS_CSV
}

/// Sites, windows and planted cluster shared by every configuration.
#[derive(Debug, Clone)]
pub struct StudyDesign {
    pub sites: SiteMap,
    pub windows: WindowSet,
    /// Ascending site indices of the planted cluster.
    pub true_cluster: Vec<usize>,
}

impl StudyDesign {
    /// The 94 départements with the eight Paris-region départements as the
    /// planted cluster and windows covering at most half of the sites.
    pub fn departements() -> Self {
        let sites = departement_sites();
        let mut true_cluster: Vec<usize> = PARIS_REGION
            .iter()
            .map(|id| sites.index_of(id).expect("Paris region code"))
            .collect();
        true_cluster.sort_unstable();
        let windows =
            enumerate_windows(&build_distance_matrix(&sites), None, 0.5).expect("94 sites");
        Self {
            sites,
            windows,
            true_cluster,
        }
    }

    pub fn new(sites: SiteMap, windows: WindowSet, mut true_cluster: Vec<usize>) -> Result<Self> {
        true_cluster.sort_unstable();
        true_cluster.dedup();
        if true_cluster.is_empty() || true_cluster.len() >= sites.len() {
            return Err(Error::InvalidParameter(
                "planted cluster must be a nonempty proper subset".into(),
            ));
        }
        if let Some(&bad) = true_cluster.iter().find(|&&i| i >= sites.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                n: sites.len(),
            });
        }
        if windows.n_sites() != sites.len() {
            return Err(Error::DimensionMismatch(
                "windows and sites disagree".into(),
            ));
        }
        Ok(Self {
            sites,
            windows,
            true_cluster,
        })
    }

    /// Custom site map whose planted cluster is the smallest enumerated
    /// window of `size` sites containing `seed_site`.
    pub fn around_seed(
        sites: SiteMap,
        windows: WindowSet,
        seed_site: usize,
        size: usize,
    ) -> Result<Self> {
        let cluster = window_around(&windows, seed_site, size)?.members.clone();
        Self::new(sites, windows, cluster)
    }

    fn membership(&self) -> Vec<bool> {
        let mut mask = alloc::vec![false; self.sites.len()];
        for &i in &self.true_cluster {
            mask[i] = true;
        }
        mask
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationConfig {
    pub distribution: NoiseDistribution,
    pub rho: f64,
    pub shift: ShiftType,
    pub alpha: f64,
    pub replications: usize,
    pub permutations: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub significance: f64,
    pub grid_points: usize,
    pub expansion_terms: usize,
}

impl SimulationConfig {
    /// Desk-scale defaults: 100 replications, 199 permutations, every method.
    pub fn new(
        distribution: NoiseDistribution,
        rho: f64,
        shift: ShiftType,
        alpha: f64,
        seed: u64,
    ) -> Self {
        Self {
            distribution,
            rho,
            shift,
            alpha,
            replications: 100,
            permutations: 199,
            seed,
            methods: Method::ALL.to_vec(),
            significance: DEFAULT_SIGNIFICANCE,
            grid_points: DEFAULT_GRID_POINTS,
            expansion_terms: DEFAULT_EXPANSION_TERMS,
        }
    }

    /// Whether `rho`, `alpha`, grid and expansion all come from the reference
    /// design; anything else is a custom scenario.
    pub fn is_reference_grid(&self) -> bool {
        REFERENCE_RHOS.contains(&self.rho)
            && self.shift.alpha_grid().contains(&self.alpha)
            && self.grid_points == DEFAULT_GRID_POINTS
            && self.expansion_terms == DEFAULT_EXPANSION_TERMS
    }

    pub fn model(&self) -> DataModel {
        DataModel {
            distribution: self.distribution,
            rho: self.rho,
            shift: self.shift,
            alpha: self.alpha,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no method selected".into()));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidParameter("alpha must be nonnegative".into()));
        }
        if self.expansion_terms == 0 {
            return Err(Error::InvalidParameter(
                "expansion_terms must be at least 1".into(),
            ));
        }
        PermutationPlan::with_significance(self.permutations, 0, self.significance).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MethodOutcome {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    pub rejected: bool,
    /// Sites of the most likely cluster.
    pub cluster: Vec<usize>,
    pub metrics: Option<DetectionMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicationRecord {
    pub replication: usize,
    pub seed: u64,
    pub outcomes: Vec<MethodOutcome>,
}

/// Summary of one method under one configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyRow {
    pub method: Method,
    pub distribution: NoiseDistribution,
    pub rho: f64,
    pub shift: ShiftType,
    pub alpha: f64,
    pub replications: usize,
    pub rejections: usize,
    pub power: f64,
    /// Means over rejecting replications; `None` without rejections.
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub f_measure: Option<f64>,
    pub reference_grid: bool,
    pub seed: u64,
}

impl StudyRow {
    /// Binomial standard error of the power estimate.
    pub fn power_se(&self) -> f64 {
        num_traits::Float::sqrt(self.power * (1.0 - self.power) / self.replications as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfigReport {
    pub config: SimulationConfig,
    pub rows: Vec<StudyRow>,
    pub replications: Vec<ReplicationRecord>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationReport {
    pub configs: Vec<ConfigReport>,
}

impl SimulationReport {
    pub fn rows(&self) -> impl Iterator<Item = &StudyRow> {
        self.configs.iter().flat_map(|c| c.rows.iter())
    }

    pub fn row(&self, config: usize, method: Method) -> Option<&StudyRow> {
        self.configs
            .get(config)?
            .rows
            .iter()
            .find(|r| r.method == method)
    }
}

/// Generate, scan, test and evaluate one replication.
pub fn run_replication(
    design: &StudyDesign,
    config: &SimulationConfig,
    grid: &TimeGrid,
    basis: &NoiseBasis,
    replication: usize,
) -> Result<ReplicationRecord> {
    let seed = rng::derive_seed(config.seed, replication as u64);
    let mut data_rng = rng::stream(seed, 0);
    let data = generate_dataset(
        &config.model(),
        grid,
        basis,
        &design.membership(),
        &mut data_rng,
    )?;
    let engine = ScanEngine::new(&data, &design.windows, &config.methods)?;
    let plan = PermutationPlan::with_significance(
        config.permutations,
        rng::derive_seed(seed, 1),
        config.significance,
    )?;
    let reports = permutation_test_engine(&engine, &config.methods, &plan, &Sequential)?;
    let n = design.sites.len();
    let outcomes = reports
        .into_iter()
        .map(|r| {
            let rejected = r.p_value < config.significance;
            let metrics = evaluate_detection(
                Some(&r.mlc_window.members),
                &design.true_cluster,
                n,
                rejected,
            );
            MethodOutcome {
                method: r.method,
                statistic: r.statistic,
                p_value: r.p_value,
                rejected,
                cluster: r.mlc_window.members,
                metrics,
            }
        })
        .collect();
    Ok(ReplicationRecord {
        replication,
        seed,
        outcomes,
    })
}

fn summarize(config: &SimulationConfig, records: &[ReplicationRecord]) -> Vec<StudyRow> {
    config
        .methods
        .iter()
        .map(|&method| {
            let outcomes: Vec<&MethodOutcome> = records
                .iter()
                .filter_map(|r| r.outcomes.iter().find(|o| o.method == method))
                .collect();
            let metrics: Vec<DetectionMetrics> =
                outcomes.iter().filter_map(|o| o.metrics).collect();
            let mean = |f: fn(&DetectionMetrics) -> f64| {
                (!metrics.is_empty())
                    .then(|| metrics.iter().map(f).sum::<f64>() / metrics.len() as f64)
            };
            let rejections = outcomes.iter().filter(|o| o.rejected).count();
            StudyRow {
                method,
                distribution: config.distribution,
                rho: config.rho,
                shift: config.shift,
                alpha: config.alpha,
                replications: outcomes.len(),
                rejections,
                power: rejections as f64 / outcomes.len() as f64,
                tpr: mean(|m| m.tpr),
                fpr: mean(|m| m.fpr),
                f_measure: mean(|m| m.f_measure),
                reference_grid: config.is_reference_grid(),
                seed: config.seed,
            }
        })
        .collect()
}

/// Runs every configuration; replications are distributed over `executor`.
pub fn run_study<E: Executor>(
    design: &StudyDesign,
    configs: &[SimulationConfig],
    executor: &E,
) -> Result<SimulationReport> {
    if configs.is_empty() {
        return Err(Error::InvalidParameter(
            "no simulation configuration given".into(),
        ));
    }
    let mut out = Vec::with_capacity(configs.len());
    for config in configs {
        config.validate()?;
        let grid = TimeGrid::uniform(0.0, 1.0, config.grid_points)?;
        let basis = NoiseBasis::new(&grid, config.expansion_terms);
        let records: Vec<Result<ReplicationRecord>> = executor.map(config.replications, |r| {
            run_replication(design, config, &grid, &basis, r)
        });
        let records = records.into_iter().collect::<Result<Vec<_>>>()?;
        out.push(ConfigReport {
            config: config.clone(),
            rows: summarize(config, &records),
            replications: records,
        });
    }
    Ok(SimulationReport { configs: out })
}

/// Human-readable scenario label, e.g. `normal/rho=0.2/delta1/alpha=1.5`.
pub fn scenario_label(config: &SimulationConfig) -> String {
    alloc::format!(
        "{}/rho={}/{}/alpha={}",
        config.distribution.name(),
        config.rho,
        config.shift.name(),
        config.alpha
    )
}
