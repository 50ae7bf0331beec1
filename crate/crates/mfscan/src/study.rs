//! Simulation study configuration files and result tables.

use std::fs;
use std::path::{Path, PathBuf};

use mfscan_core::inference::DEFAULT_SIGNIFICANCE;
use mfscan_core::rng::derive_seed;
use mfscan_core::simulation::{
    run_study, NoiseDistribution, ShiftType, SimulationConfig, SimulationReport, StudyDesign,
    DEFAULT_EXPANSION_TERMS, DEFAULT_GRID_POINTS, REFERENCE_RHOS,
};
use mfscan_core::{CoordinateMode, Method};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::executor::Parallel;
use crate::io::load_sites;
use crate::report::build_windows;

pub const STUDY_CSV: &str = "study.csv";
pub const STUDY_JSON: &str = "study.json";
pub const FIGURE_CSV: &str = "figure_series.csv";

fn default_replications() -> usize {
    100
}
fn default_permutations() -> usize {
    199
}
fn default_significance() -> f64 {
    DEFAULT_SIGNIFICANCE
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_distributions() -> Vec<NoiseDistribution> {
    vec![NoiseDistribution::Normal]
}
fn default_rhos() -> Vec<f64> {
    REFERENCE_RHOS.to_vec()
}
fn default_shifts() -> Vec<ShiftType> {
    vec![ShiftType::Delta1]
}
fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}
fn default_terms() -> usize {
    DEFAULT_EXPANSION_TERMS
}
fn default_fraction() -> f64 {
    0.5
}

/// Custom geography for a study. The planted cluster is either listed
/// explicitly or grown around `seed_site`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub sites: PathBuf,
    #[serde(default)]
    pub coordinate_mode: CoordinateMode,
    #[serde(default)]
    pub max_radius: Option<f64>,
    #[serde(default = "default_fraction")]
    pub max_fraction: f64,
    #[serde(default)]
    pub cluster: Vec<String>,
    #[serde(default)]
    pub seed_site: Option<String>,
    #[serde(default)]
    pub cluster_size: Option<usize>,
}

/// JSON study grid. Every combination of distribution, correlation, shift
/// and intensity becomes one configuration; intensities default to the
/// shift's reference grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyFile {
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_significance")]
    pub significance: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_distributions")]
    pub distributions: Vec<NoiseDistribution>,
    #[serde(default = "default_rhos")]
    pub rhos: Vec<f64>,
    #[serde(default = "default_shifts")]
    pub shifts: Vec<ShiftType>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_terms")]
    pub expansion_terms: usize,
    #[serde(default)]
    pub design: Option<DesignFile>,
}

impl StudyFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Expands the grid. Configuration `k` gets its own seed derived from the
    /// file's seed, so adding rows never changes earlier ones.
    pub fn configs(&self) -> Result<Vec<SimulationConfig>> {
        if self.distributions.is_empty() || self.rhos.is_empty() || self.shifts.is_empty() {
            return Err(CliError::Config(
                "distributions, rhos and shifts must be nonempty".into(),
            ));
        }
        if self.alphas.as_ref().is_some_and(Vec::is_empty) {
            return Err(CliError::Config(
                "alphas must be nonempty when given".into(),
            ));
        }
        let mut out = Vec::new();
        for &distribution in &self.distributions {
            for &rho in &self.rhos {
                for &shift in &self.shifts {
                    let alphas = self
                        .alphas
                        .clone()
                        .unwrap_or_else(|| shift.alpha_grid().to_vec());
                    for alpha in alphas {
                        let seed = derive_seed(self.seed, out.len() as u64);
                        let mut c = SimulationConfig::new(distribution, rho, shift, alpha, seed);
                        c.replications = self.replications;
                        c.permutations = self.permutations;
                        c.significance = self.significance;
                        c.methods = self.methods.clone();
                        c.grid_points = self.grid_points;
                        c.expansion_terms = self.expansion_terms;
                        out.push(c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Relative paths in the design are resolved against `base`.
    pub fn design(&self, base: &Path) -> Result<StudyDesign> {
        let Some(d) = &self.design else {
            return Ok(StudyDesign::departements());
        };
        let path = if d.sites.is_absolute() {
            d.sites.clone()
        } else {
            base.join(&d.sites)
        };
        let sites = load_sites(&path, d.coordinate_mode)?;
        let windows = build_windows(&sites, d.max_radius, d.max_fraction)?;
        let lookup = |id: &str| {
            sites.index_of(id).ok_or_else(|| {
                CliError::Config(format!("design cluster names unknown site `{id}`"))
            })
        };
        match (&d.seed_site, d.cluster_size, d.cluster.is_empty()) {
            (None, None, false) => {
                let cluster = d
                    .cluster
                    .iter()
                    .map(|id| lookup(id))
                    .collect::<Result<Vec<_>>>()?;
                Ok(StudyDesign::new(sites, windows, cluster)?)
            }
            (Some(seed), Some(size), true) => {
                let seed = lookup(seed)?;
                Ok(StudyDesign::around_seed(sites, windows, seed, size)?)
            }
            _ => Err(CliError::Config(
                "design needs either `cluster` or both `seed_site` and `cluster_size`".into(),
            )),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_study_csv(path: &Path, report: &SimulationReport) -> Result<()> {
    let err = |e: csv::Error| CliError::io(path, std::io::Error::other(e.to_string()));
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record([
        "method",
        "distribution",
        "rho",
        "shift",
        "alpha",
        "replications",
        "rejections",
        "power",
        "power_se",
        "tpr",
        "fpr",
        "f_measure",
        "reference_grid",
        "seed",
    ])
    .map_err(err)?;
    for r in report.rows() {
        w.write_record([
            r.method.to_string(),
            r.distribution.name().to_string(),
            r.rho.to_string(),
            r.shift.name().to_string(),
            r.alpha.to_string(),
            r.replications.to_string(),
            r.rejections.to_string(),
            r.power.to_string(),
            r.power_se().to_string(),
            opt(r.tpr),
            opt(r.fpr),
            opt(r.f_measure),
            r.reference_grid.to_string(),
            r.seed.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Long-format x–y series: one panel per (distribution, rho, shift), x is the
/// intensity and y one of power, TPR, FPR or F-measure.
fn write_figure_series(path: &Path, report: &SimulationReport) -> Result<()> {
    let err = |e: csv::Error| CliError::io(path, std::io::Error::other(e.to_string()));
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["panel", "metric", "method", "alpha", "value"])
        .map_err(err)?;
    for r in report.rows() {
        let panel = format!("{}/rho={}/{}", r.distribution.name(), r.rho, r.shift.name());
        for (metric, value) in [
            ("power", Some(r.power)),
            ("tpr", r.tpr),
            ("fpr", r.fpr),
            ("f_measure", r.f_measure),
        ] {
            w.write_record([
                panel.clone(),
                metric.to_string(),
                r.method.to_string(),
                r.alpha.to_string(),
                opt(value),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn run_simulation(config_path: &Path, out: &Path, workers: usize) -> Result<SimulationReport> {
    let file = StudyFile::read(config_path)?;
    let configs = file.configs()?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let design = file.design(base)?;
    let executor = Parallel::new(workers)?;
    let report = run_study(&design, &configs, &executor)?;
    write_study_outputs(out, &report)?;
    Ok(report)
}

/// Writes `study.csv`, `study.json` (per-replication detail) and
/// `figure_series.csv` into `dir`.
pub fn write_study_outputs(dir: &Path, report: &SimulationReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_study_csv(&dir.join(STUDY_CSV), report)?;
    let json = dir.join(STUDY_JSON);
    let text = serde_json::to_string_pretty(report).expect("study report is serializable");
    fs::write(&json, text + "\n").map_err(|e| CliError::io(&json, e))?;
    write_figure_series(&dir.join(FIGURE_CSV), report)
}
