//! Scan orchestration and the files it writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mfscan_core::geometry::{build_distance_matrix, enumerate_windows};
use mfscan_core::inference::{permutation_test, DEFAULT_PERMUTATIONS, DEFAULT_SIGNIFICANCE};
use mfscan_core::{
    CoordinateMode, FunctionalDataset, Method, PermutationPlan, ScanReport, ScanWindow, SiteMap,
    WindowSet,
};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::executor::Parallel;
use crate::io::{load_panel, load_sites};

pub const REPORT_FILE: &str = "report.json";
pub const WINDOWS_FILE: &str = "windows.csv";
pub const STATISTICS_FILE: &str = "statistics.csv";
pub const PLOTDATA_FILE: &str = "plotdata.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRunConfig {
    pub sites: PathBuf,
    pub data: PathBuf,
    pub method: Method,
    pub coordinate_mode: CoordinateMode,
    /// Largest window radius, in km for geodetic sites and coordinate units
    /// otherwise.
    pub max_radius: Option<f64>,
    pub max_fraction: f64,
    pub permutations: usize,
    pub seed: u64,
    pub significance: f64,
    pub out: PathBuf,
    /// `0` means one worker per core.
    pub workers: usize,
}

impl ScanRunConfig {
    pub fn new(sites: PathBuf, data: PathBuf, method: Method, out: PathBuf) -> Self {
        Self {
            sites,
            data,
            method,
            coordinate_mode: CoordinateMode::Planar,
            max_radius: None,
            max_fraction: 0.5,
            permutations: DEFAULT_PERMUTATIONS,
            seed: 1,
            significance: DEFAULT_SIGNIFICANCE,
            out,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, path) in [("sites", &self.sites), ("data", &self.data)] {
            if !path.is_file() {
                return Err(CliError::Config(format!(
                    "{what} file {} does not exist",
                    path.display()
                )));
            }
        }
        if self.permutations == 0 {
            return Err(CliError::Config("--permutations must be at least 1".into()));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(CliError::Config(format!(
                "--alpha-level must lie in (0, 1), got {}",
                self.significance
            )));
        }
        if !(self.max_fraction > 0.0 && self.max_fraction <= 1.0) {
            return Err(CliError::Config(format!(
                "--max-fraction must lie in (0, 1], got {}",
                self.max_fraction
            )));
        }
        if let Some(r) = self.max_radius {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(CliError::Config(format!(
                    "--max-radius-km must be a nonnegative number, got {r}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub window: usize,
    pub center: String,
    pub radius: f64,
    pub size: usize,
    pub members: Vec<String>,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSettings {
    pub coordinate_mode: CoordinateMode,
    pub max_radius: Option<f64>,
    pub max_fraction: f64,
    pub permutations: usize,
    pub seed: u64,
    pub significance: f64,
}

/// Contents of `report.json`. Nothing here depends on timing or the number
/// of workers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub method: Method,
    pub n_sites: usize,
    pub n_vars: usize,
    pub n_times: usize,
    pub variables: Vec<String>,
    pub n_windows: usize,
    pub settings: RunSettings,
    pub statistic: f64,
    pub p_value: f64,
    pub significant: bool,
    pub most_likely_cluster: ClusterSummary,
    pub secondary_clusters: Vec<ClusterSummary>,
    pub files: Vec<FileSchema>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileSchema {
    pub file: &'static str,
    pub columns: &'static str,
}

fn schemas() -> Vec<FileSchema> {
    vec![
        FileSchema {
            file: WINDOWS_FILE,
            columns: "window,center,radius,size,members (site_ids joined by ';')",
        },
        FileSchema {
            file: STATISTICS_FILE,
            columns:
                "window,method,center,radius,size,statistic (empty when degenerate),degenerate",
        },
        FileSchema {
            file: PLOTDATA_FILE,
            columns:
                "kind (curve|mean),site_id (empty for means),group (in|out),time,variable,value",
        },
    ]
}

fn cluster_summary(
    sites: &SiteMap,
    index: usize,
    w: &ScanWindow,
    statistic: f64,
    p_value: f64,
) -> ClusterSummary {
    ClusterSummary {
        window: index,
        center: sites.ids()[w.center].clone(),
        radius: w.radius,
        size: w.size(),
        members: w.members.iter().map(|&i| sites.ids()[i].clone()).collect(),
        statistic,
        p_value,
    }
}

pub fn summarize(
    config: &ScanRunConfig,
    sites: &SiteMap,
    data: &FunctionalDataset,
    windows: &WindowSet,
    report: &ScanReport,
) -> ScanSummary {
    ScanSummary {
        method: report.method,
        n_sites: data.n_sites(),
        n_vars: data.n_vars(),
        n_times: data.n_times(),
        variables: data.var_names().to_vec(),
        n_windows: windows.len(),
        settings: RunSettings {
            coordinate_mode: config.coordinate_mode,
            max_radius: config.max_radius,
            max_fraction: config.max_fraction,
            permutations: config.permutations,
            seed: config.seed,
            significance: config.significance,
        },
        statistic: report.statistic,
        p_value: report.p_value,
        significant: report.p_value < config.significance,
        most_likely_cluster: cluster_summary(
            sites,
            report.mlc,
            &report.mlc_window,
            report.statistic,
            report.p_value,
        ),
        secondary_clusters: report
            .secondary
            .iter()
            .map(|s| {
                cluster_summary(
                    sites,
                    s.window,
                    windows.get(s.window),
                    s.statistic,
                    s.p_value,
                )
            })
            .collect(),
        files: schemas(),
    }
}

/// Everything produced by one scan, kept in memory so callers can inspect it
/// before or instead of writing files.
#[derive(Debug, Clone)]
pub struct ScanRun {
    pub sites: SiteMap,
    pub data: FunctionalDataset,
    pub time_labels: Vec<String>,
    pub windows: WindowSet,
    pub report: ScanReport,
    pub summary: ScanSummary,
}

pub fn build_windows(
    sites: &SiteMap,
    max_radius: Option<f64>,
    max_fraction: f64,
) -> Result<WindowSet> {
    Ok(enumerate_windows(
        &build_distance_matrix(sites),
        max_radius,
        max_fraction,
    )?)
}

pub fn run_scan(config: &ScanRunConfig) -> Result<ScanRun> {
    config.validate()?;
    let sites = load_sites(&config.sites, config.coordinate_mode)?;
    let panel = load_panel(&config.data, &sites)?;
    let windows = build_windows(&sites, config.max_radius, config.max_fraction)?;
    let plan =
        PermutationPlan::with_significance(config.permutations, config.seed, config.significance)?;
    let executor = Parallel::new(config.workers)?;
    let report = permutation_test(&panel.dataset, &windows, config.method, &plan, &executor)?;
    let summary = summarize(config, &sites, &panel.dataset, &windows, &report);
    Ok(ScanRun {
        sites,
        data: panel.dataset,
        time_labels: panel.time_labels,
        windows,
        report,
        summary,
    })
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(path, std::io::Error::other(e.to_string()))
}

pub fn write_windows_csv<W: Write>(
    out: W,
    sites: &SiteMap,
    windows: &WindowSet,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["window", "center", "radius", "size", "members"])?;
    for (k, win) in windows.windows().iter().enumerate() {
        let members: Vec<&str> = win
            .members
            .iter()
            .map(|&i| sites.ids()[i].as_str())
            .collect();
        w.write_record([
            k.to_string(),
            sites.ids()[win.center].clone(),
            win.radius.to_string(),
            win.size().to_string(),
            members.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_statistics(path: &Path, run: &ScanRun) -> Result<()> {
    let err = write_err(path);
    let mut w = csv_writer(path)?;
    w.write_record([
        "window",
        "method",
        "center",
        "radius",
        "size",
        "statistic",
        "degenerate",
    ])
    .map_err(&err)?;
    for s in &run.report.statistics {
        let win = run.windows.get(s.window);
        let value = if s.degenerate {
            String::new()
        } else {
            s.value.to_string()
        };
        w.write_record([
            s.window.to_string(),
            s.method.to_string(),
            run.sites.ids()[win.center].clone(),
            win.radius.to_string(),
            win.size().to_string(),
            value,
            s.degenerate.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_plotdata(path: &Path, run: &ScanRun) -> Result<()> {
    let err = write_err(path);
    let data = &run.data;
    let mlc = &run.report.mlc_window;
    let mut w = csv_writer(path)?;
    w.write_record(["kind", "site_id", "group", "time", "variable", "value"])
        .map_err(&err)?;
    let group = |i: usize| if mlc.contains(i) { "in" } else { "out" };
    for i in 0..data.n_sites() {
        for t in 0..data.n_times() {
            for (v, name) in data.var_names().iter().enumerate() {
                w.write_record([
                    "curve",
                    &run.sites.ids()[i],
                    group(i),
                    &run.time_labels[t],
                    name,
                    &data.value(i, t, v).to_string(),
                ])
                .map_err(&err)?;
            }
        }
    }
    for label in ["in", "out"] {
        let members: Vec<usize> = (0..data.n_sites()).filter(|&i| group(i) == label).collect();
        for t in 0..data.n_times() {
            for (v, name) in data.var_names().iter().enumerate() {
                let mean = members.iter().map(|&i| data.value(i, t, v)).sum::<f64>()
                    / members.len() as f64;
                w.write_record([
                    "mean",
                    "",
                    label,
                    &run.time_labels[t],
                    name,
                    &mean.to_string(),
                ])
                .map_err(&err)?;
            }
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn report_json(summary: &ScanSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("report is serializable");
    s.push('\n');
    s
}

/// Writes `report.json`, `windows.csv`, `statistics.csv` and `plotdata.csv`
/// into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, run: &ScanRun) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let report = dir.join(REPORT_FILE);
    fs::write(&report, report_json(&run.summary)).map_err(|e| CliError::io(&report, e))?;
    let windows = dir.join(WINDOWS_FILE);
    write_windows_csv(create(&windows)?, &run.sites, &run.windows).map_err(write_err(&windows))?;
    write_statistics(&dir.join(STATISTICS_FILE), run)?;
    write_plotdata(&dir.join(PLOTDATA_FILE), run)
}
