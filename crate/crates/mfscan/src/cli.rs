use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mfscan_core::inference::{DEFAULT_PERMUTATIONS, DEFAULT_SIGNIFICANCE};
use mfscan_core::{CoordinateMode, Method};

use crate::error::{CliError, Result};
use crate::io::load_sites;
use crate::report::{
    build_windows, run_scan, write_outputs, write_windows_csv, ScanRunConfig, WINDOWS_FILE,
};
use crate::study::run_simulation;

#[derive(Debug, Parser)]
#[command(
    name = "mfscan",
    version,
    about = "Spatial scan statistics for multivariate functional data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scan a panel for the most likely cluster and test it by permutation.
    Scan(ScanArgs),
    /// Run a simulation study described by a JSON file.
    Simulate(SimulateArgs),
    /// List the candidate windows of a site file.
    Windows(WindowArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Planar,
    Geodetic,
}

impl From<ModeArg> for CoordinateMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Planar => CoordinateMode::Planar,
            ModeArg::Geodetic => CoordinateMode::Geodetic,
        }
    }
}

#[derive(Debug, Args)]
struct GeometryArgs {
    /// Site CSV with `site_id,x,y` or `site_id,lon,lat`.
    #[arg(long)]
    sites: PathBuf,
    #[arg(long, value_enum, default_value = "planar")]
    coordinate_mode: ModeArg,
    /// Largest window radius (km for geodetic sites, coordinate units otherwise).
    #[arg(long)]
    max_radius_km: Option<f64>,
    /// Largest window as a fraction of the sites.
    #[arg(long, default_value_t = 0.5)]
    max_fraction: f64,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Long-format CSV `site_id,time,var1,...`.
    #[arg(long)]
    data: PathBuf,
    /// PMFSS, MDFFSS, MRBFSS or NPFSS.
    #[arg(long)]
    method: Method,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Significance level for the MLC and the secondary clusters.
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    alpha_level: f64,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Study description (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct WindowArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Output directory; the CSV goes to standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn scan(args: ScanArgs) -> Result<()> {
    let g = args.geometry;
    let config = ScanRunConfig {
        sites: g.sites,
        data: args.data,
        method: args.method,
        coordinate_mode: g.coordinate_mode.into(),
        max_radius: g.max_radius_km,
        max_fraction: g.max_fraction,
        permutations: args.permutations,
        seed: args.seed,
        significance: args.alpha_level,
        out: args.out,
        workers: args.workers,
    };
    let run = run_scan(&config)?;
    write_outputs(&config.out, &run)?;
    let s = &run.summary;
    let c = &s.most_likely_cluster;
    println!(
        "{}: most likely cluster centred on {} ({} sites, radius {}), statistic {}, p = {}",
        s.method, c.center, c.size, c.radius, s.statistic, s.p_value
    );
    println!(
        "{} secondary cluster(s); outputs in {}",
        s.secondary_clusters.len(),
        config.out.display()
    );
    Ok(())
}

fn windows(args: WindowArgs) -> Result<()> {
    let g = args.geometry;
    let sites = load_sites(&g.sites, g.coordinate_mode.into())?;
    let set = build_windows(&sites, g.max_radius_km, g.max_fraction)?;
    let fail = |path: PathBuf| {
        move |e: csv::Error| CliError::io(path, std::io::Error::other(e.to_string()))
    };
    match args.out {
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            let path = dir.join(WINDOWS_FILE);
            let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            write_windows_csv(file, &sites, &set).map_err(fail(path))?;
        }
        None => {
            let stdout = std::io::stdout();
            write_windows_csv(stdout.lock(), &sites, &set).map_err(fail("<stdout>".into()))?;
        }
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let report = run_simulation(&args.config, &args.out, args.workers)?;
    println!(
        "{} configuration(s) written to {}",
        report.configs.len(),
        args.out.display()
    );
    Ok(())
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Scan(a) => scan(a),
        Command::Simulate(a) => simulate(a),
        Command::Windows(a) => windows(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}
