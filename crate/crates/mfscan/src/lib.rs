//! File formats, parallel execution and the command-line front end for
//! `mfscan-core`.

pub mod cli;
pub mod error;
pub mod executor;
pub mod io;
pub mod report;
pub mod study;

pub use cli::run_cli;
pub use error::{CliError, Result};
pub use executor::Parallel;
pub use io::{load_functional_csv, load_panel, load_sites, Panel};
pub use report::{run_scan, write_outputs, ScanRun, ScanRunConfig, ScanSummary};
