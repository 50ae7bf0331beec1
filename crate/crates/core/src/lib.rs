//! Spatial scan statistics for multivariate functional data.
//!
//! Sites carry `p`-dimensional curves observed on a shared time grid. A scan
//! evaluates a concentration index on every variable-size circular window and
//! reports the window with the largest index (the most likely cluster). Its
//! significance comes from random-labelling permutations.
//!
//! Four concentration indices are available through [`Method`]:
//!
//! * `Pmfss`: functional MANOVA Lawley–Hotelling trace,
//! * `Mdffss`: supremum over time of the pointwise two-sample Hotelling T²,
//! * `Mrbfss`: supremum over time of a Wilcoxon statistic on sphericized
//!   pointwise multivariate ranks,
//! * `Npfss`: standardized norm of the summed functional spatial signs between groups.
//!
//! The crate is `no_std` and only needs `alloc`. Parallel execution is
//! injected through [`inference::Executor`]; the `mfscan` crate provides a
//! thread-pool implementation together with file formats and the CLI.

#![no_std]

extern crate alloc;

pub mod error;
pub mod fdata;
pub mod geometry;
pub mod inference;
pub mod linalg;
pub mod rng;
pub mod simulation;
pub mod stats;

pub use error::{Error, Result};
pub use fdata::{FunctionalDataset, TimeGrid};
pub use geometry::{CoordinateMode, DistanceMatrix, ScanWindow, SiteMap, WindowSet};
pub use inference::{Executor, PermutationPlan, ScanReport, Sequential};
pub use stats::{Method, StatisticValue};
