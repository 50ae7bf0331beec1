//! Concentration indices and the window scan.
//!
//! Each method has a straightforward per-window function working from
//! [`WindowSummaries`](crate::fdata::WindowSummaries), ranks or signs, and the
//! [`ScanEngine`] evaluates all windows in one pass over the prefix orders.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::fdata::FunctionalDataset;
use crate::geometry::WindowSet;

mod engine;
mod hotelling;
mod lawley_hotelling;
mod ranks;
mod signs;

pub use engine::ScanEngine;
pub use hotelling::hotelling_sup_statistic;
pub use lawley_hotelling::lh_statistic;
pub use ranks::{
    compute_pointwise_ranks, spatial_ranks, sphericity_residual, tyler_transform,
    wilcoxon_sup_statistic, RankField, SphericizingTransform, TYLER_MAX_ITERATIONS,
    TYLER_TOLERANCE,
};
pub use signs::{
    functional_sign, npfss_raw_norm, npfss_statistic, npfss_with_signs, FunctionalSigns,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum Method {
    /// Lawley–Hotelling trace of the functional MANOVA.
    Pmfss,
    /// Supremum over time of the pointwise Hotelling T².
    Mdffss,
    /// Supremum over time of the rank-based Wilcoxon statistic.
    Mrbfss,
    /// Mean functional spatial sign between the window and its complement.
    Npfss,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pmfss, Method::Mdffss, Method::Mrbfss, Method::Npfss];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pmfss => "PMFSS",
            Method::Mdffss => "MDFFSS",
            Method::Mrbfss => "MRBFSS",
            Method::Npfss => "NPFSS",
        }
    }

    pub(crate) fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown method `{s}`")))
    }
}

/// Index of one window under one method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticValue {
    pub window: usize,
    pub method: Method,
    /// `NaN` when `degenerate`.
    pub value: f64,
    /// The window was skipped because a required matrix was singular.
    pub degenerate: bool,
}

impl StatisticValue {
    pub fn new(window: usize, method: Method, value: Option<f64>) -> Self {
        match value {
            Some(value) => Self {
                window,
                method,
                value,
                degenerate: false,
            },
            None => Self {
                window,
                method,
                value: f64::NAN,
                degenerate: true,
            },
        }
    }
}

/// Most likely cluster of one scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    pub method: Method,
    /// Index into the window set.
    pub mlc: usize,
    pub statistic: f64,
    pub all: Vec<StatisticValue>,
}

/// Index of the largest non-degenerate value; ties go to the smaller window,
/// then to the lower center index.
pub fn most_likely_cluster(values: &[StatisticValue], windows: &WindowSet) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, v) in values.iter().enumerate() {
        if v.degenerate {
            continue;
        }
        best = match best {
            None => Some(k),
            Some(b) => {
                let (wb, wk) = (windows.get(values[b].window), windows.get(v.window));
                let better = v.value > values[b].value
                    || (v.value == values[b].value
                        && (wk.size(), wk.center) < (wb.size(), wb.center));
                if better {
                    Some(k)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Evaluates `method` on every window and returns the most likely cluster.
pub fn scan_all_windows(
    data: &FunctionalDataset,
    windows: &WindowSet,
    method: Method,
) -> Result<ScanOutcome> {
    let engine = ScanEngine::new(data, windows, &[method])?;
    engine.scan(method)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(m.name().to_lowercase().parse::<Method>().unwrap(), m);
        }
        assert!("wilks".parse::<Method>().is_err());
    }
}
