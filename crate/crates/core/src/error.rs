use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("need at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("duplicate site id `{0}`")]
    DuplicateSiteId(String),
    #[error("sites `{first}` and `{second}` share identical coordinates")]
    DuplicateCoordinates { first: String, second: String },
    #[error("non-finite coordinate for site `{0}`")]
    InvalidCoordinate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("time grid must have at least 2 strictly increasing finite points")]
    InvalidTimeGrid,
    #[error("site index {index} out of range for {n} sites")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("point cloud is rank deficient at grid point {time_index}")]
    RankDeficient { time_index: usize },
    #[error("sphericizing transform did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("every window is degenerate for method {0}")]
    AllWindowsDegenerate(&'static str),
    #[error("window set is empty")]
    EmptyWindowSet,
    #[error("no window with {size} sites contains seed site {seed}")]
    NoMatchingWindow { seed: usize, size: usize },
}
