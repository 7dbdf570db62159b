use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("required input file is missing: {0}")]
    MissingFile(PathBuf),

    /// A data row failed to parse or validate. `row` is 1-based over data rows.
    #[error("{file}, row {row}: {message}")]
    Row { file: String, row: usize, message: String },

    #[error("{file}, row {row}: field `{field}` {message}")]
    Field {
        file: String,
        row: usize,
        field: String,
        message: String,
    },

    #[error("{file}, row {row}: duplicate municipality id `{id}`")]
    DuplicateId { file: String, row: usize, id: String },

    #[error("hourly series must have {expected} values, found {found}")]
    SeriesLength { expected: usize, found: usize },

    #[error("hour {hour}: value {value} violates the non-negative constraint")]
    SignViolation { hour: usize, value: f64 },

    #[error("hour {hour}: non-finite value")]
    NonFinite { hour: usize },

    #[error("profile weights sum to {sum}, expected 1")]
    ProfileNotNormalized { sum: f64 },

    #[error("need at least {needed} training rows, got {rows}")]
    InsufficientTraining { rows: usize, needed: usize },

    #[error("design matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    Singular { columns: Vec<String> },

    #[error("no regional total for region `{0}`")]
    MissingRegionTotal(String),

    #[error("region `{region}` has zero predicted demand but a total of {total} MWh")]
    ZeroRegionalPrediction { region: String, total: f64 },

    #[error("unknown vehicle category `{0}`")]
    UnknownVehicleCategory(String),

    #[error("rooftop split table has no entry for zone {zone}, band {band}")]
    MissingSplitEntry { zone: String, band: String },

    #[error("canonical yield table: {0}")]
    YieldTable(String),

    #[error("no production capacity can serve demand: {gap_mwh:.3} MWh/yr stays unserved at any storage size")]
    Infeasible { gap_mwh: f64 },

    #[error("sweep produced no feasible point up to {pv_limit_gwp} GWp (last gap {gap_mwh:.3} MWh)")]
    NoFeasiblePoint { pv_limit_gwp: f64, gap_mwh: f64 },

    #[error("sweep invariant violated at point {index}: {message}")]
    SweepInvariant { index: usize, message: String },

    #[error("{quantity} must be positive")]
    ZeroEnergy { quantity: &'static str },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("scenario file: {0}")]
    Scenario(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn field(file: &str, row: usize, field: &str, message: impl Into<String>) -> Self {
        Error::Field {
            file: file.to_owned(),
            row,
            field: field.to_owned(),
            message: message.into(),
        }
    }
}
