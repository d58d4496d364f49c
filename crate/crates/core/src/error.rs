//! Error types shared across the engine.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid coarse bin specification: {0}")]
    InvalidBinSpec(String),

    #[error("dense reconstruction failed: {0}")]
    ReconstructionFailed(String),

    #[error("empty distribution: total farm count is zero")]
    EmptyDistribution,

    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),

    #[error("unknown device `{0}`")]
    UnknownDevice(String),

    #[error("unknown technological system `{0}`")]
    UnknownSystem(String),

    #[error("invalid allocation profile: {0}")]
    InvalidProfile(String),

    /// No technological system has positive weight at the listed farm sizes.
    #[error("allocation coverage gap: no system has positive weight at farm size(s) {}",
            format_sizes(.0))]
    CoverageGap(Vec<f64>),

    #[error("device `{device}` has zero capacity but a capacity-based scaling rule")]
    ZeroCapacity { device: String },

    #[error("robotic device `{device}` has zero active hours per day")]
    ZeroActiveHours { device: String },

    #[error("device `{device}`: {reason}")]
    InvalidDevice { device: String, reason: String },

    /// Engine error annotated with the inventory cell it occurred in.
    #[error("inventory error at size {size}, system `{ts}`, device `{device}`: {source}")]
    Inventory {
        size: f64,
        ts: String,
        device: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid grid intensity: {0}")]
    InvalidGrid(String),

    #[error("invalid perturbation spec: {0}")]
    InvalidPerturbation(String),

    /// More than the tolerated fraction of Monte Carlo samples failed.
    #[error("sensitivity run aborted: {failed} of {total} samples failed (first cause: {first_cause})")]
    SensitivityFailure {
        failed: usize,
        total: usize,
        first_cause: String,
    },

    #[error("mismatched size units: {0}")]
    UnitMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

fn format_sizes(sizes: &[f64]) -> String {
    let shown: Vec<String> = sizes.iter().take(8).map(|s| s.to_string()).collect();
    if sizes.len() > 8 {
        format!("[{}, … {} more]", shown.join(", "), sizes.len() - 8)
    } else {
        format!("[{}]", shown.join(", "))
    }
}
