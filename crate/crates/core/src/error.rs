use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("cost identity violated: C_oc/C_co = {ratio}, exp(alpha*T_o) = {expected}")]
    IdentityViolation { ratio: f64, expected: f64 },

    #[error("cost reports are not comparable: {0}")]
    MismatchedReports(String),

    #[error("series error: {0}")]
    Series(String),

    #[error("series do not overlap ({a_start}..={a_end} vs {b_start}..={b_end})")]
    NoOverlap {
        a_start: NaiveDate,
        a_end: NaiveDate,
        b_start: NaiveDate,
        b_end: NaiveDate,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("country `{name}` not found; available: {}", available.join(", "))]
    UnknownCountry {
        name: String,
        available: Vec<String>,
    },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
