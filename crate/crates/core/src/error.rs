use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{score} is undefined for forecast {x} and realization {y}")]
    DomainViolation {
        score: &'static str,
        x: f64,
        y: f64,
    },
    #[error("sample is empty")]
    EmptySample,
    #[error("expectile level {0} is outside (0, 1)")]
    BadTau(f64),
    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("unknown track `{0}`")]
    UnknownTrack(String),
    #[error("track `{track}` has length {len}, expected {expected}")]
    LengthMismatch {
        track: String,
        len: usize,
        expected: usize,
    },
    #[error("non-finite value in `{column}` at row {row}")]
    NonFinite { column: String, row: usize },
    #[error("forecast and realization means differ ({mu_a} vs {mu_b})")]
    CommonMeanViolation { mu_a: f64, mu_b: f64 },
    #[error("forecast `{0}` has zero variance")]
    DegenerateRegressor(String),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("series has zero variance")]
    TooFewEffectiveObservations,
    #[error("subsample size {b} is invalid for n = {n}")]
    BadSubsampleSize { b: usize, n: usize },
    #[error("unsupported component distribution: {0}")]
    UnsupportedDistribution(String),
    #[error("autoregressive coefficient {0} is not stationary")]
    NonStationary(f64),
    #[error("standard deviation `{name}` is negative ({value})")]
    NegativeSigma { name: &'static str, value: f64 },
    #[error("training design is rank deficient")]
    SingularDesign,
    #[error("requested covariance matrix is not positive semi-definite")]
    NotPositiveDefinite,
    #[error("malformed input at row {row}, column `{column}`: {message}")]
    Malformed {
        row: usize,
        column: String,
        message: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DomainViolation { .. } => "domain_violation",
            Error::EmptySample => "empty_sample",
            Error::BadTau(_) => "bad_tau",
            Error::MissingParameter(_) => "missing_parameter",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::UnknownTrack(_) => "unknown_track",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::CommonMeanViolation { .. } => "common_mean_violation",
            Error::DegenerateRegressor(_) => "degenerate_regressor",
            Error::TooFewObservations { .. } => "too_few_observations",
            Error::TooFewEffectiveObservations => "too_few_effective_observations",
            Error::BadSubsampleSize { .. } => "bad_subsample_size",
            Error::UnsupportedDistribution(_) => "unsupported_distribution",
            Error::NonStationary(_) => "non_stationary",
            Error::NegativeSigma { .. } => "negative_sigma",
            Error::SingularDesign => "singular_design",
            Error::NotPositiveDefinite => "not_positive_definite",
            Error::Malformed { .. } => "malformed_input",
            Error::Csv(_) => "malformed_csv",
            Error::Json(_) => "malformed_json",
            Error::Io(_) => "io",
        }
    }

    /// Input problems map to 2, statistical precondition failures to 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownTrack(_)
            | Error::LengthMismatch { .. }
            | Error::NonFinite { .. }
            | Error::Malformed { .. }
            | Error::MissingParameter(_)
            | Error::InvalidParameter { .. }
            | Error::BadTau(_)
            | Error::BadSubsampleSize { .. }
            | Error::UnsupportedDistribution(_)
            | Error::NegativeSigma { .. }
            | Error::NonStationary(_)
            | Error::Csv(_)
            | Error::Json(_)
            | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
