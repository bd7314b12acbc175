use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("non-finite numeric input `{0}`")]
    NumericInput(&'static str),

    #[error("brake controller is not engaged")]
    BrakeNotEngaged,

    #[error("degenerate trial: {0}")]
    DegenerateTrial(String),

    #[error("assist stream exhausted after {0} samples")]
    AssistStreamExhausted(usize),

    #[error("format error at row {row}: {reason}")]
    Format { row: usize, reason: String },

    #[error("event sequence error at index {index}: {reason}")]
    EventSequence { index: usize, reason: String },

    #[error("insufficient data: need at least {needed} {what}, found {found}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("sample `{label}` has size {n}, outside [{min}, {max}]")]
    SampleSize {
        label: String,
        n: usize,
        min: usize,
        max: usize,
    },

    #[error("degenerate sample `{0}`: all values identical")]
    DegenerateSample(String),

    #[error("non-finite value in sample `{0}`")]
    NonFiniteSample(String),

    #[error("comparison `{comparison}` failed: {source}")]
    Comparison {
        comparison: String,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported schema version `{found}` (this build reads major {expected})")]
    SchemaVersion { found: String, expected: u32 },

    #[error("run `{label}` failed: {source}")]
    Run {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable category, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } | Error::SchemaVersion { .. } => "config",
            Error::Json(e) if e.is_syntax() || e.is_data() || e.is_eof() => "config",
            Error::NumericInput(_) => "numeric_input",
            Error::BrakeNotEngaged => "state",
            Error::DegenerateTrial(_) | Error::AssistStreamExhausted(_) => "degenerate_trial",
            Error::Format { .. } | Error::Csv(_) => "format",
            Error::EventSequence { .. } => "event_sequence",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::SampleSize { .. } | Error::DegenerateSample(_) | Error::NonFiniteSample(_) => {
                "sample"
            }
            Error::Comparison { .. } => "comparison",
            Error::Run { .. } => "run",
            Error::Io(_) | Error::Json(_) => "io",
        }
    }
}
