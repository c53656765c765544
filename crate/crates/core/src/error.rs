use thiserror::Error;

/// Errors produced by samplers, field generators, estimators and the
/// experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operation not supported on {space} spaces: {op}")]
    UnsupportedSpace { op: &'static str, space: String },

    #[error("point does not belong to space {space}: {detail}")]
    PointOutsideSpace { space: String, detail: String },

    #[error("transform and point belong to different spaces ({transform} vs {point})")]
    SpaceMismatch { transform: String, point: String },

    #[error("invalid space parameters: {0}")]
    InvalidSpace(String),

    #[error("matrix is not a rotation: {0}")]
    NotARotation(String),

    #[error("cannot enumerate a continuous transformation family")]
    ContinuousFamily,

    #[error("tied field values detected: {0}")]
    TiedValues(String),

    #[error("field generation failed: {0}")]
    Generation(String),

    #[error("shift {shift} is not a multiple of 1/{grid}")]
    OffGridShift { shift: f64, grid: usize },

    #[error("quantile identity violated: |F(q) - p| = {deviation} exceeds 1/{eval_points}")]
    QuantileIdentity { deviation: f64, eval_points: usize },

    #[error("sample {0} lies outside [0, 1]")]
    SampleOutOfRange(f64),

    #[error("expected cell probability is zero at index {0}")]
    ZeroExpectedCell(usize),

    #[error("test set has no exact measure on this space: {0}")]
    UnsupportedTestSet(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("worker pool: {0}")]
    WorkerPool(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("i/o failure at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failure: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
