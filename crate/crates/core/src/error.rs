use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("point coincides with the base station of cell {0}")]
    PointAtBaseStation(usize),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("schedule rejected: {0}")]
    Schedule(String),
    #[error("unsupported schema version {found} (expected {expected})")]
    Schema { found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
