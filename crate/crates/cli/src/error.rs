use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] iadmmn_core::Error),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("cannot parse config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("variant {label} on {m}x{n} dataset {dataset}: {source}")]
    Variant {
        label: String,
        m: usize,
        n: usize,
        dataset: usize,
        source: iadmmn_core::ValidationError,
    },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("trace {path}: {message}")]
    Trace { path: PathBuf, message: String },
    #[error("inputs of run {run} differ from those of its cell")]
    Fairness { run: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
