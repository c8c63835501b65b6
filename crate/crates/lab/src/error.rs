use thiserror::Error;

/// Errors of the scenario runner.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error("unknown {kind} `{key}`")]
    Unknown { kind: &'static str, key: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: specmult_core::error::Error,
    },
    #[error("io: {0}")]
    Io(String),
    #[error("{0}")]
    Verify(String),
}

impl LabError {
    pub fn core(context: impl Into<String>) -> impl FnOnce(specmult_core::error::Error) -> LabError {
        let context = context.into();
        move |source| LabError::Core { context, source }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
