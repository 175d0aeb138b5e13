use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("config field `{field}`: {message}")]
    Field {
        field: &'static str,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] qsync_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
