use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, field {field}: {msg}")]
    Parse {
        line: usize,
        field: usize,
        msg: String,
    },

    #[error("{0} is empty")]
    Empty(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("channel {channel} has zero variance")]
    ZeroVariance { channel: usize },

    #[error("unstable autoregression: spectral radius {radius:.6} >= 1")]
    Unstable { radius: f64 },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 2,
            Error::Dimension(_)
            | Error::RankDeficient(_)
            | Error::Singular(_)
            | Error::ZeroVariance { .. }
            | Error::Unstable { .. } => 3,
            Error::Io { .. } | Error::Parse { .. } | Error::Empty(_) | Error::Json(_) => 4,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}

/// Attaches the name of a pipeline stage to an error.
pub trait StageContext<T> {
    fn stage(self, name: &str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, name: &str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage: name.to_string(),
            source: Box::new(e),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_keeps_exit_code_and_names_stage() {
        let r: Result<()> = Err(Error::Singular("x".into()));
        let e = r.stage("unmix").unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().starts_with("unmix: singular"));
        assert_eq!(Error::Config("bad".into()).exit_code(), 2);
        assert_eq!(Error::Empty("file".into()).exit_code(), 4);
    }
}
