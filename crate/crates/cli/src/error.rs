use std::fmt::Display;

use stabilizer_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn config(key: &str, err: impl Display) -> Self {
        Self::Config {
            key: key.to_owned(),
            message: err.to_string(),
        }
    }

    pub fn config_msg(key: &str, message: impl Into<String>) -> Self {
        Self::Config {
            key: key.to_owned(),
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for configuration errors, 3 when no scaling direction contracts,
    /// 4 when the stabilizer diverges, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Core(CoreError::NoContraction { .. }) => 3,
            Self::Core(CoreError::Overflow { .. } | CoreError::NonCauchy { .. }) => 4,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::config_msg("a", "b").exit_code(), 2);
        let nc = CoreError::NoContraction {
            lipschitz_up: 1.0,
            lipschitz_down: 1.0,
        };
        assert_eq!(CliError::from(nc).exit_code(), 3);
        assert_eq!(
            CliError::from(CoreError::NonCauchy { step: 9 }).exit_code(),
            4
        );
        assert_eq!(
            CliError::from(CoreError::Overflow {
                step: 0,
                norm: 1e301
            })
            .exit_code(),
            4
        );
        assert_eq!(CliError::Failed("x".into()).exit_code(), 1);
    }
}
