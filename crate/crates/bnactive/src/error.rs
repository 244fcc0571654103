use std::path::PathBuf;

use crate::dataset::DatasetFormatError;
use crate::network::NetworkFormatError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Network {
        path: PathBuf,
        #[source]
        source: NetworkFormatError,
    },

    #[error("{}: {source}", path.display())]
    Dataset {
        path: PathBuf,
        #[source]
        source: DatasetFormatError,
    },

    /// Unreadable or inconsistent experiment configuration.
    #[error("configuration: {0}")]
    Config(String),

    #[error("malformed query `{text}`: {reason}")]
    Query { text: String, reason: String },

    #[error(transparent)]
    Model(#[from] bnactive_core::Error),

    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Configuration problems as opposed to failures while running.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Self::Config(_)
                | Self::Query { .. }
                | Self::Model(bnactive_core::Error::InvalidConfig(_))
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
