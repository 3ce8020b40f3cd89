//! File formats and plotting exports.
//!
//! Partition files list vertices once and refer to them by index, so shared
//! vertices are explicit. Numbers are written in shortest round-trip
//! decimal form, so saving and loading is bit-exact.

mod certificate;
mod levelsets;
mod partition;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use certificate::{load_certificate, save_certificate, CertificateFile, CertificatePiece};
pub use levelsets::{level_segments, levels_csv, vector_field_csv, vector_field_samples, LevelSegment};
pub use partition::{load_partition, parse_partition, partition_to_string, save_partition, CellEntry, PartitionFile};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    /// Syntax or schema error, with 1-based line and column.
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("level-set export supports 2-D systems only (got dimension {0})")]
    DimensionUnsupported(usize),
}

impl IoError {
    pub(crate) fn parse(path: &str, e: serde_json::Error) -> Self {
        IoError::Parse { path: path.into(), line: e.line(), column: e.column(), message: e.to_string() }
    }

    pub(crate) fn invalid(path: &str, message: impl Into<String>) -> Self {
        IoError::Invalid { path: path.into(), message: message.into() }
    }
}

pub(crate) fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read { path: path.into(), source })
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let err = |source| IoError::Write { path: path.into(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}
