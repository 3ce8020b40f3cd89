use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read, write_atomic, IoError};
use crate::engine::{metrics, AnalysisResult, AnalysisStatus, CertificateReport, IterationRecord, MetricRow};
use crate::lyapunov::{LyapunovCandidate, Piece, SearchConfig};
use crate::model::{CellId, Partition};
use crate::refinement::Strategy;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificatePiece {
    pub id: usize,
    pub p: Vec<f64>,
    pub q: f64,
    pub tau: f64,
}

/// Result of an analysis: the pieces of `V` keyed by the cell ids of the
/// partition file written alongside, plus the run's telemetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub status: AnalysisStatus,
    pub strategy: Strategy,
    pub config: SearchConfig,
    pub slack_sum: f64,
    /// Empty when the last LP did not finish.
    pub cells: Vec<CertificatePiece>,
    #[serde(default)]
    pub records: Vec<IterationRecord>,
    #[serde(default)]
    pub metrics: Vec<MetricRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<CertificateReport>,
}

impl CertificateFile {
    pub fn from_result(r: &AnalysisResult, config: &SearchConfig) -> Self {
        let cells: Vec<CertificatePiece> = r
            .candidate
            .iter()
            .flat_map(|c| &c.pieces)
            .map(|pc| CertificatePiece { id: pc.cell.0, p: pc.p.clone(), q: pc.q, tau: pc.tau })
            .collect();
        CertificateFile {
            status: r.status,
            strategy: r.strategy,
            config: config.clone(),
            slack_sum: cells.iter().map(|c| c.tau).sum(),
            cells,
            records: r.records.clone(),
            metrics: metrics(&r.records).unwrap_or_default(),
            audit: r.report.clone(),
        }
    }

    pub fn candidate(&self) -> LyapunovCandidate {
        let mut pieces: Vec<Piece> =
            self.cells.iter().map(|c| Piece { cell: CellId(c.id), p: c.p.clone(), q: c.q, tau: c.tau }).collect();
        pieces.sort_by_key(|p| p.cell);
        LyapunovCandidate { pieces }
    }

    /// Every partition cell has exactly one piece of the right dimension,
    /// and every piece names a partition cell.
    pub fn check_against(&self, p: &Partition, origin: &str) -> Result<(), IoError> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.cells {
            if p.cell(CellId(c.id)).is_none() {
                return Err(IoError::invalid(origin, format!("certificate cell {} is not in the partition", c.id)));
            }
            if c.p.len() != p.dim() {
                return Err(IoError::invalid(origin, format!("certificate cell {} has p of length {}", c.id, c.p.len())));
            }
            if !seen.insert(c.id) {
                return Err(IoError::invalid(origin, format!("certificate cell {} listed twice", c.id)));
            }
        }
        if let Some(c) = p.cells().iter().find(|c| !seen.contains(&c.id.0)) {
            return Err(IoError::invalid(origin, format!("partition cell {} has no certificate piece", c.id)));
        }
        Ok(())
    }
}

pub fn load_certificate(path: &Path) -> Result<CertificateFile, IoError> {
    let origin = path.display().to_string();
    serde_json::from_str(&read(path)?).map_err(|e| IoError::parse(&origin, e))
}

pub fn save_certificate(c: &CertificateFile, path: &Path) -> Result<(), IoError> {
    let mut s = serde_json::to_string_pretty(c).expect("certificate serializes");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}
