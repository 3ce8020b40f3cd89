//! Normalized accumulative optimization time versus normalized cell count.

use serde::{Deserialize, Serialize};

use super::{AnalysisStatus, EngineError, IterationRecord};
use crate::refinement::Strategy;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub iteration: usize,
    /// `Σ_{j≤i} t_opt_j / Σ_all t_opt`.
    pub t_opt: f64,
    /// `n_r_i / Σ_all n_r`.
    pub n_r: f64,
}

/// Normalized metrics per record. The last `t_opt` is exactly 1.
pub fn metrics(records: &[IterationRecord]) -> Result<Vec<MetricRow>, EngineError> {
    let cumulative: Vec<f64> = records
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r.t_opt;
            Some(*acc)
        })
        .collect();
    let total_time = *cumulative.last().ok_or(EngineError::EmptyRecords)?;
    let total_cells: usize = records.iter().map(|r| r.cells).sum();
    if !(total_time > 0.0) || total_cells == 0 {
        return Err(EngineError::EmptyRecords);
    }
    Ok(records
        .iter()
        .zip(&cumulative)
        .map(|(r, &c)| MetricRow { iteration: r.iteration, t_opt: c / total_time, n_r: r.cells as f64 / total_cells as f64 })
        .collect())
}

/// One strategy's outcome in a comparison run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub status: AnalysisStatus,
    pub iterations: usize,
    pub cells: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    /// Iterations-to-valid satisfy vector-field ≤ Lyapunov ≤ naive.
    pub holds: bool,
    pub message: String,
}

/// Checks the expected ordering of iterations-to-valid across strategies.
/// Strategies that did not finish count as taking infinitely long.
pub fn strategy_ordering(rows: &[StrategySummary]) -> OrderingReport {
    let iters = |s: Strategy| {
        rows.iter()
            .find(|r| r.strategy == s)
            .filter(|r| r.status == AnalysisStatus::Valid)
            .map_or(f64::INFINITY, |r| r.iterations as f64)
    };
    let (vf, ly, nv) = (iters(Strategy::VectorField), iters(Strategy::LyapunovBased), iters(Strategy::Naive));
    let holds = vf <= ly && ly <= nv && vf.is_finite();
    let message = format!(
        "iterations to valid: vector-field {vf}, lyapunov {ly}, naive {nv}{}",
        if holds { "" } else { " (ordering exception)" }
    );
    OrderingReport { holds, message }
}
