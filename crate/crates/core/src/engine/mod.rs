//! The outer loop: solve the slack LP, stop if every slack vanishes,
//! otherwise refine and solve again until the time budget runs out.

mod certificate;
mod metrics;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::LpStatus;
use crate::lyapunov::{self, slack_cells, LyapunovCandidate, LyapunovError, SearchConfig};
use crate::model::{validate_partition, Partition, Violation, ViolationKind};
use crate::refinement::{self, apply_plan, RefinementError, Strategy};

pub(crate) use certificate::random_interior_point;
pub use certificate::{certified_vdot, verify_certificate, CertificateReport, CertificateViolation, CheckKind, AUDIT_SAMPLES, CONTINUITY_TOL};
pub use metrics::{metrics, strategy_ordering, MetricRow, OrderingReport, StrategySummary};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("partition fails validation ({} violation(s)); first: {}", .0.len(), .0[0].message)]
    InvalidPartition(Vec<Violation>),
    #[error("no iteration records")]
    EmptyRecords,
    #[error("solver reported a zero-slack candidate that fails the independent check: {0}")]
    CertificateRejected(CertificateViolation),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Refinement(#[from] RefinementError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisStatus {
    Valid,
    TimedOut,
}

/// One LP round; emitted as a JSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Cells in the partition that was solved.
    pub cells: usize,
    pub slack_sum: f64,
    /// Cells with slack above the zero tolerance.
    pub slack_cells: usize,
    /// LP build + solve time in seconds.
    pub t_opt: f64,
    pub strategy: Strategy,
    /// Vertices inserted by the refinement that followed (0 on the last round).
    pub vertices_added: usize,
    pub lp_vars: usize,
    pub lp_constraints: usize,
    /// Wall-clock since the start of the run, in seconds.
    pub elapsed: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
}

#[derive(Clone, Debug)]
pub struct AnalysisResult {
    pub status: AnalysisStatus,
    pub strategy: Strategy,
    /// Candidate solved on `partition`; `None` if that partition's LP did
    /// not finish.
    pub candidate: Option<LyapunovCandidate>,
    /// The partition the candidate belongs to.
    pub partition: Partition,
    pub records: Vec<IterationRecord>,
    pub report: Option<CertificateReport>,
    pub warnings: Vec<String>,
    pub elapsed: f64,
}

impl AnalysisResult {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_cells(&self) -> usize {
        self.partition.num_cells()
    }
}

/// Runs the search without a record callback.
pub fn analyze(p: &Partition, strategy: Strategy, config: &SearchConfig) -> Result<AnalysisResult, EngineError> {
    analyze_with(p, strategy, config, &mut |_| {})
}

/// Runs the search, handing every iteration record to `on_record` as soon
/// as it is complete.
pub fn analyze_with(
    p: &Partition,
    strategy: Strategy,
    config: &SearchConfig,
    on_record: &mut dyn FnMut(&IterationRecord),
) -> Result<AnalysisResult, EngineError> {
    let start = Instant::now();
    config.validate()?;
    let blocking: Vec<Violation> =
        validate_partition(p).into_iter().filter(|v| v.kind != ViolationKind::AffineTermAtOrigin).collect();
    if !blocking.is_empty() {
        return Err(EngineError::InvalidPartition(blocking));
    }
    let timeout = Duration::from_secs_f64(config.timeout_seconds.min(1e9));
    let mut result = AnalysisResult {
        status: AnalysisStatus::TimedOut,
        strategy,
        candidate: None,
        partition: p.clone(),
        records: Vec::new(),
        report: None,
        warnings: crate::model::origin_affine_warnings(p).into_iter().map(|v| v.message).collect(),
        elapsed: 0.0,
    };

    for iteration in 0.. {
        let Some(remaining) = timeout.checked_sub(start.elapsed()).filter(|r| !r.is_zero()) else { break };
        let t0 = Instant::now();
        let solve = lyapunov::search_candidate(&result.partition, config, remaining)?;
        let t_opt = t0.elapsed().as_secs_f64();
        let Some(cand) = solve.candidate else {
            debug_assert_eq!(solve.status, LpStatus::TimedOut);
            break;
        };
        let slack = slack_cells(&cand, config.zero_tolerance);
        let mut record = IterationRecord {
            iteration,
            cells: result.partition.num_cells(),
            slack_sum: cand.slack_sum(),
            slack_cells: slack.len(),
            t_opt,
            strategy,
            vertices_added: 0,
            lp_vars: solve.num_vars,
            lp_constraints: solve.num_constraints,
            elapsed: 0.0,
            fallback: false,
        };

        if slack.is_empty() {
            let report = verify_certificate(&result.partition, &cand, config).map_err(EngineError::CertificateRejected)?;
            record.elapsed = start.elapsed().as_secs_f64();
            on_record(&record);
            result.records.push(record);
            result.candidate = Some(cand);
            result.report = Some(report);
            result.status = AnalysisStatus::Valid;
            break;
        }

        let plan = refinement::propose(strategy, &result.partition, &cand, config.zero_tolerance)?;
        let (next, added) = apply_plan(&result.partition, &plan)?;
        for w in &plan.warnings {
            log::debug!("iteration {iteration}: {w}");
        }
        record.vertices_added = added;
        record.fallback = plan.fallback;
        record.elapsed = start.elapsed().as_secs_f64();
        on_record(&record);
        result.records.push(record);
        result.candidate = Some(cand);
        // out of time: report the candidate with the partition it was solved on
        if start.elapsed() >= timeout {
            break;
        }
        result.partition = next;
        result.candidate = None;
    }
    result.elapsed = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Runs every strategy on its own copy of `p`, in parallel.
pub fn compare(p: &Partition, config: &SearchConfig) -> Vec<(Strategy, Result<AnalysisResult, EngineError>)> {
    std::thread::scope(|s| {
        let handles: Vec<_> = Strategy::ALL.iter().map(|&st| (st, s.spawn(move || analyze(p, st, config)))).collect();
        handles.into_iter().map(|(st, h)| (st, h.join().expect("analysis thread panicked"))).collect()
    })
}
