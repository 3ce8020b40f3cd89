//! Solver-independent audit of a Lyapunov certificate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dot, Point, VertexId};
use crate::lyapunov::{LyapunovCandidate, SearchConfig};
use crate::model::{Cell, CellId, Partition};

/// Residual allowed between the pieces of two cells at a shared vertex.
pub const CONTINUITY_TOL: f64 = 1e-8;

/// Interior points sampled by [`verify_certificate`].
pub const AUDIT_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    MissingPiece,
    Decrease,
    Positivity,
    Continuity,
    OriginOffset,
    SampledDecrease,
    SampledPositivity,
}

#[derive(Clone, Debug, Error, PartialEq, Serialize, Deserialize)]
#[error("certificate violation ({kind:?}) in cells {cells:?}{}: value {value:e}", vertex.map(|v| format!(" at vertex {v}")).unwrap_or_default())]
pub struct CertificateViolation {
    pub kind: CheckKind,
    pub cells: Vec<CellId>,
    pub vertex: Option<VertexId>,
    pub point: Option<Vec<f64>>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub vertex_checks: usize,
    pub samples: usize,
    /// Largest `V̇` over all checked vertices (should be ≤ -ε1).
    pub max_vertex_decrease: f64,
    /// Smallest `V` over all checked non-origin vertices (should be ≥ ε2).
    pub min_vertex_value: f64,
    pub max_continuity_residual: f64,
}

/// `V̇` as constrained by the LP: cells touching the origin use `A x`.
pub fn certified_vdot(candidate: &LyapunovCandidate, cell: &Cell, x: &[f64]) -> f64 {
    let pc = candidate.piece(cell.id).expect("piece exists");
    let f = if cell.contains_origin { cell.law.apply_linear(x) } else { cell.law.apply(x) };
    dot(&pc.p, &f)
}

/// Re-checks decrease, positivity and continuity at every vertex, then
/// samples interior points (seeded by `config.seed`) and confirms `V > 0`,
/// `V̇ < 0` there.
pub fn verify_certificate(
    p: &Partition,
    candidate: &LyapunovCandidate,
    config: &SearchConfig,
) -> Result<CertificateReport, CertificateViolation> {
    let zt = config.zero_tolerance;
    let mut report = CertificateReport {
        vertex_checks: 0,
        samples: 0,
        max_vertex_decrease: f64::NEG_INFINITY,
        min_vertex_value: f64::INFINITY,
        max_continuity_residual: 0.0,
    };
    let fail = |kind, cells: Vec<CellId>, vertex, point: Option<&[f64]>, value| CertificateViolation {
        kind,
        cells,
        vertex,
        point: point.map(|x| x.to_vec()),
        value,
    };

    for c in p.cells() {
        let Some(pc) = candidate.piece(c.id) else {
            return Err(fail(CheckKind::MissingPiece, vec![c.id], None, None, f64::NAN));
        };
        if c.contains_origin && pc.q != 0.0 {
            return Err(fail(CheckKind::OriginOffset, vec![c.id], None, None, pc.q));
        }
        for &v in &c.vertices {
            let x = p.vertex(v);
            if x.is_origin() {
                continue;
            }
            let vdot = certified_vdot(candidate, c, x);
            if vdot > -config.eps1 + zt {
                return Err(fail(CheckKind::Decrease, vec![c.id], Some(v), Some(x), vdot));
            }
            let val = dot(&pc.p, x) + pc.q;
            if val < config.eps2 - zt {
                return Err(fail(CheckKind::Positivity, vec![c.id], Some(v), Some(x), val));
            }
            report.vertex_checks += 1;
            report.max_vertex_decrease = report.max_vertex_decrease.max(vdot);
            report.min_vertex_value = report.min_vertex_value.min(val);
        }
    }

    let mut shared: Vec<_> = p.vertex_cells().into_iter().filter(|(_, cs)| cs.len() > 1).collect();
    shared.sort_unstable_by_key(|(v, _)| *v);
    for (v, cs) in shared {
        let x = p.vertex(v);
        let vals: Vec<f64> = cs.iter().map(|&c| candidate.value(c, x).unwrap()).collect();
        for (k, &val) in vals.iter().enumerate().skip(1) {
            let r = (val - vals[0]).abs();
            report.max_continuity_residual = report.max_continuity_residual.max(r);
            if r > CONTINUITY_TOL {
                return Err(fail(CheckKind::Continuity, vec![cs[0], cs[k]], Some(v), Some(x), r));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let cells = p.cells();
    for _ in 0..AUDIT_SAMPLES {
        let c = &cells[rng.gen_range(0..cells.len())];
        let pts = p.cell_points(c);
        let x = random_interior_point(&mut rng, &pts);
        if x.norm() <= 1e-9 {
            continue;
        }
        let pc = candidate.piece(c.id).unwrap();
        let val = dot(&pc.p, &x) + pc.q;
        if !(val > 0.0) {
            return Err(fail(CheckKind::SampledPositivity, vec![c.id], None, Some(&x), val));
        }
        let vdot = certified_vdot(candidate, c, &x);
        if !(vdot < 0.0) {
            return Err(fail(CheckKind::SampledDecrease, vec![c.id], None, Some(&x), vdot));
        }
        report.samples += 1;
    }
    Ok(report)
}

/// Uniform random weights on the simplex (normalized exponentials).
pub(crate) fn random_interior_point<R: Rng>(rng: &mut R, pts: &[Point]) -> Point {
    let w: Vec<f64> = pts.iter().map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    let d = pts[0].dim();
    let mut x = vec![0.0; d];
    for (p, wi) in pts.iter().zip(&w) {
        for k in 0..d {
            x[k] += wi / s * p[k];
        }
    }
    Point::new(x)
}
