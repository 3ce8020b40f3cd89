//! The slack-relaxed vertex LP for a continuous PWA Lyapunov function
//! `V(x) = p_i·x + q_i` on cell `X_i` (`q_i = 0` when the origin is a
//! vertex of `X_i`):
//!
//! ```text
//! min Σ τ_i
//!   p_i·(A_i v + a_i) - τ_i <= -ε1      every cell i, vertex v ≠ 0
//!   p_i·v + q_i             >=  ε2      every cell i, vertex v ≠ 0
//!   V_i(v) = V_j(v)                     every vertex v shared by i, j
//!   τ_i >= 0
//! ```
//!
//! Cells touching the origin drop `a_i` from the decrease row. The program
//! is always feasible: large slacks satisfy every decrease row.
//!
//! [`build_lp`] writes it literally. The search solves the equivalent
//! vertex-value program of [`vertex`] unless told otherwise.

mod vertex;

pub use vertex::{build_vertex_lp, extract_vertex_candidate, CellForm, VertexCell, VertexLayout};

use std::collections::BTreeSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::dot;
use crate::lp::{self, LinearProgram, LpError, LpSolution, LpStatus, Relation};
use crate::model::{Cell, CellId, Partition};
use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum LyapunovError {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("LP did not reach an optimum (status {0:?})")]
    NotOptimal(LpStatus),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Decrease margin ε1.
    pub eps1: f64,
    /// Positivity margin ε2.
    pub eps2: f64,
    /// Slacks and residuals at or below this count as zero.
    pub zero_tolerance: f64,
    pub timeout_seconds: f64,
    /// Seed for the sampling audit of certificates.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub formulation: Formulation,
}

/// Which of the two equivalent programs the search solves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    /// Variables `p_i`, `q_i`, `τ_i` with explicit continuity rows.
    Full,
    /// Variables `w_v = V(v)` and `τ_i`.
    #[default]
    VertexValues,
}

impl std::str::FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(Formulation::Full),
            "vertex-values" => Ok(Formulation::VertexValues),
            _ => Err(format!("unknown formulation `{s}` (expected full or vertex-values)")),
        }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { eps1: 1e-4, eps2: 1e-4, zero_tolerance: tol::ZERO, timeout_seconds: 3600.0, seed: 0, formulation: Formulation::VertexValues }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), LyapunovError> {
        for (name, v) in
            [("eps1", self.eps1), ("eps2", self.eps2), ("zero_tolerance", self.zero_tolerance), ("timeout_seconds", self.timeout_seconds)]
        {
            if !(v > 0.0) || v.is_nan() {
                return Err(LyapunovError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Variable indices of one cell's piece.
#[derive(Clone, Debug, PartialEq)]
pub struct CellVars {
    pub cell: CellId,
    /// First of `dim` consecutive variables holding `p_i`.
    pub p: usize,
    /// `None` for cells touching the origin.
    pub q: Option<usize>,
    pub tau: usize,
}

/// Maps LP variables back to cells; entries follow the partition's cell order.
#[derive(Clone, Debug, PartialEq)]
pub struct LpLayout {
    pub dim: usize,
    pub cells: Vec<CellVars>,
}

impl LpLayout {
    /// Human-readable variable names, for LP export.
    pub fn var_name(&self, v: usize) -> String {
        // each cell's variables are contiguous, ending with τ
        match self.cells.iter().find(|c| c.p <= v && v <= c.tau) {
            Some(c) if v < c.p + self.dim => format!("p{}_{}", c.cell.0, v - c.p),
            Some(c) if Some(v) == c.q => format!("q{}", c.cell.0),
            Some(c) => format!("tau{}", c.cell.0),
            None => format!("x{v}"),
        }
    }
}

fn vertex_value_form(vars: &CellVars, x: &[f64], sign: f64) -> Vec<(usize, f64)> {
    let mut form: Vec<(usize, f64)> = x.iter().enumerate().map(|(k, &c)| (vars.p + k, sign * c)).collect();
    if let Some(q) = vars.q {
        form.push((q, sign));
    }
    form
}

/// Vector field used by the decrease row of `cell` at `v`.
pub(crate) fn decrease_field(cell: &Cell, v: &[f64]) -> Vec<f64> {
    if cell.contains_origin {
        cell.law.apply_linear(v)
    } else {
        cell.law.apply(v)
    }
}

/// Assembles the slack-relaxed program for `p`.
pub fn build_lp(p: &Partition, config: &SearchConfig) -> Result<(LinearProgram, LpLayout), LyapunovError> {
    if p.cells().is_empty() {
        return Err(LyapunovError::InvalidPartition("partition has no cells".into()));
    }
    let n = p.dim();
    let mut lp = LinearProgram::new();
    let mut layout = LpLayout { dim: n, cells: Vec::with_capacity(p.num_cells()) };
    for c in p.cells() {
        let first = lp.add_var(None);
        for _ in 1..n {
            lp.add_var(None);
        }
        let q = (!c.contains_origin).then(|| lp.add_var(None));
        let tau = lp.add_var(Some(0.0));
        layout.cells.push(CellVars { cell: c.id, p: first, q, tau });
    }

    for (c, vars) in p.cells().iter().zip(&layout.cells) {
        for &vid in &c.vertices {
            let v = p.vertex(vid);
            if v.is_origin() {
                continue;
            }
            let f = decrease_field(c, v);
            let mut form: Vec<(usize, f64)> = f.iter().enumerate().map(|(k, &fk)| (vars.p + k, fk)).collect();
            form.push((vars.tau, -1.0));
            lp.add_constraint(form, Relation::Le, -config.eps1);
            lp.add_constraint(vertex_value_form(vars, v, 1.0), Relation::Ge, config.eps2);
        }
    }

    // continuity as a chain over the cells sharing each vertex
    let index: std::collections::HashMap<CellId, usize> = p.cells().iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    let mut shared: Vec<_> = p.vertex_cells().into_iter().filter(|(_, cs)| cs.len() > 1).collect();
    shared.sort_unstable_by_key(|(v, _)| *v);
    for (vid, mut cs) in shared {
        let v = p.vertex(vid);
        if v.is_origin() {
            continue;
        }
        cs.sort_unstable();
        for pair in cs.windows(2) {
            let mut form = vertex_value_form(&layout.cells[index[&pair[0]]], v, 1.0);
            form.extend(vertex_value_form(&layout.cells[index[&pair[1]]], v, -1.0));
            lp.add_constraint(form, Relation::Eq, 0.0);
        }
    }

    lp.set_objective(layout.cells.iter().map(|c| (c.tau, 1.0)).collect());
    Ok((lp, layout))
}

/// One affine piece of the candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub cell: CellId,
    pub p: Vec<f64>,
    pub q: f64,
    pub tau: f64,
}

/// Per-cell pieces `(p_i, q_i, τ_i)`, sorted by cell id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCandidate {
    pub pieces: Vec<Piece>,
}

impl LyapunovCandidate {
    pub fn piece(&self, id: CellId) -> Option<&Piece> {
        self.pieces.binary_search_by_key(&id, |p| p.cell).ok().map(|i| &self.pieces[i])
    }

    pub fn slack_sum(&self) -> f64 {
        self.pieces.iter().map(|p| p.tau).sum()
    }

    /// All slacks at or below `zero_tolerance`.
    pub fn is_valid(&self, zero_tolerance: f64) -> bool {
        self.pieces.iter().all(|p| p.tau <= zero_tolerance)
    }

    /// `V_i(x) = p_i·x + q_i` for the piece of `cell`.
    pub fn value(&self, cell: CellId, x: &[f64]) -> Option<f64> {
        self.piece(cell).map(|pc| dot(&pc.p, x) + pc.q)
    }
}

/// `V̇ = p_i·(A_i v + a_i)` for the candidate's piece on `cell`.
pub fn eval_vdot(candidate: &LyapunovCandidate, cell: &Cell, v: &[f64]) -> f64 {
    let pc = candidate.piece(cell.id).expect("candidate has no piece for cell");
    dot(&pc.p, &cell.law.apply(v))
}

/// Reads `(p_i, q_i, τ_i)` out of an optimal solution.
pub fn extract_candidate(solution: &LpSolution, layout: &LpLayout) -> Result<LyapunovCandidate, LyapunovError> {
    if solution.status != LpStatus::Optimal {
        return Err(LyapunovError::NotOptimal(solution.status));
    }
    let x = &solution.values;
    let mut pieces: Vec<Piece> = layout
        .cells
        .iter()
        .map(|c| Piece {
            cell: c.cell,
            p: x[c.p..c.p + layout.dim].to_vec(),
            q: c.q.map_or(0.0, |q| x[q]),
            tau: x[c.tau].max(0.0),
        })
        .collect();
    pieces.sort_by_key(|p| p.cell);
    Ok(LyapunovCandidate { pieces })
}

/// Ids of cells whose slack exceeds `zero_tolerance`.
pub fn slack_cells(candidate: &LyapunovCandidate, zero_tolerance: f64) -> BTreeSet<CellId> {
    candidate.pieces.iter().filter(|p| p.tau > zero_tolerance).map(|p| p.cell).collect()
}

/// Outcome of one LP round.
#[derive(Clone, Debug)]
pub struct Solve {
    pub candidate: Option<LyapunovCandidate>,
    pub status: LpStatus,
    pub num_vars: usize,
    pub num_constraints: usize,
}

/// Builds and solves the program within `budget`.
pub fn search_candidate(p: &Partition, config: &SearchConfig, budget: Duration) -> Result<Solve, LyapunovError> {
    let (prog, sol, candidate) = match config.formulation {
        Formulation::Full => {
            let (prog, layout) = build_lp(p, config)?;
            let sol = lp::solve_lp(&prog, budget)?;
            let cand = (sol.status == LpStatus::Optimal).then(|| extract_candidate(&sol, &layout)).transpose()?;
            (prog, sol, cand)
        }
        Formulation::VertexValues => {
            let (prog, layout) = build_vertex_lp(p, config)?;
            let sol = lp::solve_lp(&prog, budget)?;
            let cand = (sol.status == LpStatus::Optimal).then(|| extract_vertex_candidate(&sol, &layout)).transpose()?;
            (prog, sol, cand)
        }
    };
    let candidate = match sol.status {
        LpStatus::Optimal => candidate,
        LpStatus::TimedOut => None,
        s => return Err(LyapunovError::NotOptimal(s)),
    };
    Ok(Solve { candidate, status: sol.status, num_vars: prog.num_vars(), num_constraints: prog.num_constraints() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::lp::{DenseSimplex, LpSolver};
    use crate::model::AffineLaw;

    fn neg_identity() -> AffineLaw {
        AffineLaw::linear(vec![vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap()
    }

    fn single_cell(pts: &[[f64; 2]], law: AffineLaw) -> Partition {
        let mut p = Partition::new(2);
        let ids = pts.iter().map(|c| p.add_vertex(Point::from(*c)).unwrap()).collect();
        p.add_cell(ids, law).unwrap();
        p
    }

    #[test]
    fn single_simplex_counts() {
        let p = single_cell(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], neg_identity());
        let (lp, layout) = build_lp(&p, &SearchConfig::default()).unwrap();
        assert_eq!(lp.num_vars(), 4);
        // 3 decrease + 3 positivity; τ >= 0 is the variable's lower bound
        assert_eq!(lp.num_constraints(), 6);
        assert_eq!(lp.lower_bounds().iter().filter(|b| b.is_some()).count(), 1);
        assert_eq!(layout.cells[0].q, Some(2));
        assert_eq!(layout.var_name(3), "tau0");
    }

    #[test]
    fn stable_single_cell_admits_zero_slack() {
        let p = single_cell(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], neg_identity());
        let cfg = SearchConfig::default();
        let (lp, layout) = build_lp(&p, &cfg).unwrap();
        // the hand certificate p = (1,1), q = 0, τ = 0 is feasible
        let x = [1.0, 1.0, 0.0, 0.0];
        assert!(lp.max_violation(&x) <= 0.0);
        for solver in [&DenseSimplex::default() as &dyn LpSolver, &crate::lp::SparseSimplex] {
            let sol = solver.solve(&lp, Duration::from_secs(10)).unwrap();
            let cand = extract_candidate(&sol, &layout).unwrap();
            assert!(cand.is_valid(cfg.zero_tolerance));
            assert!(slack_cells(&cand, cfg.zero_tolerance).is_empty());
        }
    }

    #[test]
    fn flower_like_fan_has_continuity_rows() {
        let mut p = Partition::new(2);
        let o = p.add_vertex(Point::from([0.0, 0.0])).unwrap();
        let c: Vec<_> = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]].iter().map(|x| p.add_vertex(Point::from(*x)).unwrap()).collect();
        for k in 0..4 {
            p.add_cell(vec![o, c[k], c[(k + 1) % 4]], neg_identity()).unwrap();
        }
        let (lp, layout) = build_lp(&p, &SearchConfig::default()).unwrap();
        assert!(layout.cells.iter().all(|c| c.q.is_none()));
        // 4 cells × 2 non-origin vertices × (decrease + positivity), plus one
        // equality per corner shared by two cells
        let eq = lp.constraints().iter().filter(|c| c.relation == Relation::Eq).count();
        assert_eq!(eq, 4);
        assert_eq!(lp.num_constraints(), 16 + 4);
    }

    #[test]
    fn empty_partition_rejected() {
        assert!(matches!(build_lp(&Partition::new(2), &SearchConfig::default()), Err(LyapunovError::InvalidPartition(_))));
    }

    #[test]
    fn vdot_examples() {
        let cell = Cell { id: CellId(0), vertices: vec![], law: neg_identity(), contains_origin: false };
        let cand = LyapunovCandidate { pieces: vec![Piece { cell: CellId(0), p: vec![1.0, 1.0], q: 0.0, tau: 0.0 }] };
        assert_eq!(eval_vdot(&cand, &cell, &[1.0, 1.0]), -2.0);
        let flower = Cell {
            id: CellId(0),
            vertices: vec![],
            law: AffineLaw::linear(vec![vec![-0.1, 1.0], vec![-5.0, -0.1]]).unwrap(),
            contains_origin: true,
        };
        let cand = LyapunovCandidate { pieces: vec![Piece { cell: CellId(0), p: vec![1.0, 0.0], q: 0.0, tau: 0.0 }] };
        assert!((eval_vdot(&cand, &flower, &[1.0, 1.0]) - 0.9).abs() < 1e-15);
        let zero = LyapunovCandidate { pieces: vec![Piece { cell: CellId(0), p: vec![0.0, 0.0], q: 0.0, tau: 0.0 }] };
        assert_eq!(eval_vdot(&zero, &flower, &[0.3, -7.0]), 0.0);
    }

    #[test]
    fn slack_cell_threshold() {
        let mk = |t: &[f64]| LyapunovCandidate {
            pieces: t.iter().enumerate().map(|(i, &tau)| Piece { cell: CellId(i), p: vec![0.0], q: 0.0, tau }).collect(),
        };
        assert!(slack_cells(&mk(&[0.0, 0.0, 0.0]), 1e-8).is_empty());
        assert_eq!(slack_cells(&mk(&[0.0, 1e-12, 0.5]), 1e-8), BTreeSet::from([CellId(2)]));
        assert_eq!(slack_cells(&mk(&[1.0, 2.0]), 1e-8).len(), 2);
        let c = mk(&[0.3]);
        assert!(!c.is_valid(1e-8));
    }

    #[test]
    fn timed_out_solution_is_not_optimal() {
        let layout = LpLayout { dim: 1, cells: vec![] };
        let sol = LpSolution { status: LpStatus::TimedOut, values: vec![], objective: f64::NAN };
        assert_eq!(extract_candidate(&sol, &layout), Err(LyapunovError::NotOptimal(LpStatus::TimedOut)));
    }

    #[test]
    fn both_forms_reach_the_same_optimum() {
        let flower = crate::benchmarks::flower();
        let mut p = Partition::new(2);
        let ids: Vec<_> = [[0.5, 0.5], [2.0, 0.5], [0.5, 2.0], [2.0, 2.0]].iter().map(|c| p.add_vertex(Point::from(*c)).unwrap()).collect();
        let law = AffineLaw::new(vec![vec![-1.0, 0.5], vec![0.2, -1.0]], vec![0.3, -0.1]).unwrap();
        p.add_cell(vec![ids[0], ids[1], ids[2]], law.clone()).unwrap();
        p.add_cell(vec![ids[1], ids[2], ids[3]], law).unwrap();
        let cfg = SearchConfig::default();
        for part in [&flower, &p] {
            let (full, fl) = build_lp(part, &cfg).unwrap();
            let (red, rl) = build_vertex_lp(part, &cfg).unwrap();
            assert!(red.num_vars() < full.num_vars());
            let a = lp::solve_lp(&full, Duration::from_secs(10)).unwrap();
            let b = lp::solve_lp(&red, Duration::from_secs(10)).unwrap();
            assert!((a.objective - b.objective).abs() <= 1e-7 * (1.0 + a.objective.abs()), "{} vs {}", a.objective, b.objective);
            // the reduced solution maps to a feasible point of the full program
            let cand = extract_vertex_candidate(&b, &rl).unwrap();
            let mut x = vec![0.0; full.num_vars()];
            for (c, pc) in fl.cells.iter().zip(&cand.pieces) {
                x[c.p..c.p + fl.dim].copy_from_slice(&pc.p);
                if let Some(q) = c.q {
                    x[q] = pc.q;
                }
                x[c.tau] = pc.tau;
            }
            assert!(full.max_violation(&x) <= 1e-8);
            let _ = extract_candidate(&a, &fl).unwrap();
        }
    }

    #[test]
    fn non_simplex_cells_keep_free_pieces() {
        let p = single_cell(&[[1.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0]], neg_identity());
        let (lp, layout) = build_vertex_lp(&p, &SearchConfig::default()).unwrap();
        assert!(matches!(layout.cells[0].form, CellForm::Free { q: Some(_), .. }));
        // 4 w's, τ, p (2), q
        assert_eq!(lp.num_vars(), 8);
        assert_eq!(lp.constraints().iter().filter(|c| c.relation == Relation::Eq).count(), 4);
        assert_eq!(layout.var_name(0), "w0");
        let sol = lp::solve_lp(&lp, Duration::from_secs(10)).unwrap();
        assert!(extract_vertex_candidate(&sol, &layout).unwrap().is_valid(1e-8));
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        let bad = SearchConfig { eps1: 0.0, ..SearchConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SearchConfig { timeout_seconds: f64::NAN, ..SearchConfig::default() };
        assert!(bad.validate().is_err());
    }
}
