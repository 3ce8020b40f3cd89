//! The same program written over vertex values `w_v = V(v)`.
//!
//! A continuous PWA function is pinned down by its values at the vertices,
//! so on a simplex cell `p_i` and `q_i` are fixed linear maps of the `w`'s
//! of its corners. Continuity then holds by construction and positivity
//! becomes the bound `w_v >= ε2`. Cells with more than `n + 1` vertices keep
//! free `p_i`, `q_i` tied to the vertex values by equalities.
//!
//! The feasible set of functions `V` and the optimal value of `Σ τ_i` are
//! those of [`build_lp`](super::build_lp), on a much smaller program.

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::{decrease_field, LyapunovCandidate, LyapunovError, Piece, SearchConfig};
use crate::geometry::{dot, VertexId};
use crate::lp::{LinearProgram, LpSolution, LpStatus, Relation};
use crate::model::{Cell, CellId, Partition};

#[derive(Clone, Debug, PartialEq)]
pub enum CellForm {
    /// `(p, q) = G w` over `vertices` (the non-origin corners). `G` has `n`
    /// rows for cells touching the origin and `n + 1` otherwise, the last
    /// one giving `q`.
    Simplex { vertices: Vec<VertexId>, g: Vec<Vec<f64>> },
    /// Free variables as in the full program.
    Free { p: usize, q: Option<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexCell {
    pub cell: CellId,
    pub tau: usize,
    pub form: CellForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexLayout {
    pub dim: usize,
    /// LP variable of `w_v`; the origin has none since `V(0) = 0`.
    pub values: HashMap<VertexId, usize>,
    pub cells: Vec<VertexCell>,
}

impl VertexLayout {
    pub fn var_name(&self, v: usize) -> String {
        if let Some((id, _)) = self.values.iter().find(|(_, &x)| x == v) {
            return format!("w{}", id.0);
        }
        for c in &self.cells {
            if c.tau == v {
                return format!("tau{}", c.cell.0);
            }
            if let CellForm::Free { p, q } = c.form {
                if (p..p + self.dim).contains(&v) {
                    return format!("p{}_{}", c.cell.0, v - p);
                }
                if q == Some(v) {
                    return format!("q{}", c.cell.0);
                }
            }
        }
        format!("x{v}")
    }
}

/// `G` such that `(p, q) = G w` for a simplex cell, or `None` when the
/// cell is not a simplex or its vertex matrix is singular.
fn simplex_map(p: &Partition, cell: &Cell) -> Option<(Vec<VertexId>, Vec<Vec<f64>>)> {
    let n = p.dim();
    if cell.vertices.len() != n + 1 {
        return None;
    }
    let corners: Vec<VertexId> = cell.vertices.iter().copied().filter(|&v| !p.vertex(v).is_origin()).collect();
    let k = corners.len();
    // rows [v, 1] for I_1 cells, [v] when q is pinned to zero
    let m = if cell.contains_origin {
        if k != n {
            return None;
        }
        DMatrix::from_fn(n, n, |r, c| p.vertex(corners[r])[c])
    } else {
        DMatrix::from_fn(n + 1, n + 1, |r, c| if c < n { p.vertex(corners[r])[c] } else { 1.0 })
    };
    let inv = m.try_inverse()?;
    if inv.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let g = (0..inv.nrows()).map(|r| (0..inv.ncols()).map(|c| inv[(r, c)]).collect()).collect();
    Some((corners, g))
}

/// Builds the vertex-value program for `p`.
pub fn build_vertex_lp(p: &Partition, config: &SearchConfig) -> Result<(LinearProgram, VertexLayout), LyapunovError> {
    if p.cells().is_empty() {
        return Err(LyapunovError::InvalidPartition("partition has no cells".into()));
    }
    let n = p.dim();
    let mut lp = LinearProgram::new();
    let mut values: HashMap<VertexId, usize> = HashMap::new();
    let mut used: Vec<VertexId> = p.cells().iter().flat_map(|c| c.vertices.iter().copied()).collect();
    used.sort_unstable();
    used.dedup();
    for v in used {
        if !p.vertex(v).is_origin() {
            values.insert(v, lp.add_var(Some(config.eps2)));
        }
    }

    let mut cells = Vec::with_capacity(p.num_cells());
    for c in p.cells() {
        let tau = lp.add_var(Some(0.0));
        let form = match simplex_map(p, c) {
            Some((vertices, g)) => CellForm::Simplex { vertices, g },
            None => {
                let first = lp.add_var(None);
                for _ in 1..n {
                    lp.add_var(None);
                }
                let q = (!c.contains_origin).then(|| lp.add_var(None));
                CellForm::Free { p: first, q }
            }
        };
        cells.push(VertexCell { cell: c.id, tau, form });
    }

    for (c, vc) in p.cells().iter().zip(&cells) {
        for &vid in &c.vertices {
            let v = p.vertex(vid);
            if v.is_origin() {
                continue;
            }
            let f = decrease_field(c, v);
            let mut form: Vec<(usize, f64)> = match &vc.form {
                CellForm::Simplex { vertices, g } => {
                    (0..vertices.len()).map(|k| (values[&vertices[k]], (0..n).map(|r| f[r] * g[r][k]).sum())).collect()
                }
                CellForm::Free { p: first, q } => {
                    // tie the free piece to the shared vertex value
                    let mut link: Vec<(usize, f64)> = v.iter().enumerate().map(|(k, &x)| (first + k, x)).collect();
                    if let Some(q) = q {
                        link.push((*q, 1.0));
                    }
                    link.push((values[&vid], -1.0));
                    lp.add_constraint(link, Relation::Eq, 0.0);
                    f.iter().enumerate().map(|(k, &fk)| (first + k, fk)).collect()
                }
            };
            form.push((vc.tau, -1.0));
            lp.add_constraint(form, Relation::Le, -config.eps1);
        }
    }

    lp.set_objective(cells.iter().map(|c| (c.tau, 1.0)).collect());
    Ok((lp, VertexLayout { dim: n, values, cells }))
}

/// Recovers `(p_i, q_i, τ_i)` from an optimal vertex-value solution.
pub fn extract_vertex_candidate(solution: &LpSolution, layout: &VertexLayout) -> Result<LyapunovCandidate, LyapunovError> {
    if solution.status != LpStatus::Optimal {
        return Err(LyapunovError::NotOptimal(solution.status));
    }
    let x = &solution.values;
    let n = layout.dim;
    let mut pieces: Vec<Piece> = layout
        .cells
        .iter()
        .map(|c| {
            let (p, q) = match &c.form {
                CellForm::Simplex { vertices, g } => {
                    let w: Vec<f64> = vertices.iter().map(|v| x[layout.values[v]]).collect();
                    let p = (0..n).map(|r| dot(&g[r], &w)).collect();
                    let q = if g.len() > n { dot(&g[n], &w) } else { 0.0 };
                    (p, q)
                }
                CellForm::Free { p, q } => (x[*p..*p + n].to_vec(), q.map_or(0.0, |q| x[q])),
            };
            Piece { cell: c.cell, p, q, tau: x[c.tau].max(0.0) }
        })
        .collect();
    pieces.sort_by_key(|p| p.cell);
    Ok(LyapunovCandidate { pieces })
}
