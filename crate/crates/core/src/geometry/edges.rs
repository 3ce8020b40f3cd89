use std::time::Duration;

use super::linalg::{affine_basis, diameter, project};
use super::point::{distance, Point, VertexId};
use super::GeometryError;
use crate::lp::{DenseSimplex, LinearProgram, LpSolver, LpStatus, Relation};
use crate::tol;

/// An unordered vertex pair, stored with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
}

impl Edge {
    pub fn new(x: VertexId, y: VertexId) -> Self {
        assert_ne!(x, y, "edge endpoints must differ");
        if x < y {
            Edge { a: x, b: y }
        } else {
            Edge { a: y, b: x }
        }
    }
}

/// Midpoint adjacency test: `(j, k)` is an edge iff the midpoint cannot
/// place any weight on the remaining points, i.e. `max Σ_{l≠j,k} λ_l = 0`
/// over convex combinations equal to the midpoint.
fn is_adjacent(pts: &[Vec<f64>], j: usize, k: usize) -> bool {
    let d = pts[0].len();
    let mid: Vec<f64> = (0..d).map(|c| 0.5 * (pts[j][c] + pts[k][c])).collect();
    let mut lp = LinearProgram::new();
    let lambda: Vec<usize> = pts.iter().map(|_| lp.add_var(Some(0.0))).collect();
    for c in 0..d {
        lp.add_constraint(lambda.iter().zip(pts).map(|(&l, p)| (l, p[c])).collect(), Relation::Eq, mid[c]);
    }
    lp.add_constraint(lambda.iter().map(|&l| (l, 1.0)).collect(), Relation::Eq, 1.0);
    lp.set_objective(lambda.iter().enumerate().filter(|&(l, _)| l != j && l != k).map(|(_, &v)| (v, -1.0)).collect());
    match DenseSimplex::default().solve(&lp, Duration::from_secs(60)) {
        Ok(sol) if sol.status == LpStatus::Optimal => -sol.objective <= tol::ADJACENCY,
        // an infeasible midpoint program can only come from numerical trouble
        _ => false,
    }
}

/// Edges (1-faces) of the convex hull of `cell`, as index pairs `(j, k)`
/// with `j < k`. Vertices must be in convex position. With
/// `exclude_origin`, edges with an endpoint at the origin are dropped.
pub fn edges_of_cell(cell: &[Point], exclude_origin: bool) -> Result<Vec<(usize, usize)>, GeometryError> {
    if cell.len() < 2 {
        return Err(GeometryError::DegenerateCell);
    }
    let refs: Vec<&[f64]> = cell.iter().map(|p| p.coords()).collect();
    let basis = affine_basis(&refs);
    if basis.is_empty() {
        return Err(GeometryError::DegenerateCell);
    }
    let m = cell.len();
    let mut edges = Vec::new();
    if m == basis.len() + 1 {
        for j in 0..m {
            for k in j + 1..m {
                edges.push((j, k));
            }
        }
    } else {
        let scale = diameter(&refs);
        let local: Vec<Vec<f64>> =
            project(&refs, refs[0], &basis).into_iter().map(|v| v.into_iter().map(|x| x / scale).collect()).collect();
        for j in 0..m {
            for k in j + 1..m {
                if is_adjacent(&local, j, k) {
                    edges.push((j, k));
                }
            }
        }
    }
    if exclude_origin {
        edges.retain(|&(j, k)| !cell[j].is_origin() && !cell[k].is_origin());
    }
    Ok(edges)
}

/// Edges of a cell given by vertex ids, mapped to global [`Edge`]s.
pub fn cell_edges(ids: &[VertexId], points: &[Point], exclude_origin: bool) -> Result<Vec<Edge>, GeometryError> {
    Ok(edges_of_cell(points, exclude_origin)?.into_iter().map(|(j, k)| Edge::new(ids[j], ids[k])).collect())
}

/// Picks the edge maximizing `score`, breaking ties (within a relative
/// 1e-12) by the lexicographically smallest vertex-id pair.
pub fn argmax_edge<F: FnMut(&Edge) -> Option<f64>>(edges: &[Edge], mut score: F) -> Option<Edge> {
    let mut scored: Vec<(Edge, f64)> = edges.iter().filter_map(|e| score(e).map(|s| (*e, s))).collect();
    scored.sort_by(|x, y| x.0.cmp(&y.0));
    let mut best: Option<(Edge, f64)> = None;
    for (e, s) in scored {
        match best {
            None => best = Some((e, s)),
            Some((_, bs)) => {
                if s > bs + 1e-12 * bs.abs().max(s.abs()) {
                    best = Some((e, s));
                }
            }
        }
    }
    best.map(|b| b.0)
}

/// Longest eligible edge; origin-touching edges are never eligible.
pub fn longest_edge(ids: &[VertexId], points: &[Point]) -> Result<Edge, GeometryError> {
    let edges = cell_edges(ids, points, true)?;
    let pos = |v: VertexId| ids.iter().position(|&x| x == v).unwrap();
    argmax_edge(&edges, |e| Some(distance(&points[pos(e.a)], &points[pos(e.b)]))).ok_or(GeometryError::NoEligibleEdge)
}
