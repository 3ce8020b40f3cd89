//! Small dense linear-algebra helpers for simplices and affine hulls.

use nalgebra::{DMatrix, DVector};

use super::point::{distance, dot, norm};
use crate::tol;

/// Largest pairwise distance.
pub fn diameter(points: &[&[f64]]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max(distance(points[i], points[j]));
        }
    }
    d
}

/// Orthonormal basis of the affine hull of `points`, anchored at `points[0]`.
///
/// Directions whose Gram–Schmidt residual falls below the degeneracy
/// tolerance (relative to the diameter) are treated as dependent.
pub fn affine_basis(points: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    if points.len() < 2 {
        return basis;
    }
    let scale = diameter(points);
    if scale == 0.0 {
        return basis;
    }
    let origin = points[0];
    for p in &points[1..] {
        let mut r: Vec<f64> = p.iter().zip(origin).map(|(a, b)| (a - b) / scale).collect();
        // two passes of modified Gram-Schmidt for stability
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&r, b);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let rn = norm(&r);
        if rn > tol::DEGENERACY {
            r.iter_mut().for_each(|x| *x /= rn);
            basis.push(r);
        }
        if basis.len() == origin.len() {
            break;
        }
    }
    basis
}

/// Dimension of the affine hull.
pub fn affine_dim(points: &[&[f64]]) -> usize {
    affine_basis(points).len()
}

/// Coordinates of `points` in the orthonormal frame (`anchor`, `basis`).
pub fn project(points: &[&[f64]], anchor: &[f64], basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            let d: Vec<f64> = p.iter().zip(anchor).map(|(a, b)| a - b).collect();
            basis.iter().map(|b| dot(&d, b)).collect()
        })
        .collect()
}

/// Determinant of the edge matrix `[v1 - v0, ..., vn - v0]` for `n + 1`
/// points in R^n.
pub fn simplex_det(simplex: &[&[f64]]) -> f64 {
    let n = simplex.len() - 1;
    debug_assert!(simplex.iter().all(|p| p.len() == n));
    if n == 0 {
        return 1.0;
    }
    let m = DMatrix::from_fn(n, n, |r, c| simplex[c + 1][r] - simplex[0][r]);
    m.determinant()
}

/// Volume of an n-simplex in R^n.
pub fn simplex_volume(simplex: &[&[f64]]) -> f64 {
    let n = simplex.len() - 1;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    simplex_det(simplex).abs() / fact
}

/// Scale-free degeneracy test: `|det| / L^n` against the degeneracy
/// tolerance, with `L` the longest edge.
pub fn is_degenerate_simplex(simplex: &[&[f64]]) -> bool {
    let n = simplex.len() - 1;
    let l = diameter(simplex);
    if l == 0.0 {
        return true;
    }
    simplex_det(simplex).abs() / l.powi(n as i32) <= tol::DEGENERACY
}

/// Barycentric coordinates of `x` with respect to a full-dimensional simplex.
pub fn barycentric(simplex: &[&[f64]], x: &[f64]) -> Option<Vec<f64>> {
    let n = simplex.len() - 1;
    let m = DMatrix::from_fn(n, n, |r, c| simplex[c + 1][r] - simplex[0][r]);
    let rhs = DVector::from_fn(n, |r, _| x[r] - simplex[0][r]);
    let sol = m.lu().solve(&rhs)?;
    let mut lambda = Vec::with_capacity(n + 1);
    lambda.push(1.0 - sol.iter().sum::<f64>());
    lambda.extend(sol.iter().copied());
    Some(lambda)
}

/// Solves the square system `m x = b` (row-major `m`).
pub fn solve(m: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mat = DMatrix::from_fn(n, n, |r, c| m[r][c]);
    let rhs = DVector::from_column_slice(b);
    mat.lu().solve(&rhs).map(|v| v.iter().copied().collect())
}
