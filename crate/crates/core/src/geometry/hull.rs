//! Convex-hull queries on vertex-represented polytopes.

use std::collections::BTreeSet;
use std::time::Duration;

use nalgebra::DMatrix;

use super::combinations::Combinations;
use super::linalg::{affine_dim, barycentric, diameter, is_degenerate_simplex};
use super::point::dot;
use super::GeometryError;
use crate::lp::{DenseSimplex, LinearProgram, LpSolver, LpStatus, Relation};
use crate::tol;

/// A supporting halfspace `normal · x <= offset` of a full-dimensional
/// polytope, together with the input points lying on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub members: Vec<usize>,
}

impl Facet {
    /// Signed slack `offset - normal · x` (nonnegative inside).
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - dot(&self.normal, x)
    }
}

/// Unit normal of the hyperplane through `d` points in R^d, via the
/// generalized cross product. `None` if the points are affinely dependent.
fn hyperplane_normal(pts: &[&[f64]]) -> Option<Vec<f64>> {
    let d = pts[0].len();
    if d == 1 {
        return Some(vec![1.0]);
    }
    let rows = d - 1;
    let diff = DMatrix::from_fn(rows, d, |r, c| pts[r + 1][c] - pts[0][c]);
    let scale = (0..rows).map(|r| diff.row(r).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut normal = vec![0.0; d];
    for (k, nk) in normal.iter_mut().enumerate() {
        let minor = diff.clone().remove_column(k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *nk = sign * minor.determinant();
    }
    let len = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len / scale.powi(rows as i32) <= tol::DEGENERACY {
        return None;
    }
    normal.iter_mut().for_each(|x| *x /= len);
    Some(normal)
}

/// Facets of the convex hull of full-dimensional `points` by exhaustive
/// search over hyperplanes spanned by `d`-subsets. Intended for the small
/// point sets that make up a cell.
pub fn facets(points: &[&[f64]]) -> Result<Vec<Facet>, GeometryError> {
    let d = points.first().map_or(0, |p| p.len());
    if points.len() < d + 1 || affine_dim(points) < d {
        return Err(GeometryError::DegenerateCell);
    }
    let scale = diameter(points);
    let plane_tol = tol::PLANE * scale;
    let centroid: Vec<f64> = (0..d).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / points.len() as f64).collect();

    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for subset in Combinations::new(points.len(), d) {
        if seen.iter().any(|m| subset.iter().all(|i| m.binary_search(i).is_ok())) {
            continue;
        }
        let pts: Vec<&[f64]> = subset.iter().map(|&i| points[i]).collect();
        let Some(mut normal) = hyperplane_normal(&pts) else { continue };
        let mut offset = dot(&normal, pts[0]);
        if dot(&normal, &centroid) > offset {
            normal.iter_mut().for_each(|x| *x = -*x);
            offset = -offset;
        }
        let mut members = Vec::new();
        let mut supporting = true;
        for (i, p) in points.iter().enumerate() {
            let s = dot(&normal, p) - offset;
            if s > plane_tol {
                supporting = false;
                break;
            }
            if s.abs() <= plane_tol {
                members.push(i);
            }
        }
        if supporting && seen.insert(members.clone()) {
            out.push(Facet { normal, offset, members });
        }
    }
    Ok(out)
}

/// Axis-aligned bounding box.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    pub fn of(points: &[&[f64]]) -> Self {
        let d = points[0].len();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for p in points {
            for k in 0..d {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        BoundingBox { min, max }
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.iter().enumerate().all(|(k, &v)| v >= self.min[k] - slack && v <= self.max[k] + slack)
    }

    /// True if the open interiors may intersect (boxes overlap by more
    /// than `slack` along every axis).
    pub fn overlaps(&self, other: &BoundingBox, slack: f64) -> bool {
        (0..self.min.len()).all(|k| self.min[k] < other.max[k] - slack && other.min[k] < self.max[k] - slack)
    }

    pub fn touches(&self, other: &BoundingBox, slack: f64) -> bool {
        (0..self.min.len()).all(|k| self.min[k] <= other.max[k] + slack && other.min[k] <= self.max[k] + slack)
    }
}

fn is_simplex(points: &[&[f64]]) -> bool {
    let d = points[0].len();
    points.len() == d + 1 && !is_degenerate_simplex(points)
}

/// L1 distance from `x` to the convex hull, via the convex-combination LP
/// `min Σ|s|  s.t. Σ λ v + s = x, Σ λ = 1, λ >= 0`.
fn hull_l1_distance(points: &[&[f64]], x: &[f64]) -> f64 {
    let d = x.len();
    let mut lp = LinearProgram::new();
    let lambda: Vec<usize> = points.iter().map(|_| lp.add_var(Some(0.0))).collect();
    let pos: Vec<usize> = (0..d).map(|_| lp.add_var(Some(0.0))).collect();
    let neg: Vec<usize> = (0..d).map(|_| lp.add_var(Some(0.0))).collect();
    for k in 0..d {
        let mut form: Vec<(usize, f64)> = lambda.iter().zip(points).map(|(&l, p)| (l, p[k])).collect();
        form.push((pos[k], 1.0));
        form.push((neg[k], -1.0));
        lp.add_constraint(form, Relation::Eq, x[k]);
    }
    lp.add_constraint(lambda.iter().map(|&l| (l, 1.0)).collect(), Relation::Eq, 1.0);
    lp.set_objective(pos.iter().chain(&neg).map(|&v| (v, 1.0)).collect());
    match DenseSimplex::default().solve(&lp, Duration::from_secs(60)) {
        Ok(sol) if sol.status == LpStatus::Optimal => sol.objective,
        _ => f64::INFINITY,
    }
}

/// Membership in the closed convex hull of `cell` within tolerance.
pub fn contains_point(cell: &[&[f64]], x: &[f64]) -> bool {
    if cell.is_empty() {
        return false;
    }
    let scale = diameter(cell).max(1.0);
    if !BoundingBox::of(cell).contains(x, tol::BOUNDARY * scale) {
        return false;
    }
    if is_simplex(cell) {
        if let Some(l) = barycentric(cell, x) {
            return l.iter().all(|&w| w >= -tol::BARYCENTRIC);
        }
    }
    hull_l1_distance(cell, x) <= tol::BOUNDARY * scale
}

/// True if `x` lies on the boundary of the closed, full-dimensional cell.
pub fn on_boundary(cell: &[&[f64]], x: &[f64]) -> Result<bool, GeometryError> {
    if !contains_point(cell, x) {
        return Ok(false);
    }
    if is_simplex(cell) {
        if let Some(l) = barycentric(cell, x) {
            return Ok(l.iter().any(|&w| w <= tol::BARYCENTRIC));
        }
    }
    let scale = diameter(cell).max(1.0);
    let fs = facets(cell)?;
    Ok(fs.iter().any(|f| f.slack(x) <= tol::BOUNDARY * scale))
}

/// Volume of a full-dimensional polytope: fan from its first vertex over
/// a triangulation. Used for conservation checks.
pub fn hull_volume(points: &[&[f64]]) -> Result<f64, GeometryError> {
    let simplices = super::delaunay::delaunay_raw(points)?;
    Ok(simplices
        .iter()
        .map(|s| {
            let pts: Vec<&[f64]> = s.iter().map(|&i| points[i]).collect();
            super::linalg::simplex_volume(&pts)
        })
        .sum())
}
