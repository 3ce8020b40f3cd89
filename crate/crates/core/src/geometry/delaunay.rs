//! Delaunay triangulation in any dimension via the paraboloid lifting.
//!
//! Points are lifted to `(x, |x|²)`; every `(d+1)`-subset whose lifted
//! hyperplane has no point strictly below it spans a lower facet of the
//! lifted hull. Points on the same lifted hyperplane (cospherical within
//! tolerance) form one Delaunay cell; such degenerate cells are split by a
//! pulling triangulation that cones the lowest-index vertex over the
//! recursively triangulated facets avoiding it. Because the pulling order is
//! the input order, two triangulations that share a face split it the same
//! way when their inputs are ordered consistently.

use super::combinations::Combinations;
use super::hull::{contains_point, facets};
use super::linalg::{affine_basis, affine_dim, diameter, is_degenerate_simplex, project, solve};
use super::point::Point;
use super::GeometryError;
use crate::tol;

/// Triangulates `points` (each a slice of length d). Simplices are sorted
/// index lists into `points`; the list itself is sorted.
pub fn delaunay_raw(points: &[&[f64]]) -> Result<Vec<Vec<usize>>, GeometryError> {
    let d = points.first().map_or(0, |p| p.len());
    if d == 0 || points.len() < d + 1 || affine_dim(points) < d {
        return Err(GeometryError::DegeneratePointSet);
    }
    let m = points.len();
    let scale = diameter(points);
    let centroid: Vec<f64> = (0..d).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / m as f64).collect();
    let y: Vec<Vec<f64>> =
        points.iter().map(|p| p.iter().zip(&centroid).map(|(a, c)| (a - c) / scale).collect()).collect();
    let h: Vec<f64> = y.iter().map(|v| v.iter().map(|x| x * x).sum()).collect();

    let mut cells: Vec<Vec<usize>> = Vec::new();
    for subset in Combinations::new(m, d + 1) {
        if cells.iter().any(|c| subset.iter().all(|i| c.binary_search(i).is_ok())) {
            continue;
        }
        let pts: Vec<&[f64]> = subset.iter().map(|&i| y[i].as_slice()).collect();
        if is_degenerate_simplex(&pts) {
            continue;
        }
        // lifted hyperplane h = a·y + b through the subset
        let rows: Vec<Vec<f64>> = subset
            .iter()
            .map(|&i| {
                let mut r = y[i].clone();
                r.push(1.0);
                r
            })
            .collect();
        let rhs: Vec<f64> = subset.iter().map(|&i| h[i]).collect();
        let Some(plane) = solve(&rows, &rhs) else { continue };
        let height = |i: usize| h[i] - (y[i].iter().zip(&plane).map(|(a, b)| a * b).sum::<f64>() + plane[d]);
        if (0..m).any(|i| height(i) < -tol::COSPHERICAL) {
            continue;
        }
        // the subset spans the plane even when rounding lifts one of its points off it
        let members: Vec<usize> =
            (0..m).filter(|&i| subset.contains(&i) || height(i).abs() <= tol::COSPHERICAL).collect();
        cells.push(members);
    }

    let mut simplices = Vec::new();
    for cell in cells {
        if cell.len() == d + 1 {
            simplices.push(cell);
        } else {
            let pts: Vec<Vec<f64>> = cell.iter().map(|&i| y[i].clone()).collect();
            simplices.extend(pulling_triangulation(pts, cell)?);
        }
    }
    for s in simplices.iter_mut() {
        s.sort_unstable();
    }
    simplices.sort();
    simplices.dedup();
    Ok(simplices)
}

/// Pulling triangulation of points in convex position; `pts[i]` carries
/// the label `ids[i]` and `ids` is ascending.
fn pulling_triangulation(pts: Vec<Vec<f64>>, ids: Vec<usize>) -> Result<Vec<Vec<usize>>, GeometryError> {
    let k = pts[0].len();
    if ids.len() == k + 1 {
        return Ok(vec![ids]);
    }
    let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
    let apex = 0;
    let mut out = Vec::new();
    for facet in facets(&refs)? {
        if facet.members.contains(&apex) {
            continue;
        }
        let fpts: Vec<&[f64]> = facet.members.iter().map(|&i| refs[i]).collect();
        let basis = affine_basis(&fpts);
        if basis.len() + 1 != k {
            return Err(GeometryError::DegeneratePointSet);
        }
        let local = project(&fpts, fpts[0], &basis);
        let fids: Vec<usize> = facet.members.iter().map(|&i| ids[i]).collect();
        for mut s in pulling_triangulation(local, fids)? {
            s.insert(0, ids[apex]);
            out.push(s);
        }
    }
    Ok(out)
}

/// Delaunay triangulation of full-dimensional `points`.
pub fn delaunay(points: &[Point]) -> Result<Vec<Vec<usize>>, GeometryError> {
    let refs: Vec<&[f64]> = points.iter().map(|p| p.coords()).collect();
    delaunay_raw(&refs)
}

/// `DT(cell ∪ new)`. Indices refer to the concatenation `cell ++ new`; a
/// new point coinciding with an existing one is ignored.
pub fn triangulate_cell_with_new_vertices(cell: &[Point], new: &[Point]) -> Result<Vec<Vec<usize>>, GeometryError> {
    let cell_refs: Vec<&[f64]> = cell.iter().map(|p| p.coords()).collect();
    let mut combined: Vec<&[f64]> = cell_refs.clone();
    let mut labels: Vec<usize> = (0..cell.len()).collect();
    for (k, p) in new.iter().enumerate() {
        if !contains_point(&cell_refs, p) {
            return Err(GeometryError::VertexOutsideCell(k));
        }
        if combined.iter().any(|q| p.distance(q) <= tol::DEDUP) {
            continue;
        }
        combined.push(p.coords());
        labels.push(cell.len() + k);
    }
    let simplices = delaunay_raw(&combined)?;
    Ok(simplices.into_iter().map(|s| s.into_iter().map(|i| labels[i]).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::linalg::simplex_volume;

    fn pts(raw: &[[f64; 2]]) -> Vec<Point> {
        raw.iter().map(|p| Point::from(*p)).collect()
    }

    fn total_volume(points: &[Point], simplices: &[Vec<usize>]) -> f64 {
        simplices
            .iter()
            .map(|s| {
                let v: Vec<&[f64]> = s.iter().map(|&i| points[i].coords()).collect();
                simplex_volume(&v)
            })
            .sum()
    }

    #[test]
    fn simplex_triangulates_itself() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(delaunay(&p).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn interior_point_is_used_by_every_triangle() {
        let p = pts(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [0.5, 0.5]]);
        let t = delaunay(&p).unwrap();
        assert_eq!(t, vec![vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]);
    }

    #[test]
    fn cocircular_square_splits_along_lowest_vertex_diagonal() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let t = delaunay(&p).unwrap();
        assert_eq!(t, vec![vec![0, 1, 2], vec![0, 2, 3]]);
        // reordering so that (1,0) comes first flips the diagonal
        let q = pts(&[[1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(delaunay(&q).unwrap(), vec![vec![0, 1, 2], vec![0, 2, 3]]);
    }

    #[test]
    fn cube_with_center_degenerate_facets() {
        let mut raw = vec![[0.0, 0.0, 0.0]];
        for i in 0..8u32 {
            raw.push([(i & 1) as f64 * 2.0 - 1.0, ((i >> 1) & 1) as f64 * 2.0 - 1.0, ((i >> 2) & 1) as f64 * 2.0 - 1.0]);
        }
        let p: Vec<Point> = raw.iter().map(|c| Point::from(*c)).collect();
        let t = delaunay(&p).unwrap();
        // six pyramids over square faces, two tetrahedra each
        assert_eq!(t.len(), 12);
        assert!(t.iter().all(|s| s.contains(&0)));
        assert!((total_volume(&p, &t) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_input_rejected() {
        let p = pts(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        assert_eq!(delaunay(&p), Err(GeometryError::DegeneratePointSet));
    }

    #[test]
    fn triangle_plus_edge_midpoint() {
        let cell = pts(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]);
        let t = triangulate_cell_with_new_vertices(&cell, &pts(&[[1.0, 1.0]])).unwrap();
        assert_eq!(t, vec![vec![0, 1, 3], vec![0, 2, 3]]);
    }

    #[test]
    fn quadrilateral_plus_midpoint_covers_quad() {
        let cell = pts(&[[0.0, 0.0], [3.0, 0.0], [3.0, 1.0], [0.0, 1.0]]);
        let new = pts(&[[1.5, 0.0]]);
        let t = triangulate_cell_with_new_vertices(&cell, &new).unwrap();
        let mut all = cell.clone();
        all.extend(new);
        assert!((total_volume(&all, &t) - 3.0).abs() < 1e-12);
        assert!(t.iter().any(|s| s.contains(&4)));
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn simplex_without_new_vertices_unchanged() {
        let cell = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(triangulate_cell_with_new_vertices(&cell, &[]).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn outside_vertex_rejected() {
        let cell = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let err = triangulate_cell_with_new_vertices(&cell, &pts(&[[1.0, 1.0]])).unwrap_err();
        assert_eq!(err, GeometryError::VertexOutsideCell(0));
    }
}
