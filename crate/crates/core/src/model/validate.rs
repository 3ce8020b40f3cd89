use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::simulate::CellLocator;
use super::{CellId, Partition};
use crate::geometry::linalg::{affine_dim, diameter};
use crate::geometry::{self, dot, facets, Facet, Point, VertexId};
use crate::lp::{DenseSimplex, LinearProgram, LpSolver, LpStatus, Relation};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyPartition,
    DegenerateCell,
    /// A listed vertex is not an extreme point of its cell.
    RedundantVertex,
    InteriorOverlap,
    /// A vertex of one cell lies in another cell without being its vertex.
    SharedVertexClosure,
    DynamicsDiscontinuity,
    /// The origin lies in a cell without being one of its vertices.
    OriginNotVertex,
    OriginOutsideDomain,
    /// Warning only: an origin-adjacent cell has a nonzero affine term.
    AffineTermAtOrigin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub cells: Vec<CellId>,
    pub vertices: Vec<VertexId>,
    pub residual: f64,
    pub message: String,
}

/// Checks every partition invariant; an empty list means the partition is
/// well formed.
pub fn validate_partition(p: &Partition) -> Vec<Violation> {
    let mut out = Vec::new();
    if p.cells().is_empty() {
        out.push(Violation {
            kind: ViolationKind::EmptyPartition,
            cells: vec![],
            vertices: vec![],
            residual: 0.0,
            message: "partition has no cells".into(),
        });
        return out;
    }

    let hreps: Vec<Option<Vec<Facet>>> = p.cells().iter().map(|c| check_cell(p, c.id, &mut out)).collect();
    let locator = CellLocator::new(p);
    check_overlaps(p, &hreps, &mut out);
    check_closure(p, &locator, &mut out);
    if !p.metadata.discontinuous_dynamics {
        check_continuity(p, &mut out);
    }
    check_origin(p, &locator, &mut out);
    out
}

/// Shape checks on one cell; returns its facets when it is solid.
fn check_cell(p: &Partition, id: CellId, out: &mut Vec<Violation>) -> Option<Vec<Facet>> {
    let cell = p.cell(id).unwrap();
    let coords = p.cell_coords(cell);
    let d = p.dim();
    if coords.len() < d + 1 || affine_dim(&coords) < d {
        out.push(Violation {
            kind: ViolationKind::DegenerateCell,
            cells: vec![id],
            vertices: cell.vertices.clone(),
            residual: 0.0,
            message: format!("cell {id} does not span R^{d}"),
        });
        return None;
    }
    let fs = match facets(&coords) {
        Ok(fs) => fs,
        Err(e) => {
            out.push(Violation {
                kind: ViolationKind::DegenerateCell,
                cells: vec![id],
                vertices: cell.vertices.clone(),
                residual: 0.0,
                message: format!("cell {id}: {e}"),
            });
            return None;
        }
    };
    if coords.len() > d + 1 {
        for (k, &v) in cell.vertices.iter().enumerate() {
            let others: Vec<&[f64]> = coords.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, c)| *c).collect();
            if geometry::contains_point(&others, coords[k]) {
                out.push(Violation {
                    kind: ViolationKind::RedundantVertex,
                    cells: vec![id],
                    vertices: vec![v],
                    residual: 0.0,
                    message: format!("vertex {v} of cell {id} is not an extreme point"),
                });
            }
        }
    }
    Some(fs)
}

fn separated_by(fs: &[Facet], pts: &[&[f64]], slack: f64) -> bool {
    fs.iter().any(|f| pts.iter().all(|x| f.slack(x) <= slack))
}

/// Largest ball-like margin `t` with `n_f·x + t <= b_f` for all facets of
/// both cells; positive iff the interiors intersect.
fn common_interior_margin(a: &[Facet], b: &[Facet], d: usize, cap: f64) -> f64 {
    let mut lp = LinearProgram::new();
    let x: Vec<usize> = (0..d).map(|_| lp.add_var(None)).collect();
    let t = lp.add_var(None);
    for f in a.iter().chain(b) {
        let mut form: Vec<(usize, f64)> = x.iter().zip(&f.normal).map(|(&v, &c)| (v, c)).collect();
        form.push((t, 1.0));
        lp.add_constraint(form, Relation::Le, f.offset);
    }
    lp.add_constraint(vec![(t, 1.0)], Relation::Le, cap);
    lp.set_objective(vec![(t, -1.0)]);
    match DenseSimplex::default().solve(&lp, Duration::from_secs(60)) {
        // measured at the returned point, so solver round-off cannot fake an overlap
        Ok(sol) if sol.status == LpStatus::Optimal => {
            let x = &sol.values[..d];
            a.iter().chain(b).map(|f| f.offset - dot(&f.normal, x)).fold(cap, f64::min)
        }
        _ => f64::NEG_INFINITY,
    }
}

fn check_overlaps(p: &Partition, hreps: &[Option<Vec<Facet>>], out: &mut Vec<Violation>) {
    let cells = p.cells();
    let boxes: Vec<_> = cells.iter().map(|c| p.bounding_box(c)).collect();
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&i, &j| boxes[i].min[0].total_cmp(&boxes[j].min[0]));
    for (oi, &i) in order.iter().enumerate() {
        let Some(fi) = &hreps[i] else { continue };
        let ci = p.cell_coords(&cells[i]);
        let scale = diameter(&ci).max(1.0);
        for &j in &order[oi + 1..] {
            if boxes[j].min[0] >= boxes[i].max[0] {
                break;
            }
            let Some(fj) = &hreps[j] else { continue };
            if !boxes[i].overlaps(&boxes[j], tol::BOUNDARY * scale) {
                continue;
            }
            let cj = p.cell_coords(&cells[j]);
            let slack = tol::BOUNDARY * scale;
            if separated_by(fi, &cj, slack) || separated_by(fj, &ci, slack) {
                continue;
            }
            let margin = common_interior_margin(fi, fj, p.dim(), scale);
            if margin > slack {
                let (a, b) = (cells[i].id.min(cells[j].id), cells[i].id.max(cells[j].id));
                out.push(Violation {
                    kind: ViolationKind::InteriorOverlap,
                    cells: vec![a, b],
                    vertices: vec![],
                    residual: margin,
                    message: format!("cells {a} and {b} overlap (inscribed margin {margin:e})"),
                });
            }
        }
    }
}

fn check_closure(p: &Partition, loc: &CellLocator, out: &mut Vec<Violation>) {
    let incidence = p.vertex_cells();
    let mut used: Vec<VertexId> = incidence.keys().copied().collect();
    used.sort_unstable();
    for v in used {
        let x = p.vertex(v);
        for &i in loc.candidates(x) {
            let cell = &p.cells()[i];
            if cell.has_vertex(v) {
                continue;
            }
            if geometry::contains_point(&p.cell_coords(cell), x) {
                let owner = incidence[&v][0];
                out.push(Violation {
                    kind: ViolationKind::SharedVertexClosure,
                    cells: vec![owner, cell.id],
                    vertices: vec![v],
                    residual: 0.0,
                    message: format!("vertex {v} of cell {owner} lies in cell {} but is not one of its vertices", cell.id),
                });
            }
        }
    }
}

fn check_continuity(p: &Partition, out: &mut Vec<Violation>) {
    let incidence = p.vertex_cells();
    let mut shared: Vec<(&VertexId, &Vec<CellId>)> = incidence.iter().filter(|(_, c)| c.len() > 1).collect();
    shared.sort_unstable_by_key(|(v, _)| **v);
    for (&v, ids) in shared {
        let x = p.vertex(v);
        let first = p.cell(ids[0]).unwrap();
        let f0 = first.law.apply(x);
        for &other in &ids[1..] {
            let f = p.cell(other).unwrap().law.apply(x);
            let r = geometry::distance(&f0, &f);
            if r > tol::CONTINUITY {
                out.push(Violation {
                    kind: ViolationKind::DynamicsDiscontinuity,
                    cells: vec![first.id, other],
                    vertices: vec![v],
                    residual: r,
                    message: format!("laws of cells {} and {other} differ by {r:e} at vertex {v}", first.id),
                });
            }
        }
    }
}

fn check_origin(p: &Partition, loc: &CellLocator, out: &mut Vec<Violation>) {
    let origin = Point::origin(p.dim());
    let containing: Vec<usize> =
        loc.candidates(&origin).iter().copied().filter(|&i| geometry::contains_point(&p.cell_coords(&p.cells()[i]), &origin)).collect();
    if containing.is_empty() {
        out.push(Violation {
            kind: ViolationKind::OriginOutsideDomain,
            cells: vec![],
            vertices: vec![],
            residual: 0.0,
            message: "the origin is not in the domain".into(),
        });
    }
    for i in containing {
        let c = &p.cells()[i];
        if !c.contains_origin {
            out.push(Violation {
                kind: ViolationKind::OriginNotVertex,
                cells: vec![c.id],
                vertices: vec![],
                residual: 0.0,
                message: format!("cell {} contains the origin but not as a vertex (run ensure-origin)", c.id),
            });
        }
    }
}
