use std::collections::BTreeMap;

use super::validate::{Violation, ViolationKind};
use super::{CellId, ModelError, Partition};
use crate::geometry::{self, Point};
use crate::tol;

/// Makes the origin a vertex of every cell that contains it, replacing each
/// such cell by `DT(F_0(X_i) ∪ {0})`.
pub fn ensure_origin_vertex(p: &Partition) -> Result<Partition, ModelError> {
    let origin = Point::origin(p.dim());
    let containing: Vec<CellId> =
        p.cells().iter().filter(|c| geometry::contains_point(&p.cell_coords(c), &origin)).map(|c| c.id).collect();
    if containing.is_empty() {
        return Err(ModelError::OriginOutsideDomain);
    }
    let affected: Vec<CellId> = containing.into_iter().filter(|&id| !p.cell(id).unwrap().contains_origin).collect();
    if affected.is_empty() {
        return Ok(p.clone());
    }
    let mut out = p.clone();
    let o = out.add_vertex(origin)?;
    let plan: BTreeMap<CellId, Vec<_>> = affected.into_iter().map(|id| (id, vec![o])).collect();
    out.retriangulate(&plan)?;
    Ok(out)
}

/// Cells having the origin as a vertex but a nonzero affine term: the
/// origin is then not an equilibrium of that piece. Reported as warnings.
pub fn origin_affine_warnings(p: &Partition) -> Vec<Violation> {
    p.cells()
        .iter()
        .filter(|c| c.contains_origin)
        .filter_map(|c| {
            let r = geometry::norm(c.law.offset());
            (r > tol::CONTINUITY).then(|| Violation {
                kind: ViolationKind::AffineTermAtOrigin,
                cells: vec![c.id],
                vertices: vec![],
                residual: r,
                message: format!("cell {} touches the origin but has affine term of norm {r:e}", c.id),
            })
        })
        .collect()
}
