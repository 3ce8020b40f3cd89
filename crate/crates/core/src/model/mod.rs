//! Partitioned piecewise-affine dynamics `ẋ = A_i x + a_i` on polytopic cells.

mod origin;
mod simulate;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, BoundingBox, GeometryError, Point, VertexId, VertexStore};

pub use origin::{ensure_origin_vertex, origin_affine_warnings};
pub use simulate::{simulate_trajectory, simulate_with, CellLocator, Trajectory};
pub use validate::{validate_partition, Violation, ViolationKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("duplicate cell id {0}")]
    DuplicateCellId(CellId),
    #[error("unknown cell id {0}")]
    UnknownCell(CellId),
    #[error("sampling time must be positive, got {0}")]
    NonpositiveSamplingTime(f64),
    #[error("time step must be positive, got {0}")]
    NonpositiveStep(f64),
    #[error("the origin is not inside the partition domain")]
    OriginOutsideDomain,
    #[error("initial state lies outside the partition domain")]
    StartOutsideDomain,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `x ↦ A x + a` with `A` stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineLaw {
    dim: usize,
    matrix: Vec<f64>,
    offset: Vec<f64>,
}

impl AffineLaw {
    pub fn new(rows: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self, ModelError> {
        let dim = offset.len();
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(ModelError::DimensionMismatch(format!("matrix must be {dim}×{dim} to match offset")));
        }
        let matrix: Vec<f64> = rows.into_iter().flatten().collect();
        if matrix.iter().chain(&offset).any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("affine law"));
        }
        Ok(AffineLaw { dim, matrix, offset })
    }

    pub fn linear(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = rows.len();
        Self::new(rows, vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.matrix[r * self.dim + c]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// `A x` without the affine term.
    pub fn apply_linear(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.chunks(self.dim).map(|row| geometry::dot(row, x)).collect()
    }

    /// `A x + a`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.apply_linear(x);
        y.iter_mut().zip(&self.offset).for_each(|(v, a)| *v += a);
        y
    }
}

/// Inverts the forward-Euler discretization: returns `((A - I)/t_s, a/t_s)`,
/// the continuous law whose Euler step of length `t_s` is the given map.
pub fn discrete_to_continuous(law: &AffineLaw, sampling_time: f64) -> Result<AffineLaw, ModelError> {
    if !(sampling_time > 0.0) || !sampling_time.is_finite() {
        return Err(ModelError::NonpositiveSamplingTime(sampling_time));
    }
    let n = law.dim;
    let mut matrix = law.matrix.clone();
    for r in 0..n {
        matrix[r * n + r] -= 1.0;
    }
    matrix.iter_mut().for_each(|v| *v /= sampling_time);
    let offset = law.offset.iter().map(|v| v / sampling_time).collect();
    Ok(AffineLaw { dim: n, matrix, offset })
}

/// Applies [`discrete_to_continuous`] to every cell, keeping vertices and
/// cell ids, and records the conversion in the metadata.
pub fn partition_to_continuous(p: &Partition, sampling_time: f64) -> Result<Partition, ModelError> {
    let mut q = p.clone();
    for c in q.cells.iter_mut() {
        c.law = discrete_to_continuous(&c.law, sampling_time)?;
    }
    q.metadata.discrete_time = false;
    q.metadata.sampling_time = Some(sampling_time);
    q.metadata.notes.push(format!("converted from discrete time: A_c = (A_d - I)/{sampling_time}, a_c = a_d/{sampling_time}"));
    Ok(q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub usize);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

/// A bounded polytopic cell `conv(vertices)` with its affine law.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub id: CellId,
    /// Sorted ascending.
    pub vertices: Vec<VertexId>,
    pub law: AffineLaw,
    /// The origin is one of the vertices (the cell belongs to I_0).
    pub contains_origin: bool,
}

impl Cell {
    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// Vector field of the cell's law at `v`.
pub fn eval_dynamics(cell: &Cell, v: &[f64]) -> Point {
    Point::new(cell.law.apply(v))
}

/// Free-form provenance carried through files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Sampling time of a discrete-time law, in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_time: Option<f64>,
    /// Laws are discrete-time maps `x⁺ = A x + a` rather than vector fields.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub discrete_time: bool,
    /// The laws are allowed to disagree across cell boundaries (switched
    /// systems). Dynamics continuity is then not validated.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub discontinuous_dynamics: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A partition of a bounded domain into cells over a shared vertex store.
#[derive(Clone, Debug)]
pub struct Partition {
    dim: usize,
    vertices: VertexStore,
    cells: Vec<Cell>,
    next_id: usize,
    pub metadata: Metadata,
}

impl Partition {
    pub fn new(dim: usize) -> Self {
        Partition { dim, vertices: VertexStore::new(dim), cells: Vec::new(), next_id: 0, metadata: Metadata::default() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &VertexStore {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> &Point {
        self.vertices.get(id)
    }

    /// Cells in ascending id order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, id: CellId) -> Option<&Cell> {
        self.cells.binary_search_by_key(&id, |c| c.id).ok().map(|i| &self.cells[i])
    }

    pub fn add_vertex(&mut self, p: Point) -> Result<VertexId, ModelError> {
        if p.dim() != self.dim {
            return Err(ModelError::DimensionMismatch(format!("vertex has dimension {}, expected {}", p.dim(), self.dim)));
        }
        Ok(self.vertices.insert(p))
    }

    pub fn add_cell(&mut self, vertices: Vec<VertexId>, law: AffineLaw) -> Result<CellId, ModelError> {
        let id = CellId(self.next_id);
        self.add_cell_with_id(id, vertices, law)?;
        Ok(id)
    }

    /// Adds a cell under a caller-chosen id; ids must be unique. Cells stay
    /// sorted by id.
    pub fn add_cell_with_id(&mut self, id: CellId, mut vertices: Vec<VertexId>, law: AffineLaw) -> Result<(), ModelError> {
        if law.dim() != self.dim {
            return Err(ModelError::DimensionMismatch(format!("law has dimension {}, expected {}", law.dim(), self.dim)));
        }
        if let Some(&v) = vertices.iter().find(|v| v.0 >= self.vertices.len()) {
            return Err(ModelError::UnknownVertex(v));
        }
        vertices.sort_unstable();
        vertices.dedup();
        let contains_origin = vertices.iter().any(|&v| self.vertices.get(v).is_origin());
        let cell = Cell { id, vertices, law, contains_origin };
        match self.cells.binary_search_by_key(&id, |c| c.id) {
            Ok(_) => return Err(ModelError::DuplicateCellId(id)),
            Err(pos) => self.cells.insert(pos, cell),
        }
        self.next_id = self.next_id.max(id.0 + 1);
        Ok(())
    }

    pub fn cell_points(&self, cell: &Cell) -> Vec<Point> {
        cell.vertices.iter().map(|&v| self.vertices.get(v).clone()).collect()
    }

    pub fn cell_coords(&self, cell: &Cell) -> Vec<&[f64]> {
        cell.vertices.iter().map(|&v| self.vertices.get(v).coords()).collect()
    }

    pub fn bounding_box(&self, cell: &Cell) -> BoundingBox {
        BoundingBox::of(&self.cell_coords(cell))
    }

    /// For each vertex, the ids of cells that have it as a vertex.
    pub fn vertex_cells(&self) -> HashMap<VertexId, Vec<CellId>> {
        let mut map: HashMap<VertexId, Vec<CellId>> = HashMap::new();
        for c in &self.cells {
            for &v in &c.vertices {
                map.entry(v).or_default().push(c.id);
            }
        }
        map
    }

    pub fn cell_volume(&self, cell: &Cell) -> Result<f64, GeometryError> {
        geometry::hull::hull_volume(&self.cell_coords(cell))
    }

    /// Total volume of the domain (sum of cell volumes).
    pub fn volume(&self) -> Result<f64, GeometryError> {
        self.cells.iter().map(|c| self.cell_volume(c)).sum()
    }

    /// Replaces each listed cell by `DT(F_0(cell) ∪ extra)`, every sub-cell
    /// inheriting the parent's law. Vertices are ordered by id before
    /// triangulating so that shared faces split identically in neighbouring
    /// cells. Returns the ids of the created cells.
    pub fn retriangulate(&mut self, extra: &BTreeMap<CellId, Vec<VertexId>>) -> Result<Vec<CellId>, ModelError> {
        let mut created_specs = Vec::new();
        for (&cid, new_ids) in extra {
            let cell = self.cell(cid).ok_or(ModelError::UnknownCell(cid))?;
            let parent: Vec<&[f64]> = self.cell_coords(cell);
            for (k, &v) in new_ids.iter().enumerate() {
                if !cell.has_vertex(v) && !geometry::contains_point(&parent, self.vertices.get(v)) {
                    return Err(GeometryError::VertexOutsideCell(k).into());
                }
            }
            let mut ids: Vec<VertexId> = cell.vertices.iter().chain(new_ids).copied().collect();
            ids.sort_unstable();
            ids.dedup();
            let coords: Vec<&[f64]> = ids.iter().map(|&v| self.vertices.get(v).coords()).collect();
            let simplices = geometry::delaunay::delaunay_raw(&coords)?;
            for s in simplices {
                created_specs.push((s.into_iter().map(|i| ids[i]).collect::<Vec<_>>(), cell.law.clone()));
            }
        }
        let removed: BTreeSet<CellId> = extra.keys().copied().collect();
        self.replace_cells(&removed, created_specs)
    }

    /// Drops the `removed` cells and appends new ones with fresh ids.
    pub fn replace_cells(&mut self, removed: &BTreeSet<CellId>, specs: Vec<(Vec<VertexId>, AffineLaw)>) -> Result<Vec<CellId>, ModelError> {
        self.cells.retain(|c| !removed.contains(&c.id));
        let mut created = Vec::with_capacity(specs.len());
        for (ids, law) in specs {
            created.push(self.add_cell(ids, law)?);
        }
        Ok(created)
    }
}
