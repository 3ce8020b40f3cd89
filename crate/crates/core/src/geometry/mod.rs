//! Polytope computations on vertex-represented cells.

mod combinations;
pub mod delaunay;
pub mod edges;
pub mod hull;
pub mod linalg;
mod point;

use thiserror::Error;

pub use combinations::Combinations;
pub use delaunay::{delaunay, triangulate_cell_with_new_vertices};
pub use edges::{argmax_edge, cell_edges, edges_of_cell, longest_edge, Edge};
pub use hull::{contains_point, facets, on_boundary, BoundingBox, Facet};
pub use point::{Point, VertexId, VertexStore};
pub(crate) use point::{distance, dot, norm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("cell vertices do not span a full-dimensional polytope")]
    DegenerateCell,
    #[error("point set is affinely dependent")]
    DegeneratePointSet,
    #[error("every edge of the cell touches the origin")]
    NoEligibleEdge,
    #[error("new vertex #{0} lies outside the cell")]
    VertexOutsideCell(usize),
}
