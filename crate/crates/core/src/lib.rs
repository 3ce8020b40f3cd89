//! Automated search for continuous piecewise-affine Lyapunov functions of
//! continuous-time piecewise-affine systems.
//!
//! The search solves a slack-relaxed linear program over the vertices of
//! the partition ([`lyapunov`]), and while some slack stays positive it
//! refines the partition ([`refinement`]) and solves again ([`engine`]).

pub mod benchmarks;
pub mod engine;
pub mod geometry;
pub mod io;
pub mod lp;
pub mod lyapunov;
pub mod model;
pub mod refinement;

pub use engine::{analyze, AnalysisResult, AnalysisStatus, IterationRecord};
pub use geometry::{Point, VertexId};
pub use lyapunov::{LyapunovCandidate, SearchConfig};
pub use model::{AffineLaw, Cell, CellId, Partition};
pub use refinement::Strategy;

/// Numerical tolerances shared across modules.
pub mod tol {
    /// Euclidean distance under which two points are the same vertex.
    pub const DEDUP: f64 = 1e-8;
    /// Scale-free volume / rank threshold for affine independence.
    pub const DEGENERACY: f64 = 1e-10;
    /// Residual allowed between the laws of two cells at a shared vertex.
    pub const CONTINUITY: f64 = 1e-6;
    /// Relative distance tolerance for point-in-cell and on-boundary tests.
    pub const BOUNDARY: f64 = 1e-8;
    /// Barycentric-coordinate slack for simplex membership.
    pub const BARYCENTRIC: f64 = 1e-9;
    /// Relative distance of a point to a supporting hyperplane.
    pub const PLANE: f64 = 1e-9;
    /// Distance, relative to the cell diameter, under which a proposed vertex
    /// merges into an existing or already proposed one.
    pub const MERGE: f64 = 1e-4;
    /// Lifted-height tolerance (unit-diameter coordinates) for cospherical points.
    pub const COSPHERICAL: f64 = 1e-12;
    /// Weight the adjacency program may put off the candidate edge.
    pub const ADJACENCY: f64 = 1e-9;
    /// Default threshold under which a slack counts as zero.
    pub const ZERO: f64 = 1e-8;
}
