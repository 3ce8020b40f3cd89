//! Level sets of a planar PWA `V` by per-cell clipping, and vector-field
//! samples for quiver plots.

use std::collections::HashMap;
use std::fmt::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::IoError;
use crate::engine::random_interior_point;
use crate::geometry::{edges_of_cell, VertexId};
use crate::lyapunov::LyapunovCandidate;
use crate::model::{CellId, Partition};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSegment {
    pub level: f64,
    pub cell: CellId,
    pub from: [f64; 2],
    pub to: [f64; 2],
}

/// `V` at every vertex, taken from the lowest-id cell that has it so that
/// neighbouring cells clip shared edges at identical points.
fn vertex_values(p: &Partition, cand: &LyapunovCandidate) -> HashMap<VertexId, f64> {
    let mut out = HashMap::new();
    for c in p.cells() {
        for &v in &c.vertices {
            out.entry(v).or_insert_with(|| cand.value(c.id, p.vertex(v)).unwrap_or(f64::NAN));
        }
    }
    out
}

/// Segments of `{x : V(x) = c}` for each level `c`.
pub fn level_segments(p: &Partition, cand: &LyapunovCandidate, levels: &[f64]) -> Result<Vec<LevelSegment>, IoError> {
    if p.dim() != 2 {
        return Err(IoError::DimensionUnsupported(p.dim()));
    }
    let values = vertex_values(p, cand);
    let mut out = Vec::new();
    for &level in levels {
        for c in p.cells() {
            let pts = p.cell_points(c);
            let Ok(edges) = edges_of_cell(&pts, false) else { continue };
            let s: Vec<f64> = c.vertices.iter().map(|v| values[v] - level).collect();
            if s.iter().all(|&x| x == 0.0) {
                continue;
            }
            let flat: Vec<(usize, usize)> = edges.iter().copied().filter(|&(j, k)| s[j] == 0.0 && s[k] == 0.0).collect();
            if !flat.is_empty() {
                for (j, k) in flat {
                    out.push(LevelSegment { level, cell: c.id, from: [pts[j][0], pts[j][1]], to: [pts[k][0], pts[k][1]] });
                }
                continue;
            }
            let mut hits: Vec<[f64; 2]> = Vec::new();
            let mut push = |x: [f64; 2]| {
                if !hits.iter().any(|h| (h[0] - x[0]).abs() <= 1e-12 && (h[1] - x[1]).abs() <= 1e-12) {
                    hits.push(x);
                }
            };
            for &(j, k) in &edges {
                if s[j] == 0.0 {
                    push([pts[j][0], pts[j][1]]);
                }
                if s[k] == 0.0 {
                    push([pts[k][0], pts[k][1]]);
                }
                if s[j] * s[k] < 0.0 {
                    // orient by vertex id so both cells sharing the edge agree
                    let (a, b) = if c.vertices[j] < c.vertices[k] { (j, k) } else { (k, j) };
                    let t = s[a] / (s[a] - s[b]);
                    push([pts[a][0] + t * (pts[b][0] - pts[a][0]), pts[a][1] + t * (pts[b][1] - pts[a][1])]);
                }
            }
            if hits.len() == 2 {
                out.push(LevelSegment { level, cell: c.id, from: hits[0], to: hits[1] });
            }
        }
    }
    Ok(out)
}

pub fn levels_csv(segments: &[LevelSegment]) -> String {
    let mut s = String::from("level,cell,x0,y0,x1,y1\n");
    for g in segments {
        writeln!(s, "{},{},{},{},{},{}", g.level, g.cell.0, g.from[0], g.from[1], g.to[0], g.to[1]).unwrap();
    }
    s
}

/// `(cell, x, ẋ)` at `per_cell` random points of every cell.
pub fn vector_field_samples(p: &Partition, per_cell: usize, seed: u64) -> Vec<(CellId, Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_cell * p.num_cells());
    for c in p.cells() {
        let pts = p.cell_points(c);
        for _ in 0..per_cell {
            let x = random_interior_point(&mut rng, &pts).into_vec();
            let f = c.law.apply(&x);
            out.push((c.id, x, f));
        }
    }
    out
}

pub fn vector_field_csv(p: &Partition, per_cell: usize, seed: u64) -> Result<String, IoError> {
    if p.dim() != 2 {
        return Err(IoError::DimensionUnsupported(p.dim()));
    }
    let mut s = String::from("cell,x,y,dx,dy\n");
    for (c, x, f) in vector_field_samples(p, per_cell, seed) {
        writeln!(s, "{},{},{},{},{}", c.0, x[0], x[1], f[0], f[1]).unwrap();
    }
    Ok(s)
}
