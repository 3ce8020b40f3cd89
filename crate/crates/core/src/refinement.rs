//! New-vertex strategies and sub-cell formation.
//!
//! A strategy proposes a buffer `B` of points on cell edges. Every cell
//! containing a buffered point joins the split set and receives that point
//! in `V_new(i)`; each split cell is then replaced by `DT(F_0(i) ∪ V_new(i))`.
//! Handing a point on a shared face to every cell that contains it keeps the
//! partition face-to-face, which the continuity rows of the LP rely on.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, argmax_edge, cell_edges, longest_edge, Edge, GeometryError, Point, VertexId};
use crate::lyapunov::{eval_vdot, slack_cells, LyapunovCandidate};
use crate::model::{CellId, CellLocator, ModelError, Partition};
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefinementError {
    #[error("no cell has positive slack")]
    NoSlackCells,
    #[error("weights must satisfy α + β = 1 with α, β in [0, 1], got α = {alpha}, β = {beta}")]
    BadWeights { alpha: f64, beta: f64 },
    #[error("cell {0} has no edge that avoids the origin")]
    NoEligibleEdge(CellId),
    #[error("buffered point #{0} is not on the boundary of any cell")]
    PointOffBoundary(usize),
    #[error("unknown strategy {0:?} (expected naive, lyapunov or vector-field)")]
    UnknownStrategy(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Naive,
    #[serde(rename = "lyapunov")]
    LyapunovBased,
    VectorField,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Naive, Strategy::LyapunovBased, Strategy::VectorField];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Naive => "naive",
            Strategy::LyapunovBased => "lyapunov",
            Strategy::VectorField => "vector-field",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = RefinementError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Strategy::Naive),
            "lyapunov" | "lyapunov-based" => Ok(Strategy::LyapunovBased),
            "vector-field" | "vector_field" => Ok(Strategy::VectorField),
            other => Err(RefinementError::UnknownStrategy(other.to_string())),
        }
    }
}

/// `B`, `I_split` and `V_new(i)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RefinementPlan {
    pub buffer: Vec<Point>,
    pub split_set: BTreeSet<CellId>,
    pub per_cell_new: BTreeMap<CellId, Vec<Point>>,
    /// Set when the strategy fell back to the naive rule.
    pub fallback: bool,
    pub warnings: Vec<String>,
}

impl RefinementPlan {
    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }
}

/// `α v_j + β v_k`.
pub fn new_vertex(vj: &Point, vk: &Point, alpha: f64, beta: f64) -> Result<Point, RefinementError> {
    let ok = |w: f64| (0.0..=1.0).contains(&w);
    if !ok(alpha) || !ok(beta) || (alpha + beta - 1.0).abs() > 1e-12 {
        return Err(RefinementError::BadWeights { alpha, beta });
    }
    Ok(Point::new(vj.iter().zip(vk.iter()).map(|(a, b)| alpha * a + beta * b).collect()))
}

/// `α` of the point where `V̇` vanishes on an edge with `V̇(v_j) = dj`,
/// `V̇(v_k) = dk` of opposite signs.
pub fn zero_crossing_weight(dj: f64, dk: f64) -> f64 {
    dk / (dk - dj)
}

/// Angle-bisector weight `α = 1 / (1 + |ẋ(v_j)| / |ẋ(v_k)|)`.
pub fn bisector_weight(fj: f64, fk: f64) -> f64 {
    1.0 / (1.0 + fj / fk)
}

fn cell_data(p: &Partition, id: CellId) -> (Vec<VertexId>, Vec<Point>) {
    let c = p.cell(id).expect("cell id from candidate is in partition");
    (c.vertices.clone(), p.cell_points(c))
}

fn point_of(ids: &[VertexId], pts: &[Point], v: VertexId) -> Point {
    pts[ids.iter().position(|&x| x == v).unwrap()].clone()
}

fn max_slack_cell(candidate: &LyapunovCandidate, zero_tolerance: f64) -> Result<CellId, RefinementError> {
    let mut best: Option<(CellId, f64)> = None;
    for pc in &candidate.pieces {
        if pc.tau > zero_tolerance && best.map_or(true, |(_, t)| pc.tau > t) {
            best = Some((pc.cell, pc.tau));
        }
    }
    best.map(|b| b.0).ok_or(RefinementError::NoSlackCells)
}

fn naive_point(p: &Partition, id: CellId) -> Result<Point, RefinementError> {
    let (ids, pts) = cell_data(p, id);
    let e = longest_edge(&ids, &pts).map_err(|e| match e {
        GeometryError::NoEligibleEdge => RefinementError::NoEligibleEdge(id),
        other => other.into(),
    })?;
    new_vertex(&point_of(&ids, &pts, e.a), &point_of(&ids, &pts, e.b), 0.5, 0.5)
}

/// Midpoint of the longest eligible edge of the max-slack cell.
pub fn propose_naive(p: &Partition, candidate: &LyapunovCandidate, zero_tolerance: f64) -> Result<RefinementPlan, RefinementError> {
    let id = max_slack_cell(candidate, zero_tolerance)?;
    assemble_plan(p, vec![naive_point(p, id)?])
}

/// Zero crossings of `V̇` on sign-changing edges of every slack cell, or the
/// midpoint of the edge with the largest `|ΔV̇|` when `V̇` keeps one sign.
pub fn propose_lyapunov_based(
    p: &Partition,
    candidate: &LyapunovCandidate,
    zero_tolerance: f64,
) -> Result<RefinementPlan, RefinementError> {
    let slack = slack_cells(candidate, zero_tolerance);
    if slack.is_empty() {
        return Err(RefinementError::NoSlackCells);
    }
    let mut buffer = Vec::new();
    for &id in &slack {
        let cell = p.cell(id).unwrap();
        let (ids, pts) = cell_data(p, id);
        let vdot: BTreeMap<VertexId, f64> = ids.iter().zip(&pts).map(|(&v, x)| (v, eval_vdot(candidate, cell, x))).collect();
        let edges = cell_edges(&ids, &pts, true)?;
        if edges.is_empty() {
            return Err(RefinementError::NoEligibleEdge(id));
        }
        let has_pos = vdot.values().any(|&d| d > 0.0);
        let has_neg = vdot.values().any(|&d| d < 0.0);
        let crossing: Vec<&Edge> = edges.iter().filter(|e| vdot[&e.a] * vdot[&e.b] < 0.0).collect();
        if has_pos && has_neg && !crossing.is_empty() {
            for e in crossing {
                let alpha = zero_crossing_weight(vdot[&e.a], vdot[&e.b]);
                buffer.push(new_vertex(&point_of(&ids, &pts, e.a), &point_of(&ids, &pts, e.b), alpha, 1.0 - alpha)?);
            }
        } else {
            let e = argmax_edge(&edges, |e| Some((vdot[&e.a] - vdot[&e.b]).abs())).expect("edges nonempty");
            buffer.push(new_vertex(&point_of(&ids, &pts, e.a), &point_of(&ids, &pts, e.b), 0.5, 0.5)?);
        }
    }
    finish(p, candidate, zero_tolerance, buffer, Vec::new())
}

/// Angle-bisecting point on the edge whose endpoint vector fields have the
/// smallest cosine, for every slack cell.
pub fn propose_vector_field(p: &Partition, candidate: &LyapunovCandidate, zero_tolerance: f64) -> Result<RefinementPlan, RefinementError> {
    let slack = slack_cells(candidate, zero_tolerance);
    if slack.is_empty() {
        return Err(RefinementError::NoSlackCells);
    }
    let mut buffer = Vec::new();
    let mut warnings = Vec::new();
    for &id in &slack {
        let cell = p.cell(id).unwrap();
        let (ids, pts) = cell_data(p, id);
        let field: BTreeMap<VertexId, Vec<f64>> = ids.iter().zip(&pts).map(|(&v, x)| (v, cell.law.apply(x))).collect();
        let edges = cell_edges(&ids, &pts, true)?;
        if edges.is_empty() {
            return Err(RefinementError::NoEligibleEdge(id));
        }
        let norm = |v: VertexId| geometry::norm(&field[&v]);
        let best = argmax_edge(&edges, |e| {
            let (nj, nk) = (norm(e.a), norm(e.b));
            if nj == 0.0 || nk == 0.0 {
                return None;
            }
            Some(-geometry::dot(&field[&e.a], &field[&e.b]) / (nj * nk))
        });
        match best {
            Some(e) => {
                let alpha = bisector_weight(norm(e.a), norm(e.b));
                buffer.push(new_vertex(&point_of(&ids, &pts, e.a), &point_of(&ids, &pts, e.b), alpha, 1.0 - alpha)?);
            }
            None => {
                warnings.push(format!("cell {id}: vector field vanishes at an endpoint of every edge; using the longest edge"));
                buffer.push(naive_point(p, id)?);
            }
        }
    }
    finish(p, candidate, zero_tolerance, buffer, warnings)
}

/// Drops proposals that coincide with existing vertices and falls back to
/// the naive rule if nothing is left.
fn finish(
    p: &Partition,
    candidate: &LyapunovCandidate,
    zero_tolerance: f64,
    buffer: Vec<Point>,
    mut warnings: Vec<String>,
) -> Result<RefinementPlan, RefinementError> {
    let before = buffer.len();
    let kept: Vec<Point> = buffer.into_iter().filter(|x| p.vertices().find(x).is_none()).collect();
    if kept.len() < before {
        warnings.push(format!("dropped {} proposal(s) coinciding with existing vertices", before - kept.len()));
    }
    if kept.is_empty() {
        let mut plan = propose_naive(p, candidate, zero_tolerance)?;
        plan.fallback = true;
        plan.warnings = warnings;
        return Ok(plan);
    }
    let mut plan = assemble_plan(p, kept)?;
    if plan.is_empty() {
        warnings.append(&mut plan.warnings);
        let mut plan = propose_naive(p, candidate, zero_tolerance)?;
        plan.fallback = true;
        plan.warnings = warnings;
        return Ok(plan);
    }
    plan.warnings.extend(warnings);
    Ok(plan)
}

/// Computes `I_split` and `V_new(i)` for a buffer. Duplicate buffered
/// points are merged and points coinciding with an existing vertex dropped.
pub fn assemble_plan(p: &Partition, buffer: Vec<Point>) -> Result<RefinementPlan, RefinementError> {
    assemble_with(p, &CellLocator::new(p), buffer)
}

pub fn assemble_with(p: &Partition, loc: &CellLocator, buffer: Vec<Point>) -> Result<RefinementPlan, RefinementError> {
    let mut plan = RefinementPlan::default();
    let mut merged = 0;
    for (k, x) in buffer.into_iter().enumerate() {
        if p.vertices().find(&x).is_some() || plan.buffer.iter().any(|b| b.distance(&x) <= tol::DEDUP) {
            continue;
        }
        let mut hits = Vec::new();
        let mut on_some_boundary = false;
        let mut scale = f64::INFINITY;
        let mut near_vertex = false;
        for &i in loc.candidates(&x) {
            let cell = &p.cells()[i];
            let coords = p.cell_coords(cell);
            if geometry::contains_point(&coords, &x) {
                on_some_boundary |= geometry::on_boundary(&coords, &x)?;
                let d = geometry::linalg::diameter(&coords);
                scale = scale.min(d);
                near_vertex |= coords.iter().any(|v| x.distance(v) <= tol::MERGE * d);
                hits.push(cell.id);
            }
        }
        if !on_some_boundary {
            return Err(RefinementError::PointOffBoundary(k));
        }
        // points this close would only produce slivers
        if near_vertex || plan.buffer.iter().any(|b| b.distance(&x) <= tol::MERGE * scale) {
            merged += 1;
            continue;
        }
        for id in hits {
            plan.split_set.insert(id);
            plan.per_cell_new.entry(id).or_default().push(x.clone());
        }
        plan.buffer.push(x);
    }
    if merged > 0 {
        plan.warnings.push(format!("merged {merged} proposal(s) into nearby vertices"));
    }
    Ok(plan)
}

/// Replaces every cell of the split set by its Delaunay sub-simplices.
/// Returns the refined partition and the number of vertices added.
///
/// Neighbouring cells are triangulated independently, and on nearly flat
/// cells they can disagree on how to split a shared face. When that happens
/// the points are inserted one at a time instead, each splitting every
/// simplex that contains it, which keeps the partition face-to-face.
pub fn apply_plan(p: &Partition, plan: &RefinementPlan) -> Result<(Partition, usize), RefinementError> {
    let mut out = p.clone();
    if plan.is_empty() {
        return Ok((out, 0));
    }
    let before = out.vertices().len();
    let mut ids_of: Vec<(Point, VertexId)> = Vec::with_capacity(plan.buffer.len());
    for x in &plan.buffer {
        ids_of.push((x.clone(), out.add_vertex(x.clone())?));
    }
    let lookup = |x: &Point| ids_of.iter().find(|(b, _)| b.distance(x) <= tol::DEDUP).map(|(_, id)| *id).unwrap();
    let extra: BTreeMap<CellId, Vec<VertexId>> =
        plan.per_cell_new.iter().map(|(&c, pts)| (c, pts.iter().map(lookup).collect())).collect();
    let with_vertices = out.clone();
    let created = out.retriangulate(&extra)?;
    let ok = conforms(p, &out, &created);
    if !ok {
        log::warn!("Delaunay sub-cells of {} cells do not match across faces; inserting points one by one", extra.len());
        out = with_vertices;
        let points: Vec<VertexId> = ids_of.iter().map(|(_, id)| *id).collect();
        insert_points(&mut out, &plan.split_set, &points)?;
    }
    let added = out.vertices().len() - before;
    Ok((out, added))
}

fn sorted_facets(cell: &[VertexId]) -> impl Iterator<Item = Vec<VertexId>> + '_ {
    (0..cell.len()).map(move |k| cell.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &v)| v).collect())
}

/// True when the cells in `created` tile their parents in `old` and meet
/// their neighbours face to face.
fn conforms(old: &Partition, new: &Partition, created: &[CellId]) -> bool {
    let d = new.dim();
    let count = |p: &Partition| {
        let mut m: HashMap<Vec<VertexId>, u32> = HashMap::new();
        for c in p.cells().iter().filter(|c| c.vertices.len() == d + 1) {
            for f in sorted_facets(&c.vertices) {
                *m.entry(f).or_default() += 1;
            }
        }
        m
    };
    let (old_count, new_count) = (count(old), count(new));
    let created: BTreeSet<CellId> = created.iter().copied().collect();
    let parents: Vec<&crate::model::Cell> = old.cells().iter().filter(|c| new.cell(c.id).is_none()).collect();
    let mut child_volume: HashMap<CellId, f64> = HashMap::new();
    for c in new.cells().iter().filter(|c| created.contains(&c.id)) {
        let coords = new.cell_coords(c);
        let centroid: Vec<f64> = (0..d).map(|k| coords.iter().map(|x| x[k]).sum::<f64>() / coords.len() as f64).collect();
        let Some(parent) = parents.iter().find(|q| geometry::contains_point(&old.cell_coords(q), &centroid)) else { return false };
        *child_volume.entry(parent.id).or_default() += geometry::linalg::simplex_volume(&coords);
        if parent.vertices.len() != d + 1 {
            continue;
        }
        let pc = old.cell_coords(parent);
        for f in sorted_facets(&c.vertices) {
            match new_count.get(&f).copied().unwrap_or(0) {
                2 => continue,
                1 => {}
                _ => return false,
            }
            // an unmatched face must lie on a parent facet bordering nothing
            let bary: Vec<Vec<f64>> = f.iter().filter_map(|&v| geometry::linalg::barycentric(&pc, new.vertex(v))).collect();
            if bary.len() != f.len() {
                return false;
            }
            let Some(k) = (0..=d).find(|&k| bary.iter().all(|l| l[k].abs() <= tol::BARYCENTRIC * 10.0)) else { return false };
            let facet: Vec<VertexId> = parent.vertices.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &v)| v).collect();
            if old_count.get(&facet).copied().unwrap_or(0) != 1 {
                return false;
            }
        }
    }
    parents.iter().all(|q| match (old.cell_volume(q), child_volume.get(&q.id)) {
        (Ok(v), Some(&w)) => (v - w).abs() <= 1e-9 * v.max(f64::MIN_POSITIVE),
        _ => false,
    })
}

/// Inserts `points` in order into the split cells, replacing every simplex
/// that contains a point by the simplices obtained by swapping one vertex
/// for it. Swaps that would give a flat simplex are skipped.
fn insert_points(p: &mut Partition, split: &BTreeSet<CellId>, points: &[VertexId]) -> Result<(), RefinementError> {
    let d = p.dim();
    let mut work: Vec<(Vec<VertexId>, crate::model::AffineLaw)> = Vec::new();
    for &id in split {
        let cell = p.cell(id).expect("split cell is in partition");
        if cell.vertices.len() == d + 1 {
            work.push((cell.vertices.clone(), cell.law.clone()));
        } else {
            let coords = p.cell_coords(cell);
            for s in geometry::delaunay::delaunay_raw(&coords)? {
                work.push((s.into_iter().map(|i| cell.vertices[i]).collect(), cell.law.clone()));
            }
        }
    }
    for &x in points {
        let xp = p.vertex(x).coords().to_vec();
        let mut next = Vec::with_capacity(work.len() + 8);
        for (s, law) in work {
            let coords: Vec<&[f64]> = s.iter().map(|&v| p.vertex(v).coords()).collect();
            let inside = !s.contains(&x) && geometry::contains_point(&coords, &xp);
            match geometry::linalg::barycentric(&coords, &xp).filter(|_| inside) {
                Some(l) => {
                    for k in (0..=d).filter(|&k| l[k] > tol::BARYCENTRIC) {
                        let mut child = s.clone();
                        child[k] = x;
                        // x almost on facet k: the child is a sliver of no volume
                        let cc: Vec<&[f64]> = child.iter().map(|&v| p.vertex(v).coords()).collect();
                        if !geometry::linalg::is_degenerate_simplex(&cc) {
                            next.push((child, law.clone()));
                        }
                    }
                }
                None => next.push((s, law)),
            }
        }
        work = next;
    }
    p.replace_cells(split, work)?;
    Ok(())
}

/// Dispatches to the strategy's proposal rule.
pub fn propose(
    strategy: Strategy,
    p: &Partition,
    candidate: &LyapunovCandidate,
    zero_tolerance: f64,
) -> Result<RefinementPlan, RefinementError> {
    match strategy {
        Strategy::Naive => propose_naive(p, candidate, zero_tolerance),
        Strategy::LyapunovBased => propose_lyapunov_based(p, candidate, zero_tolerance),
        Strategy::VectorField => propose_vector_field(p, candidate, zero_tolerance),
    }
}
