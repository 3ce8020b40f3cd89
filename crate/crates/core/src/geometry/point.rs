use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::tol;

/// A point in the state space R^n.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    /// Panics if any coordinate is NaN or infinite; use [`Point::try_new`]
    /// for untrusted input.
    pub fn new(coords: Vec<f64>) -> Self {
        Self::try_new(coords).expect("point coordinates must be finite")
    }

    pub fn try_new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Point(coords))
        } else {
            Err(GeometryError::NonFinite)
        }
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        distance(&self.0, other)
    }

    /// True if the point is within the vertex dedup tolerance of the origin.
    pub fn is_origin(&self) -> bool {
        self.norm() <= tol::DEDUP
    }

    /// `alpha * self + (1 - alpha) * other`.
    pub fn lerp(&self, other: &Point, alpha: f64) -> Point {
        let beta = 1.0 - alpha;
        Point(self.0.iter().zip(&other.0).map(|(a, b)| alpha * a + beta * b).collect())
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<&[f64]> for Point {
    fn from(coords: &[f64]) -> Self {
        Point::new(coords.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(coords: [f64; N]) -> Self {
        Point::new(coords.to_vec())
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(de)?;
        Point::try_new(coords).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Index of a vertex in a [`VertexStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Bucket width of the spatial hash. Must exceed the dedup tolerance so
/// that a neighbourhood search over adjacent buckets finds every match.
const BUCKET: f64 = 1e-6;

/// Global, deduplicated vertex storage. Two inserted points closer than
/// [`tol::DEDUP`] receive the same [`VertexId`].
#[derive(Clone, Debug, Default)]
pub struct VertexStore {
    dim: usize,
    points: Vec<Point>,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl VertexStore {
    pub fn new(dim: usize) -> Self {
        VertexStore { dim, points: Vec::new(), buckets: HashMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, id: VertexId) -> &Point {
        &self.points[id.0]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &Point)> {
        self.points.iter().enumerate().map(|(i, p)| (VertexId(i), p))
    }

    fn key(p: &[f64]) -> Vec<i64> {
        p.iter().map(|c| (c / BUCKET).floor() as i64).collect()
    }

    /// Looks up an existing vertex within the dedup tolerance of `p`.
    pub fn find(&self, p: &[f64]) -> Option<VertexId> {
        let base = Self::key(p);
        let mut offset = vec![-1i64; self.dim];
        let mut best: Option<(usize, f64)> = None;
        loop {
            let key: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
            if let Some(ids) = self.buckets.get(&key) {
                for &id in ids {
                    let d = distance(&self.points[id], p);
                    if d <= tol::DEDUP && best.map_or(true, |(bid, bd)| d < bd || (d == bd && id < bid)) {
                        best = Some((id, d));
                    }
                }
            }
            // odometer over {-1, 0, 1}^dim
            let mut k = 0;
            while k < self.dim {
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
            if k == self.dim {
                break;
            }
        }
        best.map(|(id, _)| VertexId(id))
    }

    /// Inserts `p`, returning the id of an existing vertex if one lies within
    /// the dedup tolerance.
    pub fn insert(&mut self, p: Point) -> VertexId {
        assert_eq!(p.dim(), self.dim, "vertex dimension mismatch");
        if let Some(id) = self.find(&p) {
            return id;
        }
        let id = self.points.len();
        self.buckets.entry(Self::key(&p)).or_default().push(id);
        self.points.push(p);
        VertexId(id)
    }
}
