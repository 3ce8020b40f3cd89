use super::{ModelError, Partition};
use crate::geometry::{self, BoundingBox, Point};
use crate::tol;

/// Uniform-grid bucket index over cell bounding boxes, for point location
/// in partitions with many cells.
#[derive(Clone, Debug)]
pub struct CellLocator {
    domain: BoundingBox,
    per_axis: usize,
    width: Vec<f64>,
    buckets: Vec<Vec<usize>>,
    boxes: Vec<BoundingBox>,
}

impl CellLocator {
    pub fn new(p: &Partition) -> Self {
        let d = p.dim();
        let boxes: Vec<BoundingBox> = p.cells().iter().map(|c| p.bounding_box(c)).collect();
        let domain = if boxes.is_empty() {
            BoundingBox { min: vec![0.0; d], max: vec![0.0; d] }
        } else {
            let mut b = boxes[0].clone();
            for bb in &boxes[1..] {
                for k in 0..d {
                    b.min[k] = b.min[k].min(bb.min[k]);
                    b.max[k] = b.max[k].max(bb.max[k]);
                }
            }
            b
        };
        let target = (4 * boxes.len()).clamp(1, 1 << 20) as f64;
        let per_axis = (target.powf(1.0 / d.max(1) as f64).ceil() as usize).max(1);
        let width: Vec<f64> = (0..d).map(|k| ((domain.max[k] - domain.min[k]) / per_axis as f64).max(f64::MIN_POSITIVE)).collect();
        let mut loc = CellLocator { domain, per_axis, width, buckets: vec![Vec::new(); per_axis.pow(d as u32)], boxes };
        for (idx, bb) in loc.boxes.iter().enumerate() {
            let lo = loc.axis_range(&bb.min, -1.0);
            let hi = loc.axis_range(&bb.max, 1.0);
            let mut cur = lo.clone();
            loop {
                let flat = loc.flatten(&cur);
                loc.buckets[flat].push(idx);
                let mut k = 0;
                while k < d {
                    if cur[k] < hi[k] {
                        cur[k] += 1;
                        break;
                    }
                    cur[k] = lo[k];
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
        loc
    }

    fn axis_range(&self, x: &[f64], pad: f64) -> Vec<usize> {
        x.iter()
            .enumerate()
            .map(|(k, &v)| {
                let slack = pad * tol::BOUNDARY * (1.0 + v.abs());
                let t = ((v + slack - self.domain.min[k]) / self.width[k]).floor();
                (t.max(0.0) as usize).min(self.per_axis - 1)
            })
            .collect()
    }

    fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &i| acc * self.per_axis + i)
    }

    /// Indices (into `Partition::cells`) of cells whose bounding box may
    /// contain `x`, ascending.
    pub fn candidates(&self, x: &[f64]) -> &[usize] {
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !self.domain.contains(x, tol::BOUNDARY * scale) {
            return &[];
        }
        &self.buckets[self.flatten(&self.axis_range(x, 0.0))]
    }

    /// Index of the lowest-id cell containing `x`.
    pub fn locate(&self, p: &Partition, x: &[f64]) -> Option<usize> {
        self.candidates(x).iter().copied().find(|&i| {
            let c = &p.cells()[i];
            self.boxes[i].contains(x, tol::BOUNDARY * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()))))
                && geometry::contains_point(&p.cell_coords(c), x)
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// States visited, starting with `x0`; all inside the domain.
    pub points: Vec<Point>,
    /// Index of the cell whose law advanced each state (one per step taken).
    pub cells: Vec<usize>,
    /// The run stopped because the next state left the domain.
    pub truncated: bool,
}

/// Forward-Euler trajectory `x ← x + dt (A_i x + a_i)` using the lowest-id
/// cell that contains the current state.
pub fn simulate_trajectory(p: &Partition, x0: &Point, dt: f64, steps: usize) -> Result<Trajectory, ModelError> {
    simulate_with(p, &CellLocator::new(p), x0, dt, steps)
}

/// As [`simulate_trajectory`] with a prebuilt locator, for repeated runs.
pub fn simulate_with(p: &Partition, loc: &CellLocator, x0: &Point, dt: f64, steps: usize) -> Result<Trajectory, ModelError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(ModelError::NonpositiveStep(dt));
    }
    if x0.dim() != p.dim() {
        return Err(ModelError::DimensionMismatch(format!("initial state has dimension {}, expected {}", x0.dim(), p.dim())));
    }
    let Some(mut cell) = loc.locate(p, x0) else { return Err(ModelError::StartOutsideDomain) };
    let mut traj = Trajectory { points: vec![x0.clone()], cells: Vec::with_capacity(steps), truncated: false };
    let mut x = x0.clone().into_vec();
    for _ in 0..steps {
        let f = p.cells()[cell].law.apply(&x);
        let next: Vec<f64> = x.iter().zip(&f).map(|(a, b)| a + dt * b).collect();
        if next.iter().any(|v| !v.is_finite()) {
            traj.truncated = true;
            break;
        }
        traj.cells.push(cell);
        match loc.locate(p, &next) {
            Some(c) => {
                cell = c;
                x = next;
                traj.points.push(Point::new(x.clone()));
            }
            None => {
                traj.cells.pop();
                traj.truncated = true;
                break;
            }
        }
    }
    Ok(traj)
}
