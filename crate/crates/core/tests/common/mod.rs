//! Helpers shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeSet;

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};
use rand::Rng;

use pwa_lyap::geometry::{self, delaunay, Point};
use pwa_lyap::lyapunov::LyapunovCandidate;
use pwa_lyap::model::{simulate_with, AffineLaw, CellLocator, Partition};

/// `V(x)` through the lowest-id cell containing `x`.
pub fn value_at(p: &Partition, loc: &CellLocator, cand: &LyapunovCandidate, x: &[f64]) -> Option<f64> {
    let i = loc.locate(p, x)?;
    cand.value(p.cells()[i].id, x)
}

/// Uniform point of a random cell (weights from normalized exponentials).
pub fn random_point<R: Rng>(p: &Partition, rng: &mut R) -> Point {
    let cell = &p.cells()[rng.gen_range(0..p.num_cells())];
    let pts = p.cell_points(cell);
    let w: Vec<f64> = pts.iter().map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    let mut x = vec![0.0; p.dim()];
    for (pt, wk) in pts.iter().zip(&w) {
        for (xi, c) in x.iter_mut().zip(pt.iter()) {
            *xi += wk / s * c;
        }
    }
    Point::new(x)
}

/// Runs `count` Euler trajectories from random states and reports every
/// step where `V` fails to decrease strictly. A trajectory stops within
/// `radius` of the origin or when it leaves the domain.
pub fn euler_violations<R: Rng>(
    p: &Partition,
    cand: &LyapunovCandidate,
    rng: &mut R,
    count: usize,
    dt: f64,
    steps: usize,
    radius: f64,
) -> Vec<String> {
    let loc = CellLocator::new(p);
    let mut out = Vec::new();
    for t in 0..count {
        let x0 = random_point(p, rng);
        let traj = simulate_with(p, &loc, &x0, dt, steps).expect("start is inside the domain");
        let mut prev = value_at(p, &loc, cand, &traj.points[0]).unwrap();
        for (k, x) in traj.points.iter().enumerate().skip(1) {
            if x.norm() <= radius {
                break;
            }
            let v = value_at(p, &loc, cand, x).unwrap();
            if !(v < prev) {
                out.push(format!("trajectory {t} step {k}: V {prev:e} -> {v:e} at {:?}", x.coords()));
                break;
            }
            prev = v;
        }
    }
    out
}

/// Random continuous PWA system: Delaunay triangulation of the origin, the
/// box corners and a few interior points, with the vector field
/// interpolated from random vertex values (zero at the origin).
pub fn random_partition<R: Rng>(rng: &mut R, dim: usize, interior: usize) -> Partition {
    let mut pts = vec![Point::origin(dim)];
    for mask in 0..1usize << dim {
        pts.push(Point::new((0..dim).map(|k| if mask >> k & 1 == 1 { 1.0 } else { -1.0 }).collect()));
    }
    while pts.len() < 1 + (1 << dim) + interior {
        let x = Point::new((0..dim).map(|_| rng.gen_range(-0.9..0.9)).collect());
        if pts.iter().all(|q| q.distance(&x) > 0.1) {
            pts.push(x);
        }
    }
    let field: Vec<Vec<f64>> =
        pts.iter().map(|x| if x.is_origin() { vec![0.0; dim] } else { (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect() }).collect();
    let mut p = Partition::new(dim);
    let ids: Vec<_> = pts.iter().map(|x| p.add_vertex(x.clone()).unwrap()).collect();
    for s in delaunay(&pts).unwrap() {
        // f(x) = M x + a through the simplex's vertex values
        let rows: Vec<Vec<f64>> = s.iter().map(|&i| pts[i].iter().copied().chain([1.0]).collect()).collect();
        let mut m = vec![vec![0.0; dim]; dim];
        let mut a = vec![0.0; dim];
        for r in 0..dim {
            let rhs: Vec<f64> = s.iter().map(|&i| field[i][r]).collect();
            let coef = geometry::linalg::solve(&rows, &rhs).unwrap();
            m[r].copy_from_slice(&coef[..dim]);
            a[r] = coef[dim];
        }
        if s.iter().any(|&i| pts[i].is_origin()) {
            a = vec![0.0; dim];
        }
        p.add_cell(s.iter().map(|&i| ids[i]).collect(), AffineLaw::new(m, a).unwrap()).unwrap();
    }
    p
}

/// Edges of `conv(points)` by brute force: `{i, j}` is an edge iff the
/// midpoint of `v_i v_j` has no convex representation giving weight to any
/// other point.
pub fn edge_oracle(points: &[Point]) -> BTreeSet<(usize, usize)> {
    let n = points[0].dim();
    let mut edges = BTreeSet::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let mut lp = Problem::new(OptimizationDirection::Maximize);
            let vars: Vec<_> =
                (0..points.len()).map(|k| lp.add_var(if k == i || k == j { 0.0 } else { 1.0 }, (0.0, f64::INFINITY))).collect();
            for r in 0..n {
                let row: Vec<_> = vars.iter().zip(points).map(|(&v, x)| (v, x[r])).collect();
                lp.add_constraint(&row, ComparisonOp::Eq, 0.5 * (points[i][r] + points[j][r]));
            }
            let ones: Vec<_> = vars.iter().map(|&v| (v, 1.0)).collect();
            lp.add_constraint(&ones, ComparisonOp::Eq, 1.0);
            let other = match lp.solve().expect("oracle LP is feasible") {
                SolveOutcome::Solution(sol) => sol.objective(),
                _ => unreachable!("no time limit was set"),
            };
            if other <= 1e-9 {
                edges.insert((i, j));
            }
        }
    }
    edges
}

/// Squared circumradius and center of a full-dimensional simplex.
pub fn circumsphere(simplex: &[&Point]) -> (Vec<f64>, f64) {
    let n = simplex.len() - 1;
    let v0 = simplex[0];
    let rows: Vec<Vec<f64>> = simplex[1..].iter().map(|v| v.iter().zip(v0.iter()).map(|(a, b)| 2.0 * (a - b)).collect()).collect();
    let rhs: Vec<f64> = simplex[1..].iter().map(|v| v.iter().map(|a| a * a).sum::<f64>() - v0.iter().map(|a| a * a).sum::<f64>()).collect();
    let c = geometry::linalg::solve(&rows, &rhs).expect("nondegenerate simplex");
    let r2 = (0..n).map(|k| (c[k] - v0[k]).powi(2)).sum();
    (c, r2)
}
