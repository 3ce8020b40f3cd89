//! Built-in benchmark systems.

use crate::geometry::Point;
use crate::model::{AffineLaw, Metadata, Partition};

/// Planar switched system whose trajectories trace a four-petal flower.
/// The laws alternate between the diagonal cones
/// `x2 ≥ |x1|`, `-x1 ≥ |x2|`, `-x2 ≥ |x1|`, `x1 ≥ |x2|` on `‖x‖∞ ≤ 1`.
///
/// The two laws disagree on the cone boundaries, so the partition is
/// flagged `discontinuous_dynamics`.
pub fn flower() -> Partition {
    let a1 = AffineLaw::linear(vec![vec![-0.1, 1.0], vec![-5.0, -0.1]]).unwrap();
    let a2 = AffineLaw::linear(vec![vec![-0.1, 5.0], vec![-1.0, -0.1]]).unwrap();
    let mut p = Partition::new(2);
    let o = p.add_vertex(Point::from([0.0, 0.0])).unwrap();
    let c: Vec<_> =
        [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]].iter().map(|x| p.add_vertex(Point::from(*x)).unwrap()).collect();
    // top, left, bottom, right
    for k in 0..4 {
        let law = if k % 2 == 0 { a1.clone() } else { a2.clone() };
        p.add_cell(vec![o, c[k], c[(k + 1) % 4]], law).unwrap();
    }
    p.metadata = Metadata {
        name: Some("flower".into()),
        source: Some("four-cone switched linear system on the box |x|_inf <= 1".into()),
        discontinuous_dynamics: true,
        ..Metadata::default()
    };
    p
}

/// Companion-form matrix with characteristic polynomial
/// `(s+1)(s+2)(s+3)(s+4)`.
pub fn canonical_4d_matrix() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
        vec![-24.0, -50.0, -35.0, -10.0],
    ]
}

/// The 4-D controllable canonical system on `‖x‖∞ ≤ 5`, starting from the
/// 16 orthant simplices `conv{0, ±5e1, ±5e2, ±5e3, ±5e4}`.
pub fn canonical_4d() -> Partition {
    let law = AffineLaw::linear(canonical_4d_matrix()).unwrap();
    let mut p = Partition::new(4);
    let o = p.add_vertex(Point::origin(4)).unwrap();
    let mut axis = Vec::new();
    for k in 0..4 {
        let mut pos = vec![0.0; 4];
        pos[k] = 5.0;
        let mut neg = vec![0.0; 4];
        neg[k] = -5.0;
        axis.push([p.add_vertex(Point::new(pos)).unwrap(), p.add_vertex(Point::new(neg)).unwrap()]);
    }
    for signs in 0..16usize {
        let mut ids = vec![o];
        ids.extend((0..4).map(|k| axis[k][(signs >> k) & 1]));
        p.add_cell(ids, law.clone()).unwrap();
    }
    p.metadata = Metadata {
        name: Some("canonical-4d".into()),
        source: Some("controllable canonical form, poles -1,-2,-3,-4, cross-polytope fan".into()),
        ..Metadata::default()
    };
    p
}

/// Discrete-time 4-D plant `x⁺ = A x + B u` as a single box cell
/// `‖x‖∞ ≤ 4` with `u = 0`. Closing the loop needs an external explicit-MPC
/// partition; the input matrix is kept in the metadata.
pub fn mpc_plant_4d() -> Partition {
    let a = vec![
        vec![0.4346, -0.2313, -0.6404, 0.3405],
        vec![-0.6731, 0.1045, -0.0613, 0.3400],
        vec![-0.0568, 0.7065, -0.086, 0.0159],
        vec![0.3511, 0.1404, 0.2980, 1.0416],
    ];
    let b = vec![vec![0.4346], vec![-0.6731], vec![-0.0568], vec![0.3511]];
    let mut p = Partition::new(4);
    let ids: Vec<_> = (0..16u32)
        .map(|m| p.add_vertex(Point::new((0..4).map(|k| if (m >> k) & 1 == 1 { 4.0 } else { -4.0 }).collect())).unwrap())
        .collect();
    p.add_cell(ids, AffineLaw::linear(a).unwrap()).unwrap();
    p.metadata = Metadata {
        name: Some("mpc-plant-4d".into()),
        source: Some("open-loop discrete plant on |x|_inf <= 4; needs an explicit-MPC partition to analyze".into()),
        sampling_time: Some(0.01),
        discrete_time: true,
        input_matrix: Some(b),
        ..Metadata::default()
    };
    p
}

/// All built-in benchmarks with their file stems.
pub fn shipped_benchmarks() -> Vec<(&'static str, Partition)> {
    vec![("flower", flower()), ("canonical_4d", canonical_4d()), ("mpc_plant_4d", mpc_plant_4d())]
}
