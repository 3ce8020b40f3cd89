mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use pwa_lyap::geometry::{contains_point, delaunay, edges_of_cell, linalg, on_boundary, Point};

use common::{circumsphere, edge_oracle};

fn point_set(dim: usize, extra: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), extra).prop_map(move |inner| {
        let mut pts: Vec<Point> =
            (0..1usize << dim).map(|m| Point::new((0..dim).map(|j| if m >> j & 1 == 1 { 1.0 } else { -1.0 }).collect())).collect();
        pts.extend(inner.into_iter().map(Point::new));
        pts
    })
}

fn any_dim_set() -> impl Strategy<Value = Vec<Point>> {
    (2usize..=4).prop_flat_map(|d| point_set(d, 0..10))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delaunay_tiles_the_box(pts in any_dim_set()) {
        let dim = pts[0].dim();
        let simplices = delaunay(&pts).unwrap();
        let vol: f64 = simplices
            .iter()
            .map(|s| linalg::simplex_volume(&s.iter().map(|&i| pts[i].coords()).collect::<Vec<_>>()))
            .sum();
        let exact = (1usize << dim) as f64;
        prop_assert!((vol - exact).abs() <= 1e-8 * exact, "volume {} vs {}", vol, exact);
        for s in &simplices {
            prop_assert_eq!(s.len(), dim + 1);
            let verts: Vec<&Point> = s.iter().map(|&i| &pts[i]).collect();
            let (c, r2) = circumsphere(&verts);
            for (i, x) in pts.iter().enumerate().filter(|(i, _)| !s.contains(i)) {
                let d2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
                prop_assert!(d2 >= r2 - 1e-8 * r2.max(1.0), "point {} inside circumsphere of {:?}", i, s);
            }
        }
    }

    #[test]
    fn edges_match_adjacency_lp(dim in 2usize..=4, raw in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 6..10)) {
        let pts: Vec<Point> = raw.into_iter().map(|v| Point::new(v[..dim].to_vec())).collect();
        prop_assume!(linalg::affine_dim(&pts.iter().map(|p| p.coords()).collect::<Vec<_>>()) == dim);
        let got: BTreeSet<(usize, usize)> = edges_of_cell(&pts, false).unwrap().into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        prop_assert_eq!(got, edge_oracle(&pts));
    }

    #[test]
    fn boundary_points_are_contained(dim in 2usize..=3, t in 0.0f64..1.0, pick in 0usize..64) {
        // a point on an edge of the box is on its boundary; its midpoint with the center is interior
        let pts: Vec<Point> =
            (0..1usize << dim).map(|m| Point::new((0..dim).map(|j| if m >> j & 1 == 1 { 1.0 } else { -1.0 }).collect())).collect();
        let coords: Vec<&[f64]> = pts.iter().map(|p| p.coords()).collect();
        let edges = edges_of_cell(&pts, false).unwrap();
        let (a, b) = edges[pick % edges.len()];
        let x = pts[a].lerp(&pts[b], t);
        prop_assert!(contains_point(&coords, &x));
        prop_assert!(on_boundary(&coords, &x).unwrap());
        let inner: Vec<f64> = x.iter().map(|v| 0.5 * v).collect();
        prop_assert!(contains_point(&coords, &inner));
        prop_assert!(!on_boundary(&coords, &inner).unwrap());
    }
}

#[test]
fn cube_has_twelve_edges() {
    let pts: Vec<Point> = (0..8usize).map(|m| Point::new((0..3).map(|j| (m >> j & 1) as f64).collect())).collect();
    assert_eq!(edges_of_cell(&pts, false).unwrap().len(), 12);
    assert_eq!(edge_oracle(&pts).len(), 12);
}
