mod common;

use std::f64::consts::PI;

use commsq::graph::{
    int_matrix, make_star, spectral, spectral_anchored, wenzl_bound, Anchor, BipartiteGraph, Lines,
    TraceRule, SPECTRAL_TOL,
};
use commsq::{catalog, Error};
use proptest::prelude::*;

#[test]
fn path_norms_match_chebyshev_values() {
    for n in 2..12 {
        let g = common::path(n);
        let s = spectral(&g, SPECTRAL_TOL).unwrap();
        let expected = 2.0 * (PI / (n as f64 + 1.0)).cos();
        assert!((s.norm - expected).abs() < 1e-12, "A_{n}: {} vs {expected}", s.norm);
    }
}

#[test]
fn four_star_with_unit_arms_has_index_four() {
    let s = spectral(&make_star(&[1, 1, 1, 1]).unwrap(), SPECTRAL_TOL).unwrap();
    assert!((s.index() - 4.0).abs() < 1e-12);
}

#[test]
fn catalog_norms_agree_with_power_iteration() {
    for name in catalog::CATALOG_NAMES {
        let g = catalog::shape_by_name(name).unwrap().g_graph().unwrap();
        let s = spectral(&g, SPECTRAL_TOL).unwrap();
        let oracle = common::power_norm(&g.adjacency);
        assert!((s.norm - oracle).abs() < 1e-9, "{name}: {} vs {oracle}", s.norm);
        let stated = catalog::stated_norm_sq(name).unwrap();
        assert!((s.index() - stated).abs() < 1e-9, "{name}");
    }
}

#[test]
fn rejects_bad_adjacency() {
    let labels = ["x", "y"];
    assert!(matches!(
        BipartiteGraph::from_adjacency(&labels, &labels, &[vec![1, -1], vec![0, 1]]),
        Err(Error::NegativeEntry { .. })
    ));
    assert!(matches!(
        BipartiteGraph::from_adjacency(&labels, &labels, &[vec![1, 0], vec![0, 0]]),
        Err(Error::IsolatedVertex(_))
    ));
    assert!(matches!(
        BipartiteGraph::from_adjacency(&labels, &labels, &[vec![0, 0], vec![0, 0]]),
        Err(Error::ZeroMatrix)
    ));
    assert!(matches!(
        BipartiteGraph::from_adjacency(&["x", "x"], &labels, &[vec![1, 0], vec![0, 1]]),
        Err(Error::DuplicateLabel(_))
    ));
    let split = BipartiteGraph::from_adjacency(&labels, &labels, &[vec![1, 0], vec![0, 1]]).unwrap();
    assert!(!split.is_connected());
    assert!(matches!(spectral(&split, SPECTRAL_TOL), Err(Error::Disconnected(_))));
}

#[test]
fn json_round_trip_and_transpose() {
    let g = catalog::shape_by_name("quipu").unwrap().g_graph().unwrap();
    let back = BipartiteGraph::from_json(&g.to_json()).unwrap();
    assert_eq!(g, back);
    let t = spectral(&g.transpose(), SPECTRAL_TOL).unwrap();
    let s = spectral(&g, SPECTRAL_TOL).unwrap();
    assert!((t.norm - s.norm).abs() < 1e-12);
    assert!(g.to_dot().contains("--"));
}

#[test]
fn anchors_and_trace_weights() {
    let g = make_star(&[2, 1, 1]).unwrap();
    let s = spectral_anchored(&g, SPECTRAL_TOL, &Anchor::Vertex("a2".into(), 1.0)).unwrap();
    let i = g.left_index("a2").unwrap();
    assert!((s.pf_left[i] - 1.0).abs() < 1e-14);
    let (l, r) = s.trace_weights(TraceRule::LeftIsSum);
    for (i, li) in l.iter().enumerate() {
        let sum: f64 = (0..g.right_labels.len()).map(|j| g.adjacency[(i, j)] as f64 * r[j]).sum();
        assert!((li - sum).abs() < 1e-12);
    }
    let (l, r) = s.trace_weights(TraceRule::RightIsSum);
    for (j, rj) in r.iter().enumerate() {
        let sum: f64 = (0..g.left_labels.len()).map(|i| g.adjacency[(i, j)] as f64 * l[i]).sum();
        assert!((rj - sum).abs() < 1e-12);
    }
}

#[test]
fn wenzl_bounds() {
    let q = catalog::shape_by_name("quipu").unwrap();
    assert_eq!(wenzl_bound(&q.g, &q.l, Lines::Rows), 1);
    let g = int_matrix(&[vec![2, 1], vec![1, 3]]).unwrap();
    assert_eq!(wenzl_bound(&g, &g, Lines::Rows), 9);
    assert_eq!(wenzl_bound(&g, &g, Lines::Columns), 9);
    let large = catalog::shape_by_name("large_broom").unwrap();
    assert_eq!(wenzl_bound(&large.g, &large.l, Lines::Columns), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn spectral_invariants_on_random_graphs(seed in any::<u64>(), m in 1usize..6, n in 1usize..6, extra in 0usize..6) {
        let mut r = common::rng(seed);
        let a = common::random_connected(&mut r, m, n, extra, 3);
        let g = BipartiteGraph::from_matrix(&commsq::graph::matrix_rows(&a)).unwrap();
        let s = spectral(&g, SPECTRAL_TOL).unwrap();
        prop_assert!(s.pf_left.iter().chain(&s.pf_right).all(|&x| x > 0.0));
        prop_assert!(s.residual <= 1e-10);
        let oracle = common::power_norm(&a);
        prop_assert!((s.norm - oracle).abs() <= 1e-8 * oracle.max(1.0), "{} vs {}", s.norm, oracle);
        let max_entry = *a.iter().max().unwrap() as f64;
        prop_assert!(s.norm + 1e-12 >= max_entry);
        let t = spectral(&g.transpose(), SPECTRAL_TOL).unwrap();
        prop_assert!((t.norm - s.norm).abs() <= 1e-10);
        let mx = s.pf_left.iter().cloned().fold(0.0, f64::max);
        prop_assert!((mx - 1.0).abs() < 1e-14);
    }
}
