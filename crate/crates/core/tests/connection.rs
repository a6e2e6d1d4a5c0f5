mod common;

use commsq::catalog;
use commsq::connection::{
    block_layout, check_nondegenerate, complete_orthonormal, unitarity_residual, verify, CMatrix,
    CVector, Connection, PfData, Side, SquareShape,
};
use commsq::graph::IntMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Haar-like random unitary from Gram-Schmidt on a Gaussian-ish matrix.
fn random_unitary(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let mut m = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
    });
    for i in 0..n {
        for k in 0..i {
            let proj: Complex64 = (0..n).map(|j| m[(i, j)] * m[(k, j)].conj()).sum();
            for j in 0..n {
                let v = m[(k, j)];
                m[(i, j)] -= proj * v;
            }
        }
        let norm = (0..n).map(|j| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for j in 0..n {
            m[(i, j)] /= norm;
        }
    }
    m
}

#[test]
fn catalog_shapes_are_nondegenerate_and_cells_match_path_counts() {
    for name in catalog::CATALOG_NAMES {
        let shape = catalog::shape_by_name(name).unwrap();
        assert!(check_nondegenerate(&shape).unwrap(), "{name}");
        let gk = &shape.g * &shape.k;
        let lu = block_layout(&shape, Side::U).unwrap();
        for c in &lu.cells {
            assert_eq!(c.size() as i64, gk[(c.outer.0, c.outer.1)], "{name} u{:?}", c.outer);
            assert_eq!(c.cols.len(), c.size());
        }
        let gth = shape.g.transpose() * &shape.h;
        let lv = block_layout(&shape, Side::V).unwrap();
        for c in &lv.cells {
            assert_eq!(c.size() as i64, gth[(c.outer.0, c.outer.1)], "{name} v{:?}", c.outer);
        }
        let total_u: usize = lu.cells.iter().map(|c| c.size()).sum();
        let total_v: usize = lv.cells.iter().map(|c| c.size()).sum();
        assert_eq!(total_u, total_v, "{name}: both halves index the same cycles");
    }
}

#[test]
fn small_broom_block_sizes() {
    let lu = block_layout(&catalog::shape_by_name("small_broom").unwrap(), Side::U).unwrap();
    let counts = lu.size_counts();
    assert!(counts.contains(&(4, 2)));
    assert!(counts.contains(&(3, 6)));
    assert!(counts.contains(&(1, 6)));
}

#[test]
fn degenerate_shape_is_rejected() {
    let g = IntMatrix::from_row_slice(2, 2, &[1, 1, 0, 1]);
    let h = IntMatrix::from_row_slice(2, 2, &[1, 0, 0, 1]);
    let shape = SquareShape::new(g.clone(), h.clone(), h, g.transpose()).unwrap();
    assert!(!check_nondegenerate(&shape).unwrap());
    assert!(block_layout(&shape, Side::U).is_err());
}

#[test]
fn completion_extends_orthonormal_rows() {
    let mut r = common::rng(7);
    for n in 1..7 {
        let u = random_unitary(&mut r, n);
        for k in 0..=n {
            let rows: Vec<CVector> = (0..k).map(|i| u.row(i).transpose()).collect();
            let full = complete_orthonormal(&rows, n).unwrap();
            assert!(unitarity_residual(&full) < 1e-12);
            for i in 0..k {
                for j in 0..n {
                    assert!((full[(i, j)] - u[(i, j)]).norm() < 1e-15);
                }
            }
        }
    }
    let bad = vec![CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)])];
    assert!(complete_orthonormal(&bad, 2).is_err());
}

#[test]
fn json_round_trip_preserves_verification() {
    let e = catalog::by_name("small_broom").unwrap();
    let json = e.connection.to_json();
    let back = Connection::from_json(&json).unwrap();
    assert!(verify(&back, 1e-10).passed());
    for (a, b) in back.u_blocks.iter().zip(&e.connection.u_blocks) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn corrupted_v_is_detected() {
    let e = catalog::by_name("small_broom").unwrap();
    let mut conn = e.connection.clone();
    let big = conn.v_blocks.iter().position(|b| b.nrows() > 1).unwrap();
    conn.v_blocks[big].swap_rows(0, 1);
    let r = verify(&conn, 1e-10);
    assert!(!r.passed());
    assert!(r.bi_dual_residual > 1e-3);
}

fn random_shape(r: &mut ChaCha8Rng) -> SquareShape {
    // (G, G, G^t, G^t) and (G, 1, 1, G) are nondegenerate for any G
    let (m, n) = (r.random_range(1..=3), r.random_range(1..=3));
    let extra = r.random_range(0..3);
    let g = common::random_connected(r, m, n, extra, 2);
    if r.random_bool(0.5) {
        SquareShape::new(g.clone(), g.clone(), g.transpose(), g.transpose()).unwrap()
    } else {
        SquareShape::new(g.clone(), IntMatrix::identity(m, m), IntMatrix::identity(n, n), g).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bi_dual_is_an_involution(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let shape = random_shape(&mut r);
        let total = shape.np() + shape.nq() + shape.nr() + shape.ns();
        prop_assert!(total <= 12);
        prop_assert!(check_nondegenerate(&shape).unwrap());
        let pf = PfData::from_shape(&shape).unwrap();
        let layout = block_layout(&shape, Side::U).unwrap();
        let u: Vec<CMatrix> = layout.cells.iter().map(|c| random_unitary(&mut r, c.size())).collect();
        let conn = Connection::bi_dual(shape, u.clone(), pf).unwrap();
        let back = conn.u_from_v().unwrap();
        let dev = u.iter().zip(&back).flat_map(|(a, b)| (a - b).iter().map(|z| z.norm()).collect::<Vec<_>>()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-14, "deviation {dev:e}");
    }
}
