mod common;

use std::collections::BTreeSet;

use commsq::factorization::{enumerate_factorizations, raw_count, screen_intermediate};
use commsq::graph::IntMatrix;
use commsq::make_star;

use common::factorization_oracle::{oracle_classes, small_matrices, Piece};

fn library_classes(g: &IntMatrix) -> BTreeSet<Vec<Piece>> {
    enumerate_factorizations(g)
        .unwrap()
        .iter()
        .map(|f| {
            assert_eq!(f.product(), *g);
            let mut ps: Vec<Piece> =
                (0..f.q).map(|c| (f.h.iter().map(|r| r[c]).collect(), f.k[c].clone())).collect();
            ps.sort();
            ps
        })
        .collect()
}

#[test]
fn agrees_with_oracle_on_small_matrices() {
    let mut checked = 0;
    for m in 1..=3 {
        for n in 1..=3 {
            for g in small_matrices(m, n, 6) {
                assert_eq!(library_classes(&g), oracle_classes(&g), "G = {g}");
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn small_examples() {
    let one = |rows: &[&[i64]]| {
        let m = rows.len();
        let n = rows[0].len();
        IntMatrix::from_fn(m, n, |i, j| rows[i][j])
    };
    let cases: [(&[&[i64]], usize, u128); 4] = [
        (&[&[1]], 1, 1),
        (&[&[2]], 3, 3),
        (&[&[1, 1]], 2, 3),
        (&[&[2, 1], &[1, 1]], 19, 240),
    ];
    for (rows, classes, raw) in cases {
        let fs = enumerate_factorizations(&one(rows)).unwrap();
        assert_eq!(fs.len(), classes, "{rows:?}");
        assert_eq!(raw_count(&fs), raw, "{rows:?}");
    }
}

#[test]
fn four_star_three_arms() {
    let g = make_star(&[3, 3, 3, 3]).unwrap().adjacency;
    let fs = enumerate_factorizations(&g).unwrap();
    assert_eq!(fs.len(), 457);
    assert_eq!(enumerate_factorizations(&g.transpose()).unwrap().len(), 457);
    for f in &fs {
        assert_eq!(f.product(), g);
    }
    let golden = (3.0 + 5f64.sqrt()) / 2.0;
    assert!(screen_intermediate(&g, golden, 1e-9).unwrap().is_empty());
    assert_eq!(screen_intermediate(&g, 3.0 + 5f64.sqrt(), 1e-9).unwrap().len(), 1);
}

#[test]
fn output_is_deterministic_and_sorted() {
    let g = make_star(&[2, 1, 1]).unwrap().adjacency;
    let a = enumerate_factorizations(&g).unwrap();
    let b = enumerate_factorizations(&g).unwrap();
    assert_eq!(a, b);
    assert!(a.windows(2).all(|w| w[0].q <= w[1].q));
}

#[test]
fn rejects_bad_input() {
    assert!(enumerate_factorizations(&IntMatrix::from_row_slice(1, 2, &[1, -1])).is_err());
    assert!(enumerate_factorizations(&IntMatrix::from_row_slice(2, 1, &[1, 0])).is_err());
    assert!(enumerate_factorizations(&IntMatrix::zeros(0, 0)).is_err());
}
