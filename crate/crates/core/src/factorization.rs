//! Nonnegative integer factorizations `G = HK` without zero rows or columns,
//! counted up to simultaneous permutation of the middle index.
//!
//! `HK = sum_c h_c k_c^t` over the columns `h_c` of `H` and rows `k_c` of
//! `K`, so a factorization is a multiset of nonzero rank-one pieces
//! `h k^t <= G` that sum to `G`. The search repeatedly covers the first
//! nonzero entry of the remaining residual.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{matrix_rows, operator_norm, IntMatrix};

type Piece = (Vec<i64>, Vec<i64>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub h: Vec<Vec<i64>>,
    pub k: Vec<Vec<i64>>,
    pub q: usize,
}

impl Factorization {
    fn from_pieces(pieces: &[Piece], m: usize) -> Self {
        let q = pieces.len();
        let h = (0..m).map(|i| pieces.iter().map(|(h, _)| h[i]).collect()).collect();
        let k = pieces.iter().map(|(_, k)| k.clone()).collect();
        Factorization { h, k, q }
    }

    pub fn h_matrix(&self) -> IntMatrix {
        IntMatrix::from_fn(self.h.len(), self.q, |i, j| self.h[i][j])
    }

    pub fn k_matrix(&self) -> IntMatrix {
        let n = self.k.first().map_or(0, |r| r.len());
        IntMatrix::from_fn(self.q, n, |i, j| self.k[i][j])
    }

    /// Number of labeled factorizations in this class: `q!` divided by the
    /// multiplicities of repeated pieces.
    pub fn labeled_count(&self) -> u128 {
        let mut pieces: Vec<Piece> = (0..self.q)
            .map(|c| (self.h.iter().map(|r| r[c]).collect(), self.k[c].clone()))
            .collect();
        pieces.sort();
        let mut count: u128 = (1..=self.q as u128).product();
        let mut run = 1u128;
        for w in pieces.windows(2) {
            if w[0] == w[1] {
                run += 1;
                count /= run;
            } else {
                run = 1;
            }
        }
        count
    }
}

fn check_input(g: &IntMatrix) -> Result<()> {
    if g.nrows() == 0 || g.ncols() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    for (idx, &v) in g.iter().enumerate() {
        if v < 0 {
            return Err(Error::NegativeEntry {
                row: idx % g.nrows(),
                col: idx / g.nrows(),
                value: v,
            });
        }
    }
    for i in 0..g.nrows() {
        if g.row(i).iter().all(|&x| x == 0) {
            return Err(Error::Degenerate(format!("row {i} is zero")));
        }
    }
    for j in 0..g.ncols() {
        if g.column(j).iter().all(|&x| x == 0) {
            return Err(Error::Degenerate(format!("column {j} is zero")));
        }
    }
    Ok(())
}

/// Every nonzero pair `(h, k)` with `h_i k_j <= G_ij`.
fn pieces(g: &IntMatrix) -> Vec<Piece> {
    let (m, n) = g.shape();
    let row_max: Vec<i64> = (0..m).map(|i| g.row(i).max()).collect();
    let mut out = Vec::new();
    let mut h = vec![0i64; m];
    loop {
        // advance h as a mixed-radix counter
        let mut i = 0;
        while i < m {
            if h[i] < row_max[i] {
                h[i] += 1;
                break;
            }
            h[i] = 0;
            i += 1;
        }
        if i == m {
            break;
        }
        let bound: Vec<i64> = (0..n)
            .map(|j| (0..m).filter(|&i| h[i] > 0).map(|i| g[(i, j)] / h[i]).min().unwrap_or(0))
            .collect();
        let mut k = vec![0i64; n];
        loop {
            let mut j = 0;
            while j < n {
                if k[j] < bound[j] {
                    k[j] += 1;
                    break;
                }
                k[j] = 0;
                j += 1;
            }
            if j == n {
                break;
            }
            out.push((h.clone(), k.clone()));
        }
    }
    out.sort();
    out
}

fn first_nonzero(r: &IntMatrix) -> Option<(usize, usize)> {
    (0..r.nrows()).flat_map(|i| (0..r.ncols()).map(move |j| (i, j))).find(|&(i, j)| r[(i, j)] > 0)
}

fn search(r: &mut IntMatrix, all: &[Piece], chosen: &mut Vec<usize>, found: &mut BTreeSet<Vec<usize>>) {
    let Some((i, j)) = first_nonzero(r) else {
        let mut key = chosen.clone();
        key.sort_unstable();
        found.insert(key);
        return;
    };
    for (idx, (h, k)) in all.iter().enumerate() {
        if h[i] == 0 || k[j] == 0 {
            continue;
        }
        let fits = h.iter().enumerate().all(|(a, &ha)| {
            ha == 0 || k.iter().enumerate().all(|(b, &kb)| ha * kb <= r[(a, b)])
        });
        if !fits {
            continue;
        }
        apply(r, h, k, -1);
        chosen.push(idx);
        search(r, all, chosen, found);
        chosen.pop();
        apply(r, h, k, 1);
    }
}

fn apply(r: &mut IntMatrix, h: &[i64], k: &[i64], sign: i64) {
    for (a, &ha) in h.iter().enumerate() {
        for (b, &kb) in k.iter().enumerate() {
            r[(a, b)] += sign * ha * kb;
        }
    }
}

/// All factorizations of `G`, one per middle-permutation class, in canonical
/// form (pieces sorted), ordered by `q` and then lexicographically.
pub fn enumerate_factorizations(g: &IntMatrix) -> Result<Vec<Factorization>> {
    check_input(g)?;
    let all = pieces(g);
    let mut found = BTreeSet::new();
    let mut r = g.clone();
    search(&mut r, &all, &mut Vec::new(), &mut found);
    let mut out: Vec<(usize, Vec<Piece>)> = found
        .into_iter()
        .map(|key| {
            let ps: Vec<Piece> = key.iter().map(|&i| all[i].clone()).collect();
            (ps.len(), ps)
        })
        .collect();
    out.sort();
    Ok(out.iter().map(|(_, ps)| Factorization::from_pieces(ps, g.nrows())).collect())
}

/// Total number of labeled factorizations (no identification of middle
/// permutations).
pub fn raw_count(fs: &[Factorization]) -> u128 {
    fs.iter().map(|f| f.labeled_count()).sum()
}

/// Factorizations whose first factor has `|‖H‖² - target| <= tol`.
pub fn screen_intermediate(g: &IntMatrix, target_norm_sq: f64, tol: f64) -> Result<Vec<Factorization>> {
    Ok(enumerate_factorizations(g)?
        .into_iter()
        .filter(|f| {
            let n = operator_norm(&f.h_matrix());
            (n * n - target_norm_sq).abs() <= tol
        })
        .collect())
}

impl Factorization {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "q": self.q,
            "H": self.h,
            "K": self.k,
            "H_norm_sq": operator_norm(&self.h_matrix()).powi(2),
        })
    }

    pub fn product(&self) -> IntMatrix {
        self.h_matrix() * self.k_matrix()
    }

    pub fn product_rows(&self) -> Vec<Vec<i64>> {
        matrix_rows(&self.product())
    }
}
