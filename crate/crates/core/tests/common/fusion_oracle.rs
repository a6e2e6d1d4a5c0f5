use std::collections::BTreeSet;

use commsq::fusion::{FusionRing, MultMap};

/// Coefficients of `x y` in a ring given by its structure constants.
pub fn mul(r: &FusionRing, x: &[i64], y: &[i64]) -> Vec<i64> {
    let n = r.rank();
    let mut out = vec![0; n];
    for a in 0..n {
        for b in 0..n {
            if x[a] * y[b] != 0 {
                for (c, o) in out.iter_mut().enumerate() {
                    *o += x[a] * y[b] * r.n(a, b, c);
                }
            }
        }
    }
    out
}

pub fn e(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

pub fn hom(x: &[i64], y: &[i64]) -> i64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Checks a regular-triple assignment against the conditions computed
/// directly from the ring multiplication.
pub fn oracle_accepts(r: &FusionRing, v: &[Vec<Vec<i64>>]) -> bool {
    let n = r.rank();
    let d = |i: usize| r.dual[i];
    let b = |i: usize| e(n, i);
    for i in 0..n {
        for j in 0..n {
            let dim: f64 = v[i][j].iter().zip(&r.dims).map(|(&c, x)| c as f64 * x).sum();
            if (dim - r.dims[i] * r.dims[j]).abs() > 1e-9 {
                return false;
            }
        }
    }
    for i1 in 0..n {
        for j1 in 0..n {
            for i2 in 0..n {
                for j2 in 0..n {
                    let (v1, v2) = (&v[i1][j1], &v[i2][j2]);
                    let xx = mul(r, &b(d(i1)), &b(i2));
                    let yy = mul(r, &b(j1), &b(d(j2)));
                    if hom(v1, v2) != hom(&xx, &yy) {
                        return false;
                    }
                    let lhs_c = mul(r, &mul(r, &b(i1), &yy), &b(d(i2)));
                    let lhs_cp = mul(r, &mul(r, &b(d(j1)), &xx), &b(j2));
                    for lam in 0..n {
                        let mut rc = 0;
                        let mut rcp = 0;
                        for k1 in 0..n {
                            for k2 in 0..n {
                                let w = v1[k1] * v2[k2];
                                if w != 0 {
                                    rc += w * r.n(k1, d(k2), lam);
                                    rcp += w * r.n(d(k1), k2, lam);
                                }
                            }
                        }
                        if lhs_c[lam] != rc || lhs_cp[lam] != rcp {
                            return false;
                        }
                    }
                }
            }
        }
    }
    // (xi rho) eta = xi (rho eta), lambda (xi eta) = (lambda xi) eta, (xi eta) kappa = xi (eta kappa)
    let prod = |x: &[i64], y: &[i64]| -> Vec<i64> {
        let mut out = vec![0; n];
        for i in 0..n {
            for j in 0..n {
                if x[i] * y[j] != 0 {
                    for (o, c) in out.iter_mut().zip(&v[i][j]) {
                        *o += x[i] * y[j] * c;
                    }
                }
            }
        }
        out
    };
    for x in 0..n {
        for y in 0..n {
            for g in 0..n {
                if prod(&mul(r, &b(x), &b(g)), &b(y)) != prod(&b(x), &mul(r, &b(g), &b(y))) {
                    return false;
                }
                if mul(r, &b(g), &prod(&b(x), &b(y))) != prod(&mul(r, &b(g), &b(x)), &b(y)) {
                    return false;
                }
                if mul(r, &prod(&b(x), &b(y)), &b(g)) != prod(&b(x), &mul(r, &b(y), &b(g))) {
                    return false;
                }
            }
        }
    }
    true
}

/// Every assignment with entries bounded by the dimension condition.
pub fn brute_force(r: &FusionRing) -> BTreeSet<MultMap> {
    let n = r.rank();
    let per_pair: Vec<Vec<Vec<i64>>> = (0..n * n)
        .map(|p| {
            let target = r.dims[p / n] * r.dims[p % n];
            let mut out = vec![vec![]];
            for k in 0..n {
                let bound = (target / r.dims[k] + 1e-9).floor() as i64;
                out = out
                    .into_iter()
                    .flat_map(|v: Vec<i64>| (0..=bound).map(move |c| [v.clone(), vec![c]].concat()))
                    .collect();
            }
            out.retain(|v| {
                let dim: f64 = v.iter().zip(&r.dims).map(|(&c, x)| c as f64 * x).sum();
                (dim - target).abs() < 1e-9
            });
            out
        })
        .collect();
    let total: usize = per_pair.iter().map(|c| c.len()).product();
    assert!(total <= 1_000_000, "search space {total}");
    let mut found = BTreeSet::new();
    let mut idx = vec![0usize; n * n];
    loop {
        let v: Vec<Vec<Vec<i64>>> = (0..n)
            .map(|i| (0..n).map(|j| per_pair[i * n + j][idx[i * n + j]].clone()).collect())
            .collect();
        if oracle_accepts(r, &v) {
            found.insert(MultMap { v });
        }
        let mut p = 0;
        loop {
            if p == idx.len() {
                return found;
            }
            idx[p] += 1;
            if idx[p] < per_pair[p].len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}
