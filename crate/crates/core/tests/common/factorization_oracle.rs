use std::collections::BTreeSet;

use commsq::graph::IntMatrix;

pub type Piece = (Vec<i64>, Vec<i64>);

/// Every rank-one piece `h k^t <= G` with both factors nonzero.
pub fn oracle_pieces(g: &IntMatrix) -> Vec<Piece> {
    let (m, n) = g.shape();
    let top = *g.iter().max().unwrap();
    let vectors = |len: usize| -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|v| (0..=top).map(move |x| [v.clone(), vec![x]].concat()))
                .collect();
        }
        out.retain(|v| v.iter().any(|&x| x > 0));
        out
    };
    let mut out = Vec::new();
    for h in vectors(m) {
        for k in vectors(n) {
            if (0..m).all(|i| (0..n).all(|j| h[i] * k[j] <= g[(i, j)])) {
                out.push((h.clone(), k));
            }
        }
    }
    out
}

/// Multisets of pieces summing to `G`, by choosing a multiplicity for each
/// piece in turn.
pub fn oracle_classes(g: &IntMatrix) -> BTreeSet<Vec<Piece>> {
    fn rec(idx: usize, rest: &IntMatrix, ps: &[Piece], cur: &mut Vec<Piece>, out: &mut BTreeSet<Vec<Piece>>) {
        if rest.iter().all(|&x| x == 0) {
            let mut c = cur.clone();
            c.sort();
            out.insert(c);
            return;
        }
        if idx == ps.len() {
            return;
        }
        rec(idx + 1, rest, ps, cur, out);
        let (h, k) = &ps[idx];
        let mut r = rest.clone();
        let mut pushed = 0;
        loop {
            let mut ok = true;
            for (i, &hi) in h.iter().enumerate() {
                for (j, &kj) in k.iter().enumerate() {
                    r[(i, j)] -= hi * kj;
                    ok &= r[(i, j)] >= 0;
                }
            }
            if !ok {
                break;
            }
            cur.push(ps[idx].clone());
            pushed += 1;
            rec(idx + 1, &r, ps, cur, out);
        }
        cur.truncate(cur.len() - pushed);
    }
    let ps = oracle_pieces(g);
    let mut out = BTreeSet::new();
    rec(0, g, &ps, &mut Vec::new(), &mut out);
    out
}

/// All `m x n` matrices with entry sum at most `max_sum` and no zero line.
pub fn small_matrices(m: usize, n: usize, max_sum: i64) -> Vec<IntMatrix> {
    fn rec(pos: usize, left: i64, cur: &mut Vec<i64>, m: usize, n: usize, out: &mut Vec<IntMatrix>) {
        if pos == m * n {
            let g = IntMatrix::from_row_slice(m, n, cur);
            if (0..m).all(|i| g.row(i).iter().any(|&x| x > 0)) && (0..n).all(|j| g.column(j).iter().any(|&x| x > 0)) {
                out.push(g);
            }
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(pos + 1, left - x, cur, m, n, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, max_sum, &mut Vec::new(), m, n, &mut out);
    out
}
