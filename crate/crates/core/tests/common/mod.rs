#![allow(dead_code, clippy::needless_range_loop)]

pub mod factorization_oracle;
pub mod fusion_oracle;

use commsq::graph::{BipartiteGraph, IntMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `||A||` by power iteration on `A^t A`, independent of the library solver.
pub fn power_norm(a: &IntMatrix) -> f64 {
    let (m, n) = a.shape();
    let mut x = vec![1.0f64; n];
    let mut lam = 0.0;
    for _ in 0..200_000 {
        let y: Vec<f64> = (0..m).map(|i| (0..n).map(|j| a[(i, j)] as f64 * x[j]).sum()).collect();
        // shift by 1 so that the iteration never oscillates
        let z: Vec<f64> = (0..n)
            .map(|j| (0..m).map(|i| a[(i, j)] as f64 * y[i]).sum::<f64>() + x[j])
            .collect();
        let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let next = nz / x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = z.iter().map(|v| v / nz).collect();
        if (next - lam).abs() < 1e-15 * next {
            lam = next;
            break;
        }
        lam = next;
    }
    (lam - 1.0).sqrt()
}

/// Path with `n` vertices as a bipartite graph.
pub fn path(n: usize) -> BipartiteGraph {
    let left: Vec<usize> = (0..n).step_by(2).collect();
    let right: Vec<usize> = (1..n).step_by(2).collect();
    let adj: Vec<Vec<i64>> = left
        .iter()
        .map(|&a| right.iter().map(|&b| i64::from(a.abs_diff(b) == 1)).collect())
        .collect();
    let ll: Vec<String> = left.iter().map(|i| format!("v{i}")).collect();
    let rl: Vec<String> = right.iter().map(|i| format!("v{i}")).collect();
    BipartiteGraph::from_adjacency(&ll, &rl, &adj).unwrap()
}

/// Random connected bipartite multigraph: a random spanning tree plus extra
/// edges, entries at most `max_mult`.
pub fn random_connected(rng: &mut ChaCha8Rng, m: usize, n: usize, extra: usize, max_mult: i64) -> IntMatrix {
    let mut a = IntMatrix::zeros(m, n);
    let mut in_tree = vec![(true, 0usize)];
    let mut rest: Vec<(bool, usize)> = (1..m).map(|i| (true, i)).chain((0..n).map(|j| (false, j))).collect();
    while !rest.is_empty() {
        let pick = rng.random_range(0..rest.len());
        let (side, v) = rest[pick];
        let partners: Vec<usize> = in_tree.iter().filter(|(s, _)| *s != side).map(|&(_, u)| u).collect();
        if partners.is_empty() {
            continue;
        }
        let u = partners[rng.random_range(0..partners.len())];
        if side {
            a[(v, u)] = 1;
        } else {
            a[(u, v)] = 1;
        }
        in_tree.push(rest.swap_remove(pick));
    }
    for _ in 0..extra {
        let (i, j) = (rng.random_range(0..m), rng.random_range(0..n));
        a[(i, j)] = (a[(i, j)] + 1).min(max_mult);
    }
    a
}
