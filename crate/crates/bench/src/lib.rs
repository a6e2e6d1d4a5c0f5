//! Shared fixtures for the benchmarks.

use commsq::fusion::{FusionRing, Triple};
use commsq::{make_star, BipartiteGraph, IntMatrix};

/// Star with four arms of length three.
pub fn star3333() -> IntMatrix {
    make_star(&[3, 3, 3, 3]).unwrap().adjacency
}

/// Stars with growing arms, for the spectral kernel.
pub fn stars() -> Vec<(usize, BipartiteGraph)> {
    [2, 8, 32].into_iter().map(|k| (k, make_star(&[k, k, k, k]).unwrap())).collect()
}

pub fn regular_triple(name: &str) -> Triple {
    Triple::regular(&FusionRing::builtin(name).unwrap()).unwrap()
}
