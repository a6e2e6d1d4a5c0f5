//! Commuting squares of finite-dimensional C*-algebras: graphs, connections,
//! explicit examples, a four-star family, norm factorizations and fusion
//! bimodules.

pub mod catalog;
pub mod completion;
pub mod connection;
pub mod error;
pub mod factorization;
pub mod fourstar;
pub mod fusion;
pub mod graph;

pub use connection::{
    block_layout, check_nondegenerate, complete_orthonormal, verify, weight, CMatrix, Cell,
    Connection, PfData, Side, SquareShape, VerificationReport,
};
pub use error::{Error, Result};
pub use graph::{make_star, operator_norm, spectral, BipartiteGraph, IntMatrix, SpectralData};
