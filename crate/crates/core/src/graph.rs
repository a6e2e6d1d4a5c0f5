//! Bipartite inclusion graphs and their Perron-Frobenius data.

use std::collections::{HashSet, VecDeque};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type IntMatrix = DMatrix<i64>;

/// Build an integer matrix from row vectors.
pub fn int_matrix(rows: &[Vec<i64>]) -> Result<IntMatrix> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("ragged rows".into()));
    }
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

pub fn matrix_rows(m: &IntMatrix) -> Vec<Vec<i64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    pub left_labels: Vec<String>,
    pub right_labels: Vec<String>,
    pub adjacency: IntMatrix,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    left: Vec<String>,
    right: Vec<String>,
    adj: Vec<Vec<i64>>,
}

fn check_unique(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl BipartiteGraph {
    pub fn from_adjacency<S: AsRef<str>>(
        left_labels: &[S],
        right_labels: &[S],
        matrix: &[Vec<i64>],
    ) -> Result<Self> {
        let left: Vec<String> = left_labels.iter().map(|s| s.as_ref().to_string()).collect();
        let right: Vec<String> = right_labels.iter().map(|s| s.as_ref().to_string()).collect();
        if matrix.len() != left.len() {
            return Err(Error::Dimension(format!(
                "{} rows for {} left labels",
                matrix.len(),
                left.len()
            )));
        }
        for row in matrix {
            if row.len() != right.len() {
                return Err(Error::Dimension(format!(
                    "row of length {} for {} right labels",
                    row.len(),
                    right.len()
                )));
            }
        }
        check_unique(&left)?;
        check_unique(&right)?;
        for (i, row) in matrix.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < 0 {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v });
                }
            }
        }
        if matrix.iter().all(|r| r.iter().all(|&v| v == 0)) {
            return Err(Error::ZeroMatrix);
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.iter().all(|&v| v == 0) {
                return Err(Error::IsolatedVertex(left[i].clone()));
            }
        }
        for j in 0..right.len() {
            if matrix.iter().all(|r| r[j] == 0) {
                return Err(Error::IsolatedVertex(right[j].clone()));
            }
        }
        Ok(BipartiteGraph {
            adjacency: int_matrix(matrix)?,
            left_labels: left,
            right_labels: right,
        })
    }

    /// Graph with generated labels `l0..`, `r0..`.
    pub fn from_matrix(matrix: &[Vec<i64>]) -> Result<Self> {
        let m = matrix.len();
        let n = matrix.first().map_or(0, |r| r.len());
        let left: Vec<String> = (0..m).map(|i| format!("l{i}")).collect();
        let right: Vec<String> = (0..n).map(|j| format!("r{j}")).collect();
        Self::from_adjacency(&left, &right, matrix)
    }

    pub fn left_index(&self, name: &str) -> Option<usize> {
        self.left_labels.iter().position(|l| l == name)
    }

    pub fn right_index(&self, name: &str) -> Option<usize> {
        self.right_labels.iter().position(|l| l == name)
    }

    pub fn transpose(&self) -> BipartiteGraph {
        BipartiteGraph {
            left_labels: self.right_labels.clone(),
            right_labels: self.left_labels.clone(),
            adjacency: self.adjacency.transpose(),
        }
    }

    /// Connected components as label lists (left vertices first in each).
    pub fn components(&self) -> Vec<Vec<String>> {
        let (m, n) = self.adjacency.shape();
        let mut seen = vec![false; m + n];
        let mut out = Vec::new();
        for start in 0..m + n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let nbrs: Vec<usize> = if v < m {
                    (0..n).filter(|&j| self.adjacency[(v, j)] != 0).map(|j| m + j).collect()
                } else {
                    (0..m).filter(|&i| self.adjacency[(i, v - m)] != 0).collect()
                };
                for w in nbrs {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(
                comp.into_iter()
                    .map(|v| {
                        if v < m {
                            self.left_labels[v].clone()
                        } else {
                            self.right_labels[v - m].clone()
                        }
                    })
                    .collect(),
            );
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Operator norm of the adjacency matrix (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        operator_norm(&self.adjacency)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(GraphJson {
            left: self.left_labels.clone(),
            right: self.right_labels.clone(),
            adj: matrix_rows(&self.adjacency),
        })
        .expect("graph serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let g: GraphJson = serde_json::from_value(value.clone())?;
        Self::from_adjacency(&g.left, &g.right, &g.adj)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n  rankdir=LR;\n");
        s.push_str("  subgraph left { rank=same;");
        for l in &self.left_labels {
            s.push_str(&format!(" \"{l}\";"));
        }
        s.push_str(" }\n  subgraph right { rank=same;");
        for r in &self.right_labels {
            s.push_str(&format!(" \"{r}\";"));
        }
        s.push_str(" }\n");
        for (i, l) in self.left_labels.iter().enumerate() {
            for (j, r) in self.right_labels.iter().enumerate() {
                for _ in 0..self.adjacency[(i, j)] {
                    s.push_str(&format!("  \"{l}\" -- \"{r}\";\n"));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

pub fn operator_norm(a: &IntMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let f = a.map(|v| v as f64);
    let ata = f.transpose() * &f;
    let eig = SymmetricEigen::new(ata);
    eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt()
}

fn arm_name(arm: usize) -> String {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    if arm < LETTERS.len() {
        (LETTERS[arm] as char).to_string()
    } else {
        format!("x{arm}_")
    }
}

/// The star `S(k_1, ..., k_m)`: center `A`, arm `x` has vertices `x1, x2, ...`
/// outward. Even-depth vertices (the center included) form the left side.
pub fn make_star(arm_lengths: &[usize]) -> Result<BipartiteGraph> {
    if arm_lengths.is_empty() {
        return Err(Error::Empty("star needs at least one arm".into()));
    }
    if arm_lengths.contains(&0) {
        return Err(Error::Empty("arm of length zero".into()));
    }
    let mut left = vec!["A".to_string()];
    let mut right = Vec::new();
    let mut edges = Vec::new();
    for (a, &len) in arm_lengths.iter().enumerate() {
        let base = arm_name(a);
        let mut prev = "A".to_string();
        for d in 1..=len {
            let name = format!("{base}{d}");
            if d % 2 == 0 {
                left.push(name.clone());
            } else {
                right.push(name.clone());
            }
            edges.push((prev.clone(), name.clone(), d % 2 == 1));
            prev = name;
        }
    }
    let mut adj = vec![vec![0i64; right.len()]; left.len()];
    for (x, y, y_right) in edges {
        let (b, w) = if y_right { (x, y) } else { (y, x) };
        let i = left.iter().position(|l| *l == b).expect("left vertex");
        let j = right.iter().position(|r| *r == w).expect("right vertex");
        adj[i][j] += 1;
    }
    BipartiteGraph::from_adjacency(&left, &right, &adj)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub norm: f64,
    pub pf_left: Vec<f64>,
    pub pf_right: Vec<f64>,
    pub residual: f64,
}

/// How to scale the Perron-Frobenius vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Anchor {
    /// Largest entry of the left vector gets this value.
    MaxLeft(f64),
    /// A named vertex (on either side) gets this value.
    Vertex(String, f64),
}

impl Default for Anchor {
    fn default() -> Self {
        Anchor::MaxLeft(1.0)
    }
}

pub const SPECTRAL_TOL: f64 = 1e-12;

pub fn spectral(graph: &BipartiteGraph, tolerance: f64) -> Result<SpectralData> {
    spectral_anchored(graph, tolerance, &Anchor::default())
}

/// Perron-Frobenius data with `A r = norm l` and `A^t l = norm r`.
pub fn spectral_anchored(
    graph: &BipartiteGraph,
    tolerance: f64,
    anchor: &Anchor,
) -> Result<SpectralData> {
    let comps = graph.components();
    if comps.len() > 1 {
        return Err(Error::Disconnected(comps));
    }
    let a = graph.adjacency.map(|v| v as f64);
    let (m, n) = a.shape();
    let mut block = DMatrix::<f64>::zeros(m + n, m + n);
    block.view_mut((0, m), (m, n)).copy_from(&a);
    block.view_mut((m, 0), (n, m)).copy_from(&a.transpose());
    let eig = SymmetricEigen::new(block);
    let (top, &norm) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty");
    let v = eig.eigenvectors.column(top);
    let mut left: Vec<f64> = (0..m).map(|i| v[i].abs()).collect();
    let mut right: Vec<f64> = (0..n).map(|j| v[m + j].abs()).collect();
    let scale = match anchor {
        Anchor::MaxLeft(value) => value / left.iter().cloned().fold(0.0, f64::max),
        Anchor::Vertex(name, value) => {
            if let Some(i) = graph.left_index(name) {
                value / left[i]
            } else if let Some(j) = graph.right_index(name) {
                value / right[j]
            } else {
                return Err(Error::UnknownVertex(name.clone()));
            }
        }
    };
    left.iter_mut().for_each(|x| *x *= scale);
    right.iter_mut().for_each(|x| *x *= scale);
    let mut data = SpectralData { norm, pf_left: left, pf_right: right, residual: 0.0 };
    data.residual = eigen_residual(&graph.adjacency, &data);
    let rel = data.residual / data.pf_left.iter().cloned().fold(1.0, f64::max);
    if rel > tolerance.max(1e-15) {
        return Err(Error::NoConvergence { tol: tolerance, residual: data.residual });
    }
    Ok(data)
}

fn eigen_residual(adj: &IntMatrix, s: &SpectralData) -> f64 {
    let (m, n) = adj.shape();
    let mut r: f64 = 0.0;
    for i in 0..m {
        let acc: f64 = (0..n).map(|j| adj[(i, j)] as f64 * s.pf_right[j]).sum();
        r = r.max((acc - s.norm * s.pf_left[i]).abs());
    }
    for j in 0..n {
        let acc: f64 = (0..m).map(|i| adj[(i, j)] as f64 * s.pf_left[i]).sum();
        r = r.max((acc - s.norm * s.pf_right[j]).abs());
    }
    r
}

/// Which side of a trace-weight vector is obtained by summing the other side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceRule {
    /// `left = A right`, `A^t left = norm^2 right`.
    LeftIsSum,
    /// `right = A^t left`, `A right = norm^2 left`.
    RightIsSum,
}

impl SpectralData {
    /// Markov trace weights: the unnormalized convention in which one side is
    /// the adjacency sum of the other. Returned vectors share the scale of
    /// `self` on the summed-over side.
    pub fn trace_weights(&self, rule: TraceRule) -> (Vec<f64>, Vec<f64>) {
        match rule {
            TraceRule::LeftIsSum => (
                self.pf_left.iter().map(|x| x * self.norm).collect(),
                self.pf_right.clone(),
            ),
            TraceRule::RightIsSum => (
                self.pf_left.clone(),
                self.pf_right.iter().map(|x| x * self.norm).collect(),
            ),
        }
    }

    pub fn index(&self) -> f64 {
        self.norm * self.norm
    }
}

/// Rows or columns for the irreducibility bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lines {
    #[default]
    Rows,
    Columns,
}

/// Square of the smallest line 1-norm over both matrices.
pub fn wenzl_bound(g: &IntMatrix, l: &IntMatrix, lines: Lines) -> u64 {
    let line_norms = |m: &IntMatrix| -> Vec<u64> {
        match lines {
            Lines::Rows => (0..m.nrows())
                .map(|i| m.row(i).iter().map(|v| v.unsigned_abs()).sum())
                .collect(),
            Lines::Columns => (0..m.ncols())
                .map(|j| m.column(j).iter().map(|v| v.unsigned_abs()).sum())
                .collect(),
        }
    };
    let min = line_norms(g)
        .into_iter()
        .chain(line_norms(l))
        .min()
        .unwrap_or(0);
    min * min
}
