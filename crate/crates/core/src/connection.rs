//! Commuting-square shapes, block layouts of connections, the bi-dual
//! transform and unitarity checks.
//!
//! Orientation: `G` is `P x Q` (left vertical), `H` is `P x R` (bottom),
//! `K` is `Q x S` (top) and `L` is `R x S` (right vertical), where `P, Q, R,
//! S` are the central projections of the four corner algebras `(0,0)`,
//! `(1,0)`, `(0,1)`, `(1,1)`. Two-step paths from `p` to `s` are counted by
//! `GK = HL`; from `q` to `r` by `G^t H = K L^t`.
//!
//! A cell of the square is a cycle `p -g- q -k- s -l- r -h- p` with one edge
//! chosen in each graph. The `u` block at `(p,s)` has rows `(q,g,k)` and
//! columns `(r,h,l)`; the `v` block at `(q,r)` has rows `(p,g,h)` and columns
//! `(s,k,l)`, and `v[(p,g,h),(s,k,l)] = w(p,q,r,s) * conj(u[(q,g,k),(r,h,l)])`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{int_matrix, matrix_rows, spectral, BipartiteGraph, IntMatrix, SPECTRAL_TOL};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const VERIFY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SquareShape {
    pub g: IntMatrix,
    pub h: IntMatrix,
    pub k: IntMatrix,
    pub l: IntMatrix,
    pub p_labels: Vec<String>,
    pub q_labels: Vec<String>,
    pub r_labels: Vec<String>,
    pub s_labels: Vec<String>,
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

impl SquareShape {
    pub fn new(g: IntMatrix, h: IntMatrix, k: IntMatrix, l: IntMatrix) -> Result<Self> {
        let (np, nq) = g.shape();
        let nr = h.ncols();
        let ns = k.ncols();
        Self::with_labels(
            g,
            h,
            k,
            l,
            labels("p", np),
            labels("q", nq),
            labels("r", nr),
            labels("s", ns),
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_labels(
        g: IntMatrix,
        h: IntMatrix,
        k: IntMatrix,
        l: IntMatrix,
        p_labels: Vec<String>,
        q_labels: Vec<String>,
        r_labels: Vec<String>,
        s_labels: Vec<String>,
    ) -> Result<Self> {
        let shape = SquareShape { g, h, k, l, p_labels, q_labels, r_labels, s_labels };
        shape.check_dims()?;
        Ok(shape)
    }

    pub fn from_rows(
        g: &[Vec<i64>],
        h: &[Vec<i64>],
        k: &[Vec<i64>],
        l: &[Vec<i64>],
    ) -> Result<Self> {
        Self::new(int_matrix(g)?, int_matrix(h)?, int_matrix(k)?, int_matrix(l)?)
    }

    fn check_dims(&self) -> Result<()> {
        let (np, nq) = self.g.shape();
        let (hp, nr) = self.h.shape();
        let (kq, ns) = self.k.shape();
        let (lr, ls) = self.l.shape();
        if hp != np || kq != nq || lr != nr || ls != ns {
            return Err(Error::Dimension(format!(
                "G {np}x{nq}, H {hp}x{nr}, K {kq}x{ns}, L {lr}x{ls}"
            )));
        }
        let lens = [
            (self.p_labels.len(), np, "P"),
            (self.q_labels.len(), nq, "Q"),
            (self.r_labels.len(), nr, "R"),
            (self.s_labels.len(), ns, "S"),
        ];
        for (got, want, side) in lens {
            if got != want {
                return Err(Error::Dimension(format!("{got} labels for {want} {side} vertices")));
            }
        }
        Ok(())
    }

    pub fn np(&self) -> usize {
        self.g.nrows()
    }
    pub fn nq(&self) -> usize {
        self.g.ncols()
    }
    pub fn nr(&self) -> usize {
        self.h.ncols()
    }
    pub fn ns(&self) -> usize {
        self.k.ncols()
    }

    pub fn p_index(&self, name: &str) -> Result<usize> {
        find(&self.p_labels, name)
    }
    pub fn q_index(&self, name: &str) -> Result<usize> {
        find(&self.q_labels, name)
    }
    pub fn r_index(&self, name: &str) -> Result<usize> {
        find(&self.r_labels, name)
    }
    pub fn s_index(&self, name: &str) -> Result<usize> {
        find(&self.s_labels, name)
    }

    /// Left vertical inclusion as a labeled graph.
    pub fn g_graph(&self) -> Result<BipartiteGraph> {
        BipartiteGraph::from_adjacency(&self.p_labels, &self.q_labels, &matrix_rows(&self.g))
    }

    /// Right vertical inclusion as a labeled graph.
    pub fn l_graph(&self) -> Result<BipartiteGraph> {
        BipartiteGraph::from_adjacency(&self.r_labels, &self.s_labels, &matrix_rows(&self.l))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "G": matrix_rows(&self.g),
            "H": matrix_rows(&self.h),
            "K": matrix_rows(&self.k),
            "L": matrix_rows(&self.l),
            "P": self.p_labels,
            "Q": self.q_labels,
            "R": self.r_labels,
            "S": self.s_labels,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        #[allow(non_snake_case)]
        struct Raw {
            G: Vec<Vec<i64>>,
            H: Vec<Vec<i64>>,
            K: Vec<Vec<i64>>,
            L: Vec<Vec<i64>>,
            P: Option<Vec<String>>,
            Q: Option<Vec<String>>,
            R: Option<Vec<String>>,
            S: Option<Vec<String>>,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        let g = int_matrix(&raw.G)?;
        let h = int_matrix(&raw.H)?;
        let k = int_matrix(&raw.K)?;
        let l = int_matrix(&raw.L)?;
        let (np, nq, nr, ns) = (g.nrows(), g.ncols(), h.ncols(), k.ncols());
        Self::with_labels(
            g,
            h,
            k,
            l,
            raw.P.unwrap_or_else(|| labels("p", np)),
            raw.Q.unwrap_or_else(|| labels("q", nq)),
            raw.R.unwrap_or_else(|| labels("r", nr)),
            raw.S.unwrap_or_else(|| labels("s", ns)),
        )
    }
}

fn find(labels: &[String], name: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == name)
        .ok_or_else(|| Error::UnknownVertex(name.to_string()))
}

/// Exact check of `GK = HL` and `G^t H = K L^t`.
pub fn check_nondegenerate(shape: &SquareShape) -> Result<bool> {
    shape.check_dims()?;
    let gk = &shape.g * &shape.k;
    let hl = &shape.h * &shape.l;
    let gth = shape.g.transpose() * &shape.h;
    let klt = &shape.k * shape.l.transpose();
    Ok(gk == hl && gth == klt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    U,
    V,
}

/// One row or column index of a block: an intermediate vertex together with
/// the two edges used to reach it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathIndex {
    pub mid: usize,
    pub e1: usize,
    pub e2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// `(p, s)` for `u`, `(q, r)` for `v`.
    pub outer: (usize, usize),
    pub rows: Vec<PathIndex>,
    pub cols: Vec<PathIndex>,
}

impl Cell {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Row and column positions of the sub-block through `(row_mid, col_mid)`.
    pub fn sub(&self, row_mid: usize, col_mid: usize) -> (Vec<usize>, Vec<usize>) {
        let ri = self.rows.iter().enumerate().filter(|(_, x)| x.mid == row_mid).map(|(i, _)| i);
        let ci = self.cols.iter().enumerate().filter(|(_, x)| x.mid == col_mid).map(|(j, _)| j);
        (ri.collect(), ci.collect())
    }

    /// Intermediate pairs with their sub-block dimensions.
    pub fn intermediates(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut mids_r: Vec<usize> = self.rows.iter().map(|x| x.mid).collect();
        mids_r.dedup();
        let mut mids_c: Vec<usize> = self.cols.iter().map(|x| x.mid).collect();
        mids_c.dedup();
        let mut out = Vec::new();
        for &a in &mids_r {
            for &b in &mids_c {
                let (ri, ci) = self.sub(a, b);
                out.push(((a, b), (ri.len(), ci.len())));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub side: Side,
    pub cells: Vec<Cell>,
}

impl BlockLayout {
    pub fn find(&self, outer: (usize, usize)) -> Option<usize> {
        self.cells.iter().position(|c| c.outer == outer)
    }

    /// Histogram of block sizes, largest first.
    pub fn size_counts(&self) -> Vec<(usize, usize)> {
        let mut sizes: Vec<usize> = self.cells.iter().map(|c| c.size()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let mut out: Vec<(usize, usize)> = Vec::new();
        for s in sizes {
            match out.last_mut() {
                Some((sz, n)) if *sz == s => *n += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }
}

fn at(m: &IntMatrix, i: usize, j: usize) -> usize {
    m[(i, j)] as usize
}

pub fn block_layout(shape: &SquareShape, side: Side) -> Result<BlockLayout> {
    if !check_nondegenerate(shape)? {
        return Err(Error::Degenerate("GK != HL or G^t H != K L^t".into()));
    }
    let (g, h, k, l) = (&shape.g, &shape.h, &shape.k, &shape.l);
    let mut cells = Vec::new();
    match side {
        Side::U => {
            for p in 0..shape.np() {
                for s in 0..shape.ns() {
                    let mut rows = Vec::new();
                    for q in 0..shape.nq() {
                        for e1 in 0..at(g, p, q) {
                            for e2 in 0..at(k, q, s) {
                                rows.push(PathIndex { mid: q, e1, e2 });
                            }
                        }
                    }
                    let mut cols = Vec::new();
                    for r in 0..shape.nr() {
                        for e1 in 0..at(h, p, r) {
                            for e2 in 0..at(l, r, s) {
                                cols.push(PathIndex { mid: r, e1, e2 });
                            }
                        }
                    }
                    if !rows.is_empty() {
                        cells.push(Cell { outer: (p, s), rows, cols });
                    }
                }
            }
        }
        Side::V => {
            for q in 0..shape.nq() {
                for r in 0..shape.nr() {
                    let mut rows = Vec::new();
                    for p in 0..shape.np() {
                        for e1 in 0..at(g, p, q) {
                            for e2 in 0..at(h, p, r) {
                                rows.push(PathIndex { mid: p, e1, e2 });
                            }
                        }
                    }
                    let mut cols = Vec::new();
                    for s in 0..shape.ns() {
                        for e1 in 0..at(k, q, s) {
                            for e2 in 0..at(l, r, s) {
                                cols.push(PathIndex { mid: s, e1, e2 });
                            }
                        }
                    }
                    if !rows.is_empty() {
                        cells.push(Cell { outer: (q, r), rows, cols });
                    }
                }
            }
        }
    }
    Ok(BlockLayout { side, cells })
}

/// `sqrt(lambda(p) eta(s) / (lambda(q) eta(r)))`.
pub fn weight(lambda_p: f64, lambda_q: f64, eta_r: f64, eta_s: f64) -> Result<f64> {
    for x in [lambda_p, lambda_q, eta_r, eta_s] {
        if x.is_nan() || x <= 0.0 || !x.is_finite() {
            return Err(Error::Inconsistent(format!("non-positive weight entry {x}")));
        }
    }
    Ok((lambda_p * eta_s / (lambda_q * eta_r)).sqrt())
}

/// Perron-Frobenius data of the two vertical inclusions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfData {
    pub lambda_p: Vec<f64>,
    pub lambda_q: Vec<f64>,
    pub eta_r: Vec<f64>,
    pub eta_s: Vec<f64>,
}

impl PfData {
    /// Symmetric Perron-Frobenius vectors of `G` and `L`, each with largest
    /// left entry 1.
    pub fn from_shape(shape: &SquareShape) -> Result<Self> {
        let sg = spectral(&shape.g_graph()?, SPECTRAL_TOL)?;
        let sl = spectral(&shape.l_graph()?, SPECTRAL_TOL)?;
        Ok(PfData {
            lambda_p: sg.pf_left,
            lambda_q: sg.pf_right,
            eta_r: sl.pf_left,
            eta_s: sl.pf_right,
        })
    }

    pub fn weight(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        (self.lambda_p[p] * self.eta_s[s] / (self.lambda_q[q] * self.eta_r[r])).sqrt()
    }

    fn check(&self, shape: &SquareShape) -> Result<()> {
        let ok = self.lambda_p.len() == shape.np()
            && self.lambda_q.len() == shape.nq()
            && self.eta_r.len() == shape.nr()
            && self.eta_s.len() == shape.ns();
        let pos = self
            .lambda_p
            .iter()
            .chain(&self.lambda_q)
            .chain(&self.eta_r)
            .chain(&self.eta_s)
            .all(|x| *x > 0.0 && x.is_finite());
        if !ok {
            return Err(Error::Layout("PF vector lengths do not match the shape".into()));
        }
        if !pos {
            return Err(Error::Inconsistent("PF vectors must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub shape: SquareShape,
    pub layout_u: BlockLayout,
    pub layout_v: BlockLayout,
    pub u_blocks: Vec<CMatrix>,
    pub v_blocks: Vec<CMatrix>,
    pub pf: PfData,
}

/// Location of the `u` entry that a `v` entry is dual to.
fn u_position(
    lu: &BlockLayout,
    q: usize,
    r: usize,
    row: &PathIndex,
    col: &PathIndex,
) -> Option<(usize, usize, usize)> {
    let (p, g, h) = (row.mid, row.e1, row.e2);
    let (s, k, l) = (col.mid, col.e1, col.e2);
    let b = lu.find((p, s))?;
    let cell = &lu.cells[b];
    let i = cell.rows.iter().position(|x| *x == PathIndex { mid: q, e1: g, e2: k })?;
    let j = cell.cols.iter().position(|x| *x == PathIndex { mid: r, e1: h, e2: l })?;
    Some((b, i, j))
}

/// The `v` half determined by `u`.
pub fn dual_v(
    layout_u: &BlockLayout,
    layout_v: &BlockLayout,
    u_blocks: &[CMatrix],
    pf: &PfData,
) -> Result<Vec<CMatrix>> {
    let mut out = Vec::with_capacity(layout_v.cells.len());
    for cell in &layout_v.cells {
        let (q, r) = cell.outer;
        let n = cell.size();
        let mut m = CMatrix::zeros(n, n);
        for (a, row) in cell.rows.iter().enumerate() {
            for (b, col) in cell.cols.iter().enumerate() {
                let (bi, i, j) = u_position(layout_u, q, r, row, col)
                    .ok_or_else(|| Error::Layout(format!("no u entry for v cell {:?}", cell.outer)))?;
                let w = pf.weight(row.mid, q, r, col.mid);
                m[(a, b)] = u_blocks[bi][(i, j)].conj() * w;
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// The `u` half determined by `v` (inverse of [`dual_v`]).
pub fn dual_u(
    layout_u: &BlockLayout,
    layout_v: &BlockLayout,
    v_blocks: &[CMatrix],
    pf: &PfData,
) -> Result<Vec<CMatrix>> {
    let mut out: Vec<CMatrix> =
        layout_u.cells.iter().map(|c| CMatrix::zeros(c.size(), c.size())).collect();
    for (vb, cell) in layout_v.cells.iter().enumerate() {
        let (q, r) = cell.outer;
        for (a, row) in cell.rows.iter().enumerate() {
            for (b, col) in cell.cols.iter().enumerate() {
                let (bi, i, j) = u_position(layout_u, q, r, row, col)
                    .ok_or_else(|| Error::Layout(format!("no u entry for v cell {:?}", cell.outer)))?;
                let w = pf.weight(row.mid, q, r, col.mid);
                out[bi][(i, j)] = v_blocks[vb][(a, b)].conj() / w;
            }
        }
    }
    Ok(out)
}

fn check_blocks(layout: &BlockLayout, blocks: &[CMatrix]) -> Result<()> {
    if layout.cells.len() != blocks.len() {
        return Err(Error::Layout(format!(
            "{} blocks for {} cells",
            blocks.len(),
            layout.cells.len()
        )));
    }
    for (c, b) in layout.cells.iter().zip(blocks) {
        if b.nrows() != c.size() || b.ncols() != c.size() {
            return Err(Error::Layout(format!(
                "block {:?} is {}x{}, expected {}",
                c.outer,
                b.nrows(),
                b.ncols(),
                c.size()
            )));
        }
    }
    Ok(())
}

impl Connection {
    /// Complete a `u` half to a full connection through the bi-dual relation.
    pub fn bi_dual(shape: SquareShape, u_blocks: Vec<CMatrix>, pf: PfData) -> Result<Self> {
        pf.check(&shape)?;
        let layout_u = block_layout(&shape, Side::U)?;
        let layout_v = block_layout(&shape, Side::V)?;
        check_blocks(&layout_u, &u_blocks)?;
        let v_blocks = dual_v(&layout_u, &layout_v, &u_blocks, &pf)?;
        Ok(Connection { shape, layout_u, layout_v, u_blocks, v_blocks, pf })
    }

    /// Recompute `u` from the stored `v`.
    pub fn u_from_v(&self) -> Result<Vec<CMatrix>> {
        dual_u(&self.layout_u, &self.layout_v, &self.v_blocks, &self.pf)
    }

    pub fn u_block(&self, p: &str, s: &str) -> Result<&CMatrix> {
        let key = (self.shape.p_index(p)?, self.shape.s_index(s)?);
        let b = self
            .layout_u
            .find(key)
            .ok_or_else(|| Error::Layout(format!("no u block ({p},{s})")))?;
        Ok(&self.u_blocks[b])
    }

    pub fn v_block(&self, q: &str, r: &str) -> Result<&CMatrix> {
        let key = (self.shape.q_index(q)?, self.shape.r_index(r)?);
        let b = self
            .layout_v
            .find(key)
            .ok_or_else(|| Error::Layout(format!("no v block ({q},{r})")))?;
        Ok(&self.v_blocks[b])
    }

    pub fn cell_name(&self, side: Side, outer: (usize, usize)) -> String {
        let sh = &self.shape;
        match side {
            Side::U => format!("u({},{})", sh.p_labels[outer.0], sh.s_labels[outer.1]),
            Side::V => format!("v({},{})", sh.q_labels[outer.0], sh.r_labels[outer.1]),
        }
    }
}

/// `max |B* B - I|` and `max |B B* - I|`, whichever is larger.
pub fn unitarity_residual(b: &CMatrix) -> f64 {
    let n = b.nrows();
    let id = CMatrix::identity(n, n);
    let r1 = (b.adjoint() * b - &id).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let r2 = (b * b.adjoint() - &id).iter().map(|z| z.norm()).fold(0.0, f64::max);
    r1.max(r2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockResidual {
    pub side: Side,
    pub name: String,
    pub size: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub max_unitarity_residual_u: f64,
    pub max_unitarity_residual_v: f64,
    /// Largest deviation of the stored `v` from the dual of `u`.
    pub bi_dual_residual: f64,
    pub nondegenerate: bool,
    pub tolerance: f64,
    pub blocks: Vec<BlockResidual>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.nondegenerate
            && self.max_unitarity_residual_u <= self.tolerance
            && self.max_unitarity_residual_v <= self.tolerance
            && self.bi_dual_residual <= self.tolerance
    }

    pub fn worst_block(&self) -> Option<&BlockResidual> {
        self.blocks.iter().max_by(|a, b| a.residual.total_cmp(&b.residual))
    }
}

pub fn verify(conn: &Connection, tolerance: f64) -> VerificationReport {
    let mut blocks = Vec::new();
    let mut max_u: f64 = 0.0;
    let mut max_v: f64 = 0.0;
    for (c, b) in conn.layout_u.cells.iter().zip(&conn.u_blocks) {
        let r = unitarity_residual(b);
        max_u = max_u.max(r);
        blocks.push(BlockResidual {
            side: Side::U,
            name: conn.cell_name(Side::U, c.outer),
            size: c.size(),
            residual: r,
        });
    }
    for (c, b) in conn.layout_v.cells.iter().zip(&conn.v_blocks) {
        let r = unitarity_residual(b);
        max_v = max_v.max(r);
        blocks.push(BlockResidual {
            side: Side::V,
            name: conn.cell_name(Side::V, c.outer),
            size: c.size(),
            residual: r,
        });
    }
    let bi_dual_residual = match dual_v(&conn.layout_u, &conn.layout_v, &conn.u_blocks, &conn.pf) {
        Ok(v) => v
            .iter()
            .zip(&conn.v_blocks)
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    VerificationReport {
        max_unitarity_residual_u: max_u,
        max_unitarity_residual_v: max_v,
        bi_dual_residual,
        nondegenerate: check_nondegenerate(&conn.shape).unwrap_or(false),
        tolerance,
        blocks,
    }
}

const DEPENDENT: f64 = 1e-6;

fn project_out(v: &mut CVector, basis: &[CVector]) {
    // two passes keep the result orthogonal to working precision
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(v);
            v.axpy(-c, b, Complex64::new(1.0, 0.0));
        }
    }
}

/// Extend orthonormal rows to a unitary by Gram-Schmidt on the canonical
/// basis, taken in index order, skipping dependent candidates.
pub fn complete_orthonormal(rows: &[CVector], dim: usize) -> Result<CMatrix> {
    if rows.len() > dim {
        return Err(Error::Dimension(format!("{} rows in dimension {dim}", rows.len())));
    }
    for r in rows {
        if r.len() != dim {
            return Err(Error::Dimension(format!("row of length {} in dimension {dim}", r.len())));
        }
    }
    let mut dev: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((b.dotc(a) - Complex64::new(target, 0.0)).norm());
        }
    }
    if dev > 1e-12 {
        return Err(Error::NotOrthonormal(dev));
    }
    let mut basis: Vec<CVector> = rows.to_vec();
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = CVector::zeros(dim);
        v[e] = Complex64::new(1.0, 0.0);
        project_out(&mut v, &basis);
        let n = v.norm();
        if n > DEPENDENT {
            basis.push(v.unscale(n));
        }
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| basis[i][j]))
}

/// Real-valued convenience wrapper around [`complete_orthonormal`].
pub fn complete_orthonormal_real(rows: &[Vec<f64>], dim: usize) -> Result<CMatrix> {
    let rows: Vec<CVector> = rows
        .iter()
        .map(|r| CVector::from_iterator(r.len(), r.iter().map(|&x| Complex64::new(x, 0.0))))
        .collect();
    complete_orthonormal(&rows, dim)
}

pub fn real_matrix(rows: &[Vec<f64>]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j], 0.0))
}

fn fmt30(x: f64) -> String {
    format!("{x:.29e}")
}

impl Connection {
    pub fn to_json(&self) -> serde_json::Value {
        let blocks = |layout: &BlockLayout, bs: &[CMatrix], side: Side| -> Vec<serde_json::Value> {
            layout
                .cells
                .iter()
                .zip(bs)
                .map(|(c, b)| {
                    let entries: Vec<Vec<[f64; 2]>> = (0..b.nrows())
                        .map(|i| (0..b.ncols()).map(|j| [b[(i, j)].re, b[(i, j)].im]).collect())
                        .collect();
                    serde_json::json!({
                        "cell": self.cell_name(side, c.outer),
                        "outer": [c.outer.0, c.outer.1],
                        "rows": c.rows,
                        "cols": c.cols,
                        "entries": entries,
                    })
                })
                .collect()
        };
        serde_json::json!({
            "shape": self.shape.to_json(),
            "pf": {
                "lambda_p": self.pf.lambda_p.iter().map(|&x| fmt30(x)).collect::<Vec<_>>(),
                "lambda_q": self.pf.lambda_q.iter().map(|&x| fmt30(x)).collect::<Vec<_>>(),
                "eta_r": self.pf.eta_r.iter().map(|&x| fmt30(x)).collect::<Vec<_>>(),
                "eta_s": self.pf.eta_s.iter().map(|&x| fmt30(x)).collect::<Vec<_>>(),
            },
            "u": blocks(&self.layout_u, &self.u_blocks, Side::U),
            "v": blocks(&self.layout_v, &self.v_blocks, Side::V),
        })
    }

    /// Read a connection; the stored `v` half is kept as given so that
    /// verification can detect a broken bi-dual relation.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let shape = SquareShape::from_json(
            value.get("shape").ok_or_else(|| Error::Parse("missing shape".into()))?,
        )?;
        let pf_v = value.get("pf").ok_or_else(|| Error::Parse("missing pf".into()))?;
        let vecf = |key: &str| -> Result<Vec<f64>> {
            let arr = pf_v
                .get(key)
                .and_then(|x| x.as_array())
                .ok_or_else(|| Error::Parse(format!("missing pf.{key}")))?;
            arr.iter()
                .map(|x| match x {
                    serde_json::Value::String(s) => {
                        s.parse::<f64>().map_err(|e| Error::Parse(format!("pf.{key}: {e}")))
                    }
                    serde_json::Value::Number(n) => {
                        n.as_f64().ok_or_else(|| Error::Parse(format!("pf.{key}")))
                    }
                    _ => Err(Error::Parse(format!("pf.{key}: expected number"))),
                })
                .collect()
        };
        let pf = PfData {
            lambda_p: vecf("lambda_p")?,
            lambda_q: vecf("lambda_q")?,
            eta_r: vecf("eta_r")?,
            eta_s: vecf("eta_s")?,
        };
        pf.check(&shape)?;
        let layout_u = block_layout(&shape, Side::U)?;
        let layout_v = block_layout(&shape, Side::V)?;
        let read = |key: &str, layout: &BlockLayout| -> Result<Vec<CMatrix>> {
            let arr = value
                .get(key)
                .and_then(|x| x.as_array())
                .ok_or_else(|| Error::Parse(format!("missing {key} blocks")))?;
            if arr.len() != layout.cells.len() {
                return Err(Error::Layout(format!(
                    "{} {key} blocks for {} cells",
                    arr.len(),
                    layout.cells.len()
                )));
            }
            arr.iter()
                .zip(&layout.cells)
                .map(|(b, c)| {
                    let entries: Vec<Vec<[f64; 2]>> = serde_json::from_value(
                        b.get("entries")
                            .cloned()
                            .ok_or_else(|| Error::Parse("block without entries".into()))?,
                    )?;
                    let n = c.size();
                    if entries.len() != n || entries.iter().any(|r| r.len() != n) {
                        return Err(Error::Layout(format!("block {:?} has wrong size", c.outer)));
                    }
                    Ok(CMatrix::from_fn(n, n, |i, j| {
                        Complex64::new(entries[i][j][0], entries[i][j][1])
                    }))
                })
                .collect()
        };
        let u_blocks = read("u", &layout_u)?;
        let v_blocks = read("v", &layout_v)?;
        Ok(Connection { shape, layout_u, layout_v, u_blocks, v_blocks, pf })
    }
}
