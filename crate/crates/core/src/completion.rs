//! Completion of partially specified connections.
//!
//! Every `u` entry is one unknown; each `v` entry is a weighted conjugate of
//! a `u` entry. Forced values are propagated through the unitarity of all
//! blocks (orthogonal complements, single missing entries), sign choices are
//! explored depth first, and when propagation stalls a block whose rows (or
//! columns) are each either complete or empty is filled by Gram-Schmidt.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use crate::connection::{block_layout, CMatrix, Connection, PfData, Side, SquareShape};
use crate::error::{Error, Result};

const TOL: f64 = 1e-8;
const SMALL: f64 = 1e-6;
const FULL_CHECK: f64 = 1e-9;
const MAX_CANDIDATES: usize = 6;
const BUDGET: usize = 5000;

/// One `u` entry: the cycle `p -g- q -k- s -l- r -h- p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub s: usize,
    pub g: usize,
    pub h: usize,
    pub k: usize,
    pub l: usize,
}

#[derive(Debug, Clone)]
struct BlockView {
    n: usize,
    var: Vec<usize>,
    w: Vec<f64>,
    conj: bool,
}

impl BlockView {
    fn idx(&self, i: usize, j: usize, t: bool) -> usize {
        if t {
            j * self.n + i
        } else {
            i * self.n + j
        }
    }
}

#[derive(Debug, Clone)]
struct State {
    x: Vec<Complex64>,
    known: Vec<bool>,
    nknown: usize,
}

impl State {
    fn set(&mut self, v: usize, val: Complex64) {
        self.x[v] = val;
        if !self.known[v] {
            self.known[v] = true;
            self.nknown += 1;
        }
    }
}

struct Choice {
    /// Positions in a block view and the block values to assign there.
    block: usize,
    entries: Vec<usize>,
    vals: Vec<Complex64>,
}

enum Outcome {
    Solved(State),
    Stuck(State),
    Failed,
}

#[derive(Debug, Clone)]
pub struct ConnectionProblem {
    pub shape: SquareShape,
    pub pf: PfData,
    keys: Vec<VarKey>,
    index: HashMap<VarKey, usize>,
    blocks: Vec<BlockView>,
    n_u: usize,
    pins: BTreeMap<usize, Complex64>,
}

impl ConnectionProblem {
    pub fn new(shape: SquareShape, pf: PfData) -> Result<Self> {
        let lu = block_layout(&shape, Side::U)?;
        let lv = block_layout(&shape, Side::V)?;
        let mut keys = Vec::new();
        let mut index = HashMap::new();
        let mut blocks = Vec::new();
        for c in &lu.cells {
            let (p, s) = c.outer;
            let n = c.size();
            let mut var = Vec::with_capacity(n * n);
            for row in &c.rows {
                for col in &c.cols {
                    let key = VarKey {
                        p,
                        q: row.mid,
                        r: col.mid,
                        s,
                        g: row.e1,
                        k: row.e2,
                        h: col.e1,
                        l: col.e2,
                    };
                    index.insert(key, keys.len());
                    var.push(keys.len());
                    keys.push(key);
                }
            }
            blocks.push(BlockView { n, var, w: vec![1.0; n * n], conj: false });
        }
        let n_u = blocks.len();
        for c in &lv.cells {
            let (q, r) = c.outer;
            let n = c.size();
            let mut var = Vec::with_capacity(n * n);
            let mut w = Vec::with_capacity(n * n);
            for row in &c.rows {
                for col in &c.cols {
                    let key = VarKey {
                        p: row.mid,
                        q,
                        r,
                        s: col.mid,
                        g: row.e1,
                        h: row.e2,
                        k: col.e1,
                        l: col.e2,
                    };
                    let v = *index
                        .get(&key)
                        .ok_or_else(|| Error::Layout(format!("v cell {:?} has no u entry", c.outer)))?;
                    var.push(v);
                    w.push(pf.weight(row.mid, q, r, col.mid));
                }
            }
            blocks.push(BlockView { n, var, w, conj: true });
        }
        Ok(ConnectionProblem { shape, pf, keys, index, blocks, n_u, pins: BTreeMap::new() })
    }

    pub fn num_vars(&self) -> usize {
        self.keys.len()
    }

    pub fn num_pins(&self) -> usize {
        self.pins.len()
    }

    fn pin_var(&mut self, v: usize, val: Complex64) {
        self.pins.insert(v, val);
    }

    fn pin_entry(&mut self, b: usize, pos: usize, val: Complex64) {
        let bl = &self.blocks[b];
        let x = from_block(val, bl.w[pos], bl.conj);
        self.pin_var(bl.var[pos], x);
    }

    fn u_cell(&self, p: &str, s: &str) -> Result<usize> {
        let key = (self.shape.p_index(p)?, self.shape.s_index(s)?);
        block_layout(&self.shape, Side::U)?
            .find(key)
            .ok_or_else(|| Error::Layout(format!("no u block ({p},{s})")))
    }

    fn v_cell(&self, q: &str, r: &str) -> Result<usize> {
        let key = (self.shape.q_index(q)?, self.shape.r_index(r)?);
        block_layout(&self.shape, Side::V)?
            .find(key)
            .map(|b| b + self.n_u)
            .ok_or_else(|| Error::Layout(format!("no v block ({q},{r})")))
    }

    fn pin_block(&mut self, b: usize, m: &CMatrix) -> Result<()> {
        let n = self.blocks[b].n;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!("pin is {}x{}, block is {n}", m.nrows(), m.ncols())));
        }
        for i in 0..n {
            for j in 0..n {
                self.pin_entry(b, i * n + j, m[(i, j)]);
            }
        }
        Ok(())
    }

    pub fn pin_u(&mut self, p: &str, s: &str, m: &CMatrix) -> Result<()> {
        let b = self.u_cell(p, s)?;
        self.pin_block(b, m)
    }

    pub fn pin_v(&mut self, q: &str, r: &str, m: &CMatrix) -> Result<()> {
        let b = self.v_cell(q, r)?;
        self.pin_block(b, m)
    }

    fn pin_sub(&mut self, b: usize, side: Side, row_mid: usize, col_mid: usize, m: &CMatrix) -> Result<()> {
        let layout = block_layout(&self.shape, side)?;
        let cell = &layout.cells[if side == Side::U { b } else { b - self.n_u }];
        let (ri, ci) = cell.sub(row_mid, col_mid);
        if m.nrows() != ri.len() || m.ncols() != ci.len() {
            return Err(Error::Dimension(format!(
                "sub-block pin is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                ri.len(),
                ci.len()
            )));
        }
        let n = cell.size();
        for (a, &i) in ri.iter().enumerate() {
            for (c, &j) in ci.iter().enumerate() {
                self.pin_entry(b, i * n + j, m[(a, c)]);
            }
        }
        Ok(())
    }

    /// Pin the part of `u^{(p,s)}` with rows through `q` and columns through `r`.
    pub fn pin_u_sub(&mut self, p: &str, s: &str, q: &str, r: &str, m: &CMatrix) -> Result<()> {
        let b = self.u_cell(p, s)?;
        let (qi, ri) = (self.shape.q_index(q)?, self.shape.r_index(r)?);
        self.pin_sub(b, Side::U, qi, ri, m)
    }

    /// Pin the part of `v^{(q,r)}` with rows through `p` and columns through `s`.
    pub fn pin_v_sub(&mut self, q: &str, r: &str, p: &str, s: &str, m: &CMatrix) -> Result<()> {
        let b = self.v_cell(q, r)?;
        let (pi, si) = (self.shape.p_index(p)?, self.shape.s_index(s)?);
        self.pin_sub(b, Side::V, pi, si, m)
    }

    /// Set every `1 x 1` block, on both sides, to `value`.
    pub fn pin_scalar_blocks(&mut self, value: f64) {
        for b in 0..self.blocks.len() {
            if self.blocks[b].n == 1 {
                self.pin_entry(b, 0, Complex64::new(value, 0.0));
            }
        }
    }

    /// Copy every pin to its image under a relabeling of vertices. Edge
    /// multiplicity indices are kept.
    pub fn mirror<F: Fn(&str) -> String>(&mut self, map: F) -> Result<()> {
        let sh = &self.shape;
        let mut new = Vec::new();
        for (&v, &val) in &self.pins {
            let key = self.keys[v];
            let image = VarKey {
                p: sh.p_index(&map(&sh.p_labels[key.p]))?,
                q: sh.q_index(&map(&sh.q_labels[key.q]))?,
                r: sh.r_index(&map(&sh.r_labels[key.r]))?,
                s: sh.s_index(&map(&sh.s_labels[key.s]))?,
                ..key
            };
            let w = *self
                .index
                .get(&image)
                .ok_or_else(|| Error::Inconsistent(format!("mirror image of {key:?} is not a cell")))?;
            new.push((w, val));
        }
        for (w, val) in new {
            if let Some(old) = self.pins.get(&w) {
                if (old - val).norm() > 1e-12 {
                    return Err(Error::Inconsistent(format!(
                        "mirrored pin clashes at {:?}",
                        self.keys[w]
                    )));
                }
            }
            self.pins.insert(w, val);
        }
        Ok(())
    }

    /// Complete the pinned entries to a bi-unitary connection.
    pub fn solve(&self) -> Result<Connection> {
        let n = self.keys.len();
        let mut st = State { x: vec![Complex64::new(0.0, 0.0); n], known: vec![false; n], nknown: 0 };
        for (&v, &val) in &self.pins {
            st.set(v, val);
        }
        let mut budget = 0;
        let solved = self
            .solve_bt(st, &mut budget)?
            .ok_or_else(|| Error::Completion("no consistent completion of the pinned entries".into()))?;
        let lu = block_layout(&self.shape, Side::U)?;
        let u_blocks: Vec<CMatrix> = self.blocks[..self.n_u]
            .iter()
            .map(|b| CMatrix::from_fn(b.n, b.n, |i, j| solved.x[b.var[i * b.n + j]]))
            .collect();
        debug_assert_eq!(u_blocks.len(), lu.cells.len());
        Connection::bi_dual(self.shape.clone(), u_blocks, self.pf.clone())
    }

    fn value(&self, st: &State, b: usize, pos: usize) -> Complex64 {
        let bl = &self.blocks[b];
        let x = st.x[bl.var[pos]];
        let x = if bl.conj { x.conj() } else { x };
        x * bl.w[pos]
    }

    fn assign(&self, st: &mut State, b: usize, pos: usize, val: Complex64) {
        let bl = &self.blocks[b];
        st.set(bl.var[pos], from_block(val, bl.w[pos], bl.conj));
    }

    fn block_known(&self, st: &State, b: usize) -> bool {
        self.blocks[b].var.iter().all(|&v| st.known[v])
    }

    /// Propagate forced values to a fixpoint; `None` on a contradiction.
    fn step(&self, st: &mut State) -> Option<Vec<Choice>> {
        'outer: loop {
            let mut choices = Vec::new();
            for b in 0..self.blocks.len() {
                if self.block_known(st, b) {
                    continue;
                }
                let n = self.blocks[b].n;
                for t in [false, true] {
                    let bl = &self.blocks[b];
                    let pos = |i: usize, j: usize| bl.idx(i, j, t);
                    let kn = |st: &State, i: usize, j: usize| st.known[bl.var[pos(i, j)]];
                    let vals: Vec<Vec<Complex64>> =
                        (0..n).map(|i| (0..n).map(|j| self.value(st, b, pos(i, j))).collect()).collect();
                    for (i, row) in vals.iter().enumerate() {
                        let s: f64 = (0..n).filter(|&j| kn(st, i, j)).map(|j| row[j].norm_sqr()).sum();
                        if s > 1.0 + TOL {
                            return None;
                        }
                    }
                    let full: Vec<bool> = (0..n).map(|i| (0..n).all(|j| kn(st, i, j))).collect();
                    let unk: Vec<usize> = (0..n).filter(|&i| !full[i]).collect();
                    if unk.len() == 1 {
                        let i = unk[0];
                        let others: Vec<Vec<Complex64>> =
                            (0..n).filter(|&r| r != i).map(|r| vals[r].clone()).collect();
                        let mut vec = complement(&others, n);
                        let kk: Vec<usize> = (0..n).filter(|&j| kn(st, i, j)).collect();
                        let big = kk.iter().copied().max_by(|&a, &c| vec[a].norm().total_cmp(&vec[c].norm()));
                        match big {
                            Some(j) if vec[j].norm() > SMALL => {
                                let ph = vals[i][j] / vec[j];
                                let ph = if ph.norm() > 0.0 { ph / ph.norm() } else { Complex64::new(1.0, 0.0) };
                                for z in vec.iter_mut() {
                                    *z *= ph;
                                }
                                if kk.iter().any(|&j| (vals[i][j] - vec[j]).norm() > TOL) {
                                    return None;
                                }
                                let todo: Vec<usize> = (0..n).filter(|&j| !kn(st, i, j)).collect();
                                for j in todo {
                                    let p = pos(i, j);
                                    self.assign(st, b, p, vec[j]);
                                }
                                continue 'outer;
                            }
                            _ => {
                                if kk.iter().any(|&j| vals[i][j].norm() > TOL) {
                                    return None;
                                }
                                let entries: Vec<usize> = (0..n).map(|j| pos(i, j)).collect();
                                choices.push(Choice { block: b, entries, vals: vec });
                                continue;
                            }
                        }
                    }
                    for &i in &unk {
                        let uk: Vec<usize> = (0..n).filter(|&j| !kn(st, i, j)).collect();
                        if uk.len() != 1 {
                            continue;
                        }
                        let j = uk[0];
                        let m2 = 1.0
                            - (0..n).filter(|&k| k != j).map(|k| vals[i][k].norm_sqr()).sum::<f64>();
                        let r = (0..n).find(|&r| r != i && full[r] && vals[r][j].norm() > SMALL);
                        let val = if let Some(r) = r {
                            let dot: Complex64 =
                                (0..n).filter(|&k| k != j).map(|k| vals[i][k] * vals[r][k].conj()).sum();
                            let val = -dot / vals[r][j].conj();
                            if (val.norm_sqr() - m2).abs() > TOL {
                                return None;
                            }
                            val
                        } else if m2.abs() < 1e-10 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            choices.push(Choice {
                                block: b,
                                entries: vec![pos(i, j)],
                                vals: vec![Complex64::new(m2.max(0.0).sqrt(), 0.0)],
                            });
                            continue;
                        };
                        let p = pos(i, j);
                        self.assign(st, b, p, val);
                        continue 'outer;
                    }
                }
            }
            return Some(choices);
        }
    }

    fn full_check(&self, st: &State) -> f64 {
        let mut e: f64 = 0.0;
        for b in 0..self.blocks.len() {
            let n = self.blocks[b].n;
            let m = CMatrix::from_fn(n, n, |i, j| self.value(st, b, i * n + j));
            e = e.max(crate::connection::unitarity_residual(&m));
        }
        e
    }

    fn dfs(&self, mut st: State) -> Outcome {
        let Some(choices) = self.step(&mut st) else {
            return Outcome::Failed;
        };
        if st.nknown == st.x.len() {
            return if self.full_check(&st) < FULL_CHECK { Outcome::Solved(st) } else { Outcome::Failed };
        }
        let Some(c) = choices.into_iter().next() else {
            return Outcome::Stuck(st);
        };
        for sgn in [1.0, -1.0] {
            let mut s2 = st.clone();
            for (&p, &v) in c.entries.iter().zip(&c.vals) {
                if !s2.known[self.blocks[c.block].var[p]] {
                    self.assign(&mut s2, c.block, p, v * sgn);
                }
            }
            match self.dfs(s2) {
                Outcome::Failed => {}
                other => return other,
            }
        }
        Outcome::Failed
    }

    fn solve_bt(&self, st: State, budget: &mut usize) -> Result<Option<State>> {
        let st = match self.dfs(st) {
            Outcome::Solved(s) => return Ok(Some(s)),
            Outcome::Failed => return Ok(None),
            Outcome::Stuck(s) => s,
        };
        for cand in self.candidates(&st).into_iter().take(MAX_CANDIDATES) {
            *budget += 1;
            if *budget > BUDGET {
                return Err(Error::Completion(format!("search budget of {BUDGET} exhausted")));
            }
            let mut s2 = st.clone();
            self.apply_completion(&mut s2, &cand);
            if let Some(s) = self.solve_bt(s2, budget)? {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }

    fn candidates(&self, st: &State) -> Vec<Candidate> {
        let mut out = Vec::new();
        for b in 0..self.blocks.len() {
            if self.block_known(st, b) {
                continue;
            }
            let bl = &self.blocks[b];
            let n = bl.n;
            for t in [false, true] {
                let mut full = Vec::new();
                let mut empty = Vec::new();
                for i in 0..n {
                    let k = (0..n).filter(|&j| st.known[bl.var[bl.idx(i, j, t)]]).count();
                    if k == n {
                        full.push(i);
                    } else if k == 0 {
                        empty.push(i);
                    }
                }
                if full.len() + empty.len() == n {
                    out.push(Candidate { block: b, t, full, empty });
                }
            }
        }
        out.sort_by_key(|c| std::cmp::Reverse(c.full.len()));
        out
    }

    fn apply_completion(&self, st: &mut State, c: &Candidate) {
        let bl = &self.blocks[c.block];
        let n = bl.n;
        let vecs: Vec<Vec<Complex64>> = c
            .full
            .iter()
            .map(|&i| (0..n).map(|j| self.value(st, c.block, bl.idx(i, j, c.t))).collect())
            .collect();
        let new = gs_extend(&vecs, n);
        for (&i, v) in c.empty.iter().zip(&new) {
            for (j, &z) in v.iter().enumerate() {
                self.assign(st, c.block, bl.idx(i, j, c.t), z);
            }
        }
    }
}

struct Candidate {
    block: usize,
    t: bool,
    full: Vec<usize>,
    empty: Vec<usize>,
}

fn from_block(val: Complex64, w: f64, conj: bool) -> Complex64 {
    let x = val / w;
    if conj {
        x.conj()
    } else {
        x
    }
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dotc(b, v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
}

/// Orthonormal vectors extending `vecs` (taken as given after normalizing),
/// from the canonical basis in index order.
fn gs_extend(vecs: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = vecs
        .iter()
        .map(|v| {
            let nv = norm(v);
            v.iter().map(|z| z / nv).collect()
        })
        .collect();
    let start = basis.len();
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[e] = Complex64::new(1.0, 0.0);
        orthogonalize(&mut v, &basis);
        let nv = norm(&v);
        if nv > SMALL {
            basis.push(v.iter().map(|z| z / nv).collect());
        }
    }
    basis.split_off(start)
}

/// Unit vector orthogonal to `others`, built from the canonical vector with
/// the largest residual.
fn complement(others: &[Vec<Complex64>], n: usize) -> Vec<Complex64> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for o in others {
        let mut v = o.clone();
        orthogonalize(&mut v, &basis);
        let nv = norm(&v);
        if nv > SMALL {
            basis.push(v.iter().map(|z| z / nv).collect());
        }
    }
    let mut best = vec![Complex64::new(0.0, 0.0); n];
    let mut best_norm = -1.0;
    for e in 0..n {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[e] = Complex64::new(1.0, 0.0);
        orthogonalize(&mut v, &basis);
        let nv = norm(&v);
        if nv > best_norm + 1e-12 {
            best_norm = nv;
            best = v;
        }
    }
    best.iter().map(|z| z / best_norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_of_two_axes() {
        let o = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        let c = complement(&o, 3);
        assert!((c[1].norm() - 1.0).abs() < 1e-15);
    }
}
