//! Fusion rings, based fusion bimodules and the search for multiplication
//! maps `K (x)_B L -> M` on a triple of bimodules `(A K B, B L C, A M C)`.
//!
//! Action matrices are column-oriented: `L[lambda][(k, i)]` is the
//! multiplicity of `xi_k` in `lambda . xi_i`, and `R[rho][(k, i)]` the
//! multiplicity of `xi_k` in `xi_i . rho`. A ring is stored through its left
//! multiplication matrices, `mult[a][(c, b)] = N_{ab}^c`.
//!
//! All pairings are dimensions of Hom spaces and are computed from the action
//! matrices by Frobenius reciprocity:
//! `(xibar_i1 xi_i2, b) = R^K[b][(i2, i1)]` and
//! `(eta_j1 etabar_j2, b) = L^L[b][(j1, j2)]`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::graph::{matrix_rows, BipartiteGraph, IntMatrix};

pub const DIM_TOL: f64 = 1e-10;

fn overflow(what: &str) -> Error {
    Error::Overflow(what.into())
}

fn checked_dot<I: IntoIterator<Item = (i64, i64)>>(terms: I, what: &str) -> Result<i64> {
    terms.into_iter().try_fold(0i64, |acc, (a, b)| {
        a.checked_mul(b).and_then(|p| acc.checked_add(p)).ok_or_else(|| overflow(what))
    })
}

fn checked_matmul(a: &IntMatrix, b: &IntMatrix, what: &str) -> Result<IntMatrix> {
    let mut out = IntMatrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            out[(i, j)] = checked_dot((0..a.ncols()).map(|k| (a[(i, k)], b[(k, j)])), what)?;
        }
    }
    Ok(out)
}

/// Positive eigenvector of a symmetric nonnegative matrix for its largest
/// eigenvalue. Fails if that eigenvalue is not simple or the vector has a
/// vanishing entry.
fn perron_vector(s: &IntMatrix, what: &str) -> Result<Vec<f64>> {
    let n = s.nrows();
    let sf = DMatrix::from_fn(n, n, |i, j| s[(i, j)] as f64);
    let eig = SymmetricEigen::new(sf);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if n > 1 && (eig.eigenvalues[order[0]] - eig.eigenvalues[order[1]]).abs() < 1e-9 {
        return Err(Error::Fusion(format!("{what}: action is not irreducible")));
    }
    let v: Vec<f64> = eig.eigenvectors.column(order[0]).iter().map(|x| x.abs()).collect();
    if v.iter().any(|&x| x < 1e-12) {
        return Err(Error::Fusion(format!("{what}: action is not irreducible")));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionRing {
    pub labels: Vec<String>,
    pub unit: usize,
    pub dual: Vec<usize>,
    pub mult: Vec<IntMatrix>,
    pub dims: Vec<f64>,
}

impl FusionRing {
    /// Builds and validates a ring from `n[a][b][c] = N_{ab}^c`.
    pub fn new(labels: Vec<String>, unit: usize, dual: Vec<usize>, n: &[Vec<Vec<i64>>]) -> Result<Self> {
        let r = labels.len();
        if r == 0 {
            return Err(Error::Empty("fusion ring basis".into()));
        }
        check_labels(&labels)?;
        if unit >= r || dual.len() != r || dual.iter().any(|&d| d >= r) {
            return Err(Error::Dimension("unit or dual out of range".into()));
        }
        if n.len() != r || n.iter().any(|m| m.len() != r || m.iter().any(|v| v.len() != r)) {
            return Err(Error::Dimension(format!("structure constants must be {r} x {r} x {r}")));
        }
        let mult: Vec<IntMatrix> =
            (0..r).map(|a| IntMatrix::from_fn(r, r, |c, b| n[a][b][c])).collect();
        let mut ring = FusionRing { labels, unit, dual, mult, dims: vec![1.0; r] };
        ring.validate_integral()?;
        let sum = ring.mult.iter().fold(IntMatrix::zeros(r, r), |acc, m| acc + m);
        let v = perron_vector(&sum, "fusion ring")?;
        ring.dims = v.iter().map(|x| x / v[unit]).collect();
        ring.validate_dims()?;
        Ok(ring)
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn n(&self, a: usize, b: usize, c: usize) -> i64 {
        self.mult[a][(c, b)]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownVertex(label.into()))
    }

    /// Sum of squared dimensions.
    pub fn global_dim(&self) -> f64 {
        self.dims.iter().map(|d| d * d).sum()
    }

    fn validate_integral(&self) -> Result<()> {
        let r = self.rank();
        let lab = |i: usize| self.labels[i].as_str();
        for a in 0..r {
            if self.dual[self.dual[a]] != a {
                return Err(Error::Fusion(format!("dual is not an involution at {}", lab(a))));
            }
            for b in 0..r {
                for c in 0..r {
                    let v = self.n(a, b, c);
                    if v < 0 {
                        return Err(Error::Fusion(format!(
                            "negative structure constant N[{},{}][{}]",
                            lab(a),
                            lab(b),
                            lab(c)
                        )));
                    }
                    let unit = i64::from(b == c);
                    if self.n(self.unit, b, c) != unit || self.n(b, self.unit, c) != unit {
                        return Err(Error::Fusion(format!("unit law fails at ({}, {})", lab(b), lab(c))));
                    }
                    if v != self.n(self.dual[a], c, b) || v != self.n(c, self.dual[b], a) {
                        return Err(Error::Fusion(format!(
                            "Frobenius reciprocity fails at ({}, {}, {})",
                            lab(a),
                            lab(b),
                            lab(c)
                        )));
                    }
                }
            }
        }
        for a in 0..r {
            for b in 0..r {
                let lhs = checked_matmul(&self.mult[a], &self.mult[b], "associativity")?;
                let mut rhs = IntMatrix::zeros(r, r);
                for c in 0..r {
                    rhs += &self.mult[c] * self.n(a, b, c);
                }
                if lhs != rhs {
                    return Err(Error::Fusion(format!(
                        "associativity fails at ({}, {})",
                        lab(a),
                        lab(b)
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate_dims(&self) -> Result<()> {
        let r = self.rank();
        for a in 0..r {
            for b in 0..r {
                let rhs: f64 = (0..r).map(|c| self.n(a, b, c) as f64 * self.dims[c]).sum();
                let lhs = self.dims[a] * self.dims[b];
                if (lhs - rhs).abs() > DIM_TOL * lhs.max(1.0) {
                    return Err(Error::Fusion(format!(
                        "dimension law fails at ({}, {}): {lhs} vs {rhs}",
                        self.labels[a], self.labels[b]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Group ring of `Z/n`, labels `"0".."n-1"`.
    pub fn cyclic(n: usize) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let dual = (0..n).map(|i| (n - i) % n).collect();
        let t: Vec<Vec<Vec<i64>>> = (0..n)
            .map(|a| (0..n).map(|b| (0..n).map(|c| i64::from((a + b) % n == c)).collect()).collect())
            .collect();
        FusionRing::new(labels, 0, dual, &t)
    }

    /// `{1, tau}` with `tau^2 = 1 + tau`.
    pub fn fibonacci() -> Result<Self> {
        let t = vec![
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![0, 1], vec![1, 1]],
        ];
        FusionRing::new(vec!["1".into(), "tau".into()], 0, vec![0, 1], &t)
    }

    /// Truncated `SU(2)` fusion rules at level `k`: objects `0..=k` with
    /// `a b = sum c` over `|a-b| <= c <= min(a+b, 2k-a-b)`, `c = a+b mod 2`.
    pub fn su2(k: usize) -> Result<Self> {
        let r = k + 1;
        let labels = (0..r).map(|i| i.to_string()).collect();
        let t: Vec<Vec<Vec<i64>>> = (0..r)
            .map(|a| {
                (0..r)
                    .map(|b| {
                        (0..r)
                            .map(|c| {
                                let lo = a.abs_diff(b);
                                let hi = (a + b).min(2 * k - a - b);
                                i64::from(c >= lo && c <= hi && (a + b + c) % 2 == 0)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        FusionRing::new(labels, 0, (0..r).collect(), &t)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        if name == "fib" || name == "fibonacci" {
            return FusionRing::fibonacci();
        }
        let num = |p: &str| {
            name.strip_prefix(p)
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&n| n >= 1)
        };
        if let Some(n) = num("Z") {
            return FusionRing::cyclic(n);
        }
        if let Some(k) = num("su2_") {
            return FusionRing::su2(k);
        }
        Err(Error::Parse(format!("unknown built-in ring {name}")))
    }

    pub fn to_json(&self) -> Value {
        let r = self.rank();
        let mut n = Map::new();
        for a in 0..r {
            for b in 0..r {
                let mut row = Map::new();
                for c in 0..r {
                    if self.n(a, b, c) != 0 {
                        row.insert(self.labels[c].clone(), json!(self.n(a, b, c)));
                    }
                }
                if !row.is_empty() {
                    n.insert(format!("{},{}", self.labels[a], self.labels[b]), Value::Object(row));
                }
            }
        }
        let dual: Map<String, Value> = (0..r)
            .map(|a| (self.labels[a].clone(), json!(self.labels[self.dual[a]])))
            .collect();
        json!({
            "basis": self.labels,
            "unit": self.labels[self.unit],
            "dual": dual,
            "N": n,
            "dims": self.dims,
        })
    }

    /// Reads `{basis, unit, dual, N: {"a,b": {c: int}}}`; absent constants
    /// are zero and an absent dual entry means self-dual.
    pub fn from_json(v: &Value) -> Result<Self> {
        let labels = string_list(v.get("basis"), "basis")?;
        let index = |s: &str| {
            labels
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| Error::Parse(format!("unknown basis label {s}")))
        };
        let unit = index(v.get("unit").and_then(Value::as_str).ok_or_else(|| Error::Parse("missing unit".into()))?)?;
        let r = labels.len();
        let mut dual: Vec<usize> = (0..r).collect();
        if let Some(d) = v.get("dual") {
            let d = d.as_object().ok_or_else(|| Error::Parse("dual must be an object".into()))?;
            for (a, b) in d {
                let b = b.as_str().ok_or_else(|| Error::Parse("dual values must be labels".into()))?;
                dual[index(a)?] = index(b)?;
            }
        }
        let mut n = vec![vec![vec![0i64; r]; r]; r];
        let table = v
            .get("N")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("missing N".into()))?;
        for (key, row) in table {
            let (a, b) = key
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("N key {key} is not \"a,b\"")))?;
            let (a, b) = (index(a.trim())?, index(b.trim())?);
            let row = row.as_object().ok_or_else(|| Error::Parse(format!("N[{key}] must be an object")))?;
            for (c, m) in row {
                n[a][b][index(c)?] =
                    m.as_i64().ok_or_else(|| Error::Parse(format!("N[{key}][{c}] is not an integer")))?;
            }
        }
        FusionRing::new(labels, unit, dual, &n)
    }
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn string_list(v: Option<&Value>, what: &str) -> Result<Vec<String>> {
    v.and_then(Value::as_array)
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .iter()
        .map(|x| {
            x.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("{what} entries must be strings")))
        })
        .collect()
}

fn int_rows(v: &Value, what: &str) -> Result<Vec<Vec<i64>>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("{what} must be a matrix")))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Parse(format!("{what} rows must be arrays")))?
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| Error::Parse(format!("{what} entries must be integers"))))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionBimodule {
    pub left_ring: FusionRing,
    pub right_ring: FusionRing,
    pub labels: Vec<String>,
    pub left: Vec<IntMatrix>,
    pub right: Vec<IntMatrix>,
    pub dims: Vec<f64>,
}

impl FusionBimodule {
    /// Validates the module laws and, when `dims` is `None`, takes the
    /// positive common eigenvector of the actions scaled so that
    /// `sum d(xi)^2` equals the global dimension of the left ring.
    pub fn new(
        left_ring: FusionRing,
        right_ring: FusionRing,
        labels: Vec<String>,
        left: Vec<IntMatrix>,
        right: Vec<IntMatrix>,
        dims: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Empty("bimodule basis".into()));
        }
        check_labels(&labels)?;
        if left.len() != left_ring.rank() || right.len() != right_ring.rank() {
            return Err(Error::Dimension("one action matrix per ring basis element".into()));
        }
        if left.iter().chain(&right).any(|m| m.shape() != (n, n)) {
            return Err(Error::Dimension(format!("action matrices must be {n} x {n}")));
        }
        let mut bm = FusionBimodule { left_ring, right_ring, labels, left, right, dims: vec![1.0; n] };
        bm.validate_integral()?;
        bm.dims = match dims {
            Some(d) => {
                if d.len() != n || d.iter().any(|&x| x.is_nan() || x <= 0.0) {
                    return Err(Error::Fusion("dims must be positive, one per basis element".into()));
                }
                d
            }
            None => {
                let sum = bm.left.iter().chain(&bm.right).fold(IntMatrix::zeros(n, n), |acc, m| acc + m);
                let v = perron_vector(&sum, "bimodule")?;
                let scale = (bm.left_ring.global_dim() / v.iter().map(|x| x * x).sum::<f64>()).sqrt();
                v.iter().map(|x| x * scale).collect()
            }
        };
        bm.validate_dims()?;
        Ok(bm)
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownVertex(label.into()))
    }

    /// The ring as a bimodule over itself.
    pub fn regular(ring: &FusionRing) -> Result<Self> {
        let r = ring.rank();
        let left = (0..r).map(|l| IntMatrix::from_fn(r, r, |k, i| ring.n(l, i, k))).collect();
        let right = (0..r).map(|p| IntMatrix::from_fn(r, r, |k, i| ring.n(i, p, k))).collect();
        FusionBimodule::new(ring.clone(), ring.clone(), ring.labels.clone(), left, right, Some(ring.dims.clone()))
    }

    fn validate_integral(&self) -> Result<()> {
        for (side, ring, acts) in [("left", &self.left_ring, &self.left), ("right", &self.right_ring, &self.right)] {
            let r = ring.rank();
            let lab = |i: usize| ring.labels[i].as_str();
            for (a, m) in acts.iter().enumerate() {
                if let Some(v) = m.iter().find(|&&v| v < 0) {
                    return Err(Error::Fusion(format!("negative {side} action entry {v} for {}", lab(a))));
                }
                if acts[ring.dual[a]] != m.transpose() {
                    return Err(Error::Fusion(format!(
                        "{side} action of {} is not the transpose of its dual",
                        lab(a)
                    )));
                }
            }
            if acts[ring.unit] != IntMatrix::identity(self.rank(), self.rank()) {
                return Err(Error::Fusion(format!("{side} unit does not act as the identity")));
            }
            for a in 0..r {
                for b in 0..r {
                    // left: L[a]L[b] = sum N_ab^c L[c]; right: R[b]R[a] = sum N_ab^c R[c]
                    let lhs = if side == "left" {
                        checked_matmul(&acts[a], &acts[b], "module law")?
                    } else {
                        checked_matmul(&acts[b], &acts[a], "module law")?
                    };
                    let mut rhs = IntMatrix::zeros(self.rank(), self.rank());
                    for (c, act) in acts.iter().enumerate().take(r) {
                        rhs += act * ring.n(a, b, c);
                    }
                    if lhs != rhs {
                        return Err(Error::Fusion(format!(
                            "{side} module law fails at ({}, {})",
                            lab(a),
                            lab(b)
                        )));
                    }
                }
            }
        }
        for (a, l) in self.left.iter().enumerate() {
            for (b, r) in self.right.iter().enumerate() {
                if checked_matmul(l, r, "commutation")? != checked_matmul(r, l, "commutation")? {
                    return Err(Error::Fusion(format!(
                        "left action of {} and right action of {} do not commute",
                        self.left_ring.labels[a], self.right_ring.labels[b]
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate_dims(&self) -> Result<()> {
        let n = self.rank();
        for (side, ring, acts) in [("left", &self.left_ring, &self.left), ("right", &self.right_ring, &self.right)] {
            for (a, m) in acts.iter().enumerate() {
                for i in 0..n {
                    let lhs = ring.dims[a] * self.dims[i];
                    let rhs: f64 = (0..n).map(|k| m[(k, i)] as f64 * self.dims[k]).sum();
                    if (lhs - rhs).abs() > DIM_TOL * lhs.max(1.0) {
                        return Err(Error::Fusion(format!(
                            "{side} dimension law fails at ({}, {}): {lhs} vs {rhs}",
                            ring.labels[a], self.labels[i]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let acts = |ring: &FusionRing, ms: &[IntMatrix]| -> Map<String, Value> {
            ms.iter()
                .enumerate()
                .map(|(a, m)| (ring.labels[a].clone(), json!(matrix_rows(m))))
                .collect()
        };
        json!({
            "left": self.left_ring.to_json(),
            "right": self.right_ring.to_json(),
            "basis": self.labels,
            "L": acts(&self.left_ring, &self.left),
            "R": acts(&self.right_ring, &self.right),
            "dims": self.dims,
        })
    }

    /// Reads `{left, right, basis, L: {label: rows}, R: {label: rows},
    /// dims?}`. Rings are inline objects or built-in names; a missing action
    /// matrix means the zero matrix, except for the unit.
    pub fn from_json(v: &Value) -> Result<Self> {
        let ring = |key: &str| -> Result<FusionRing> {
            match v.get(key) {
                Some(Value::String(name)) => FusionRing::builtin(name),
                Some(obj @ Value::Object(_)) => FusionRing::from_json(obj),
                _ => Err(Error::Parse(format!("missing ring {key}"))),
            }
        };
        let (left_ring, right_ring) = (ring("left")?, ring("right")?);
        let labels = string_list(v.get("basis"), "basis")?;
        let n = labels.len();
        let acts = |key: &str, ring: &FusionRing| -> Result<Vec<IntMatrix>> {
            let table = v
                .get(key)
                .and_then(Value::as_object)
                .ok_or_else(|| Error::Parse(format!("missing action {key}")))?;
            let mut out: Vec<IntMatrix> = (0..ring.rank())
                .map(|a| if a == ring.unit { IntMatrix::identity(n, n) } else { IntMatrix::zeros(n, n) })
                .collect();
            for (label, rows) in table {
                let rows = int_rows(rows, key)?;
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Dimension(format!("{key}[{label}] must be {n} x {n}")));
                }
                out[ring.index_of(label)?] = IntMatrix::from_fn(n, n, |i, j| rows[i][j]);
            }
            Ok(out)
        };
        let left = acts("L", &left_ring)?;
        let right = acts("R", &right_ring)?;
        let dims = match v.get("dims") {
            None | Some(Value::Null) => None,
            Some(d) => Some(
                d.as_array()
                    .ok_or_else(|| Error::Parse("dims must be an array".into()))?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| Error::Parse("dims must be numbers".into())))
                    .collect::<Result<Vec<f64>>>()?,
            ),
        };
        FusionBimodule::new(left_ring, right_ring, labels, left, right, dims)
    }
}

/// Either kind of fusion data file.
#[derive(Debug, Clone, PartialEq)]
pub enum FusionData {
    Ring(FusionRing),
    Bimodule(FusionBimodule),
}

pub fn load_fusion_data(path: &std::path::Path) -> Result<FusionData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_fusion_data(&serde_json::from_str(&text)?)
}

pub fn parse_fusion_data(v: &Value) -> Result<FusionData> {
    if v.get("N").is_some() {
        FusionRing::from_json(v).map(FusionData::Ring)
    } else {
        FusionBimodule::from_json(v).map(FusionData::Bimodule)
    }
}

/// All length-`n` nonnegative vectors with squared norm `total`, in
/// lexicographic order.
pub fn sum_of_squares_decompositions(total: u64, n: usize) -> Vec<Vec<i64>> {
    fn rec(rest: u64, pos: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if pos == cur.len() {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut a = 0u64;
        while a * a <= rest {
            cur[pos] = a as i64;
            rec(rest - a * a, pos + 1, cur, out);
            a += 1;
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(total, 0, &mut vec![0; n], &mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchOptions {
    /// Skip the pairing condition through the right ring.
    pub skip_c_prime: bool,
    /// Also require `v^{i1 j1} . v^{i2 j2} = (xibar_i1 xi_i2, eta_j2 etabar_j1)`,
    /// with the `eta` indices swapped. This excludes every map on Z/3.
    pub literal_condition_d: bool,
}

/// A triple `(A K B, B L C, A M C)` with its precomputed pairings.
#[derive(Debug, Clone)]
pub struct Triple {
    pub k: FusionBimodule,
    pub l: FusionBimodule,
    pub m: FusionBimodule,
    pairings: Pairings,
}

#[derive(Debug, Clone)]
struct Pairings {
    /// `(xibar_i1 xi_i2, eta_j1 etabar_j2)` at `[[i1, i2], [j1, j2]]`.
    b: Vec<i64>,
    /// `(xi_i1 (eta_j1 etabar_j2) xibar_i2, lambda)`.
    c: Vec<i64>,
    /// `(etabar_j1 (xibar_i1 xi_i2) eta_j2, kappa)`.
    c_prime: Vec<i64>,
}

fn same_ring(a: &FusionRing, b: &FusionRing) -> bool {
    a.labels == b.labels && a.unit == b.unit && a.dual == b.dual && a.mult == b.mult
}

impl Triple {
    pub fn new(k: FusionBimodule, l: FusionBimodule, m: FusionBimodule) -> Result<Self> {
        if !same_ring(&k.right_ring, &l.left_ring) {
            return Err(Error::Fusion("right ring of K differs from left ring of L".into()));
        }
        if !same_ring(&k.left_ring, &m.left_ring) {
            return Err(Error::Fusion("left ring of K differs from left ring of M".into()));
        }
        if !same_ring(&l.right_ring, &m.right_ring) {
            return Err(Error::Fusion("right ring of L differs from right ring of M".into()));
        }
        let pairings = Pairings::new(&k, &l)?;
        Ok(Triple { k, l, m, pairings })
    }

    /// `(A A A, A A A, A A A)`.
    pub fn regular(ring: &FusionRing) -> Result<Self> {
        let r = FusionBimodule::regular(ring)?;
        Triple::new(r.clone(), r.clone(), r)
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.k.rank(), self.l.rank(), self.m.rank())
    }

    fn bi(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> usize {
        let (l, m, _) = self.dims();
        ((i1 * l + i2) * m + j1) * m + j2
    }

    /// `(xibar_i1 xi_i2, eta_j1 etabar_j2)`.
    pub fn pairing_b(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> i64 {
        self.pairings.b[self.bi(i1, i2, j1, j2)]
    }

    /// `(xibar_i1 xi_i2, b)` for `b` in the middle ring.
    pub fn pairing_xi(&self, i1: usize, i2: usize, b: usize) -> i64 {
        self.k.right[b][(i2, i1)]
    }

    /// `(eta_j1 etabar_j2, b)` for `b` in the middle ring.
    pub fn pairing_eta(&self, j1: usize, j2: usize, b: usize) -> i64 {
        self.l.left[b][(j1, j2)]
    }

    /// `(xi_i1 (eta_j1 etabar_j2) xibar_i2, lambda)`.
    pub fn pairing_c(&self, i1: usize, j1: usize, i2: usize, j2: usize, lambda: usize) -> i64 {
        self.pairings.c[self.bi(i1, i2, j1, j2) * self.k.left_ring.rank() + lambda]
    }

    /// `(etabar_j1 (xibar_i1 xi_i2) eta_j2, kappa)`.
    pub fn pairing_c_prime(&self, i1: usize, j1: usize, i2: usize, j2: usize, kappa: usize) -> i64 {
        self.pairings.c_prime[self.bi(i1, i2, j1, j2) * self.l.right_ring.rank() + kappa]
    }
}

impl Pairings {
    fn new(k: &FusionBimodule, l: &FusionBimodule) -> Result<Self> {
        let (nl, nm) = (k.rank(), l.rank());
        let mid = k.right_ring.rank();
        let (na, nc) = (k.left_ring.rank(), l.right_ring.rank());
        let size = nl * nl * nm * nm;
        let mut b = vec![0i64; size];
        let mut c = vec![0i64; size * na];
        let mut c_prime = vec![0i64; size * nc];
        // xi_i1 . beta . xibar_i2 against lambda, for every beta
        let mut k_through = vec![0i64; mid * nl * nl * na];
        for beta in 0..mid {
            for i1 in 0..nl {
                for i2 in 0..nl {
                    for lam in 0..na {
                        k_through[((beta * nl + i1) * nl + i2) * na + lam] = checked_dot(
                            (0..nl).map(|kk| (k.right[beta][(kk, i1)], k.left[lam][(kk, i2)])),
                            "left pairing",
                        )?;
                    }
                }
            }
        }
        // etabar_j1 . beta . eta_j2 against kappa
        let mut l_through = vec![0i64; mid * nm * nm * nc];
        for beta in 0..mid {
            for j1 in 0..nm {
                for j2 in 0..nm {
                    for kap in 0..nc {
                        l_through[((beta * nm + j1) * nm + j2) * nc + kap] = checked_dot(
                            (0..nm).map(|ll| (l.left[beta][(ll, j2)], l.right[kap][(ll, j1)])),
                            "right pairing",
                        )?;
                    }
                }
            }
        }
        for i1 in 0..nl {
            for i2 in 0..nl {
                for j1 in 0..nm {
                    for j2 in 0..nm {
                        let idx = ((i1 * nl + i2) * nm + j1) * nm + j2;
                        let xi = |beta: usize| k.right[beta][(i2, i1)];
                        let eta = |beta: usize| l.left[beta][(j1, j2)];
                        b[idx] = checked_dot((0..mid).map(|beta| (xi(beta), eta(beta))), "inner pairing")?;
                        for lam in 0..na {
                            c[idx * na + lam] = checked_dot(
                                (0..mid).map(|beta| (eta(beta), k_through[((beta * nl + i1) * nl + i2) * na + lam])),
                                "left pairing",
                            )?;
                        }
                        for kap in 0..nc {
                            c_prime[idx * nc + kap] = checked_dot(
                                (0..mid).map(|beta| (xi(beta), l_through[((beta * nm + j1) * nm + j2) * nc + kap])),
                                "right pairing",
                            )?;
                        }
                    }
                }
            }
        }
        Ok(Pairings { b, c, c_prime })
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine<'a, I: Iterator<Item = (i64, &'a Vec<i64>)>>(n: usize, terms: I) -> Vec<i64> {
    let mut out = vec![0i64; n];
    for (c, v) in terms {
        if c != 0 {
            for (o, &e) in out.iter_mut().zip(v) {
                *o += c * e;
            }
        }
    }
    out
}

/// `sum_{k1,k2} a_k1 b_k2 m[(k1, k2)]`.
fn bilinear(a: &[i64], m: &IntMatrix, b: &[i64]) -> i64 {
    let mut s = 0;
    for (k1, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (k2, &y) in b.iter().enumerate() {
            s += x * y * m[(k1, k2)];
        }
    }
    s
}

/// Assignments `v^{ij}` for the pairs up to `frontier` in lexicographic
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialMultMap {
    pub frontier: Option<(usize, usize)>,
    pub assignments: Vec<Vec<i64>>,
}

impl PartialMultMap {
    pub fn empty() -> Self {
        PartialMultMap { frontier: None, assignments: Vec::new() }
    }
}

/// A complete multiplication map: `v[i][j]` is the coefficient vector of
/// `xi_i eta_j` in the basis of `M`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MultMap {
    pub v: Vec<Vec<Vec<i64>>>,
}

impl MultMap {
    pub fn to_json(&self, t: &Triple) -> Value {
        let mut out = Map::new();
        for (i, row) in self.v.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let terms: Map<String, Value> = v
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(k, &c)| (t.m.labels[k].clone(), json!(c)))
                    .collect();
                out.insert(format!("{}*{}", t.k.labels[i], t.l.labels[j]), Value::Object(terms));
            }
        }
        Value::Object(out)
    }
}

impl Triple {
    fn dim_ok(&self, i: usize, j: usize, v: &[i64]) -> bool {
        let lhs = self.k.dims[i] * self.l.dims[j];
        let rhs: f64 = v.iter().zip(&self.m.dims).map(|(&c, d)| c as f64 * d).sum();
        (lhs - rhs).abs() <= DIM_TOL * lhs.max(1.0)
    }

    /// Inner product and left and right pairing conditions between two
    /// assigned pairs, in both orders.
    fn pair_ok(&self, p1: (usize, usize), v1: &[i64], p2: (usize, usize), v2: &[i64], opts: SearchOptions) -> bool {
        let ((i1, j1), (i2, j2)) = (p1, p2);
        let vv = dot(v1, v2);
        if vv != self.pairing_b(i1, i2, j1, j2) || vv != self.pairing_b(i2, i1, j2, j1) {
            return false;
        }
        if opts.literal_condition_d
            && (vv != self.pairing_b(i1, i2, j2, j1) || vv != self.pairing_b(i2, i1, j1, j2))
        {
            return false;
        }
        for ((va, (ia, ja)), (vb, (ib, jb))) in [((v1, p1), (v2, p2)), ((v2, p2), (v1, p1))] {
            for (lam, lm) in self.m.left.iter().enumerate() {
                if self.pairing_c(ia, ja, ib, jb, lam) != bilinear(va, lm, vb) {
                    return false;
                }
            }
            if !opts.skip_c_prime {
                for (kap, rm) in self.m.right.iter().enumerate() {
                    // (mubar_k1 mu_k2, kappa) = R^M[kappa][(k2, k1)]
                    if self.pairing_c_prime(ia, ja, ib, jb, kap) != bilinear(vb, rm, va) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn pair_at(&self, idx: usize) -> (usize, usize) {
        let m = self.l.rank();
        (idx / m, idx % m)
    }

    /// All extensions of `map` to the successor of its frontier.
    pub fn extend_partial_map(&self, map: &PartialMultMap, opts: SearchOptions) -> Vec<PartialMultMap> {
        let next = map.assignments.len();
        if next >= self.k.rank() * self.l.rank() {
            return Vec::new();
        }
        let (p, q) = self.pair_at(next);
        let norm = self.pairing_b(p, p, q, q).max(0) as u64;
        sum_of_squares_decompositions(norm, self.m.rank())
            .into_iter()
            .filter(|v| self.dim_ok(p, q, v))
            .filter(|v| self.pair_ok((p, q), v, (p, q), v, opts))
            .filter(|v| {
                map.assignments
                    .iter()
                    .enumerate()
                    .all(|(idx, w)| self.pair_ok((p, q), v, self.pair_at(idx), w, opts))
            })
            .map(|v| {
                let mut assignments = map.assignments.clone();
                assignments.push(v);
                PartialMultMap { frontier: Some((p, q)), assignments }
            })
            .collect()
    }

    fn to_map(&self, pm: &PartialMultMap) -> MultMap {
        let m = self.l.rank();
        MultMap { v: pm.assignments.chunks(m).map(|c| c.to_vec()).collect() }
    }

    /// The three associativity families over all basis elements.
    pub fn associative(&self, map: &MultMap) -> bool {
        let (nl, nm, nn) = self.dims();
        let v = &map.v;
        let apply = |m: &IntMatrix, x: &[i64]| -> Vec<i64> {
            (0..nn).map(|k| (0..nn).map(|k2| m[(k, k2)] * x[k2]).sum()).collect()
        };
        for i in 0..nl {
            for j in 0..nm {
                for rho in 0..self.k.right_ring.rank() {
                    let lhs = combine(nn, (0..nl).map(|x| (self.k.right[rho][(x, i)], &v[x][j])));
                    let rhs = combine(nn, (0..nm).map(|y| (self.l.left[rho][(y, j)], &v[i][y])));
                    if lhs != rhs {
                        return false;
                    }
                }
                for (lam, lm) in self.m.left.iter().enumerate() {
                    let rhs = combine(nn, (0..nl).map(|x| (self.k.left[lam][(x, i)], &v[x][j])));
                    if apply(lm, &v[i][j]) != rhs {
                        return false;
                    }
                }
                for (kap, rm) in self.m.right.iter().enumerate() {
                    let rhs = combine(nn, (0..nm).map(|y| (self.l.right[kap][(y, j)], &v[i][y])));
                    if apply(rm, &v[i][j]) != rhs {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Depth-first completion from the empty map, followed by the
    /// associativity check. Order follows the candidate order at each pair.
    pub fn find_multiplication_maps(&self, opts: SearchOptions) -> Vec<MultMap> {
        let mut out = Vec::new();
        let mut stack = vec![PartialMultMap::empty()];
        let total = self.k.rank() * self.l.rank();
        while let Some(pm) = stack.pop() {
            if pm.assignments.len() == total {
                let map = self.to_map(&pm);
                if self.associative(&map) {
                    out.push(map);
                }
                continue;
            }
            let mut ext = self.extend_partial_map(&pm, opts);
            ext.reverse();
            stack.extend(ext);
        }
        out
    }

    /// Checks every condition of a complete map; returns the first failure.
    pub fn check_map(&self, map: &MultMap, opts: SearchOptions) -> std::result::Result<(), String> {
        let (nl, nm, nn) = self.dims();
        if map.v.len() != nl || map.v.iter().any(|r| r.len() != nm || r.iter().any(|v| v.len() != nn)) {
            return Err("map has the wrong shape".into());
        }
        if map.v.iter().flatten().flatten().any(|&c| c < 0) {
            return Err("negative coefficient".into());
        }
        let pairs: Vec<(usize, usize)> = (0..nl).flat_map(|i| (0..nm).map(move |j| (i, j))).collect();
        for &(i, j) in &pairs {
            if !self.dim_ok(i, j, &map.v[i][j]) {
                return Err(format!("dimension condition fails at ({i}, {j})"));
            }
        }
        for &p1 in &pairs {
            for &p2 in &pairs {
                if !self.pair_ok(p1, &map.v[p1.0][p1.1], p2, &map.v[p2.0][p2.1], opts) {
                    return Err(format!("pairing conditions fail at {p1:?}, {p2:?}"));
                }
            }
        }
        if !self.associative(map) {
            return Err("associativity fails".into());
        }
        Ok(())
    }

    /// Permutations of the basis of `M` that preserve both actions and the
    /// dimensions.
    pub fn m_automorphisms(&self) -> Vec<Vec<usize>> {
        let n = self.m.rank();
        let acts: Vec<&IntMatrix> = self.m.left.iter().chain(&self.m.right).collect();
        let mut out = Vec::new();
        let mut perm = vec![usize::MAX; n];
        let mut used = vec![false; n];
        fn rec(
            pos: usize,
            perm: &mut Vec<usize>,
            used: &mut Vec<bool>,
            acts: &[&IntMatrix],
            dims: &[f64],
            out: &mut Vec<Vec<usize>>,
        ) {
            let n = perm.len();
            if pos == n {
                out.push(perm.clone());
                return;
            }
            for t in 0..n {
                if used[t] || (dims[t] - dims[pos]).abs() > DIM_TOL * dims[pos].max(1.0) {
                    continue;
                }
                perm[pos] = t;
                let ok = (0..=pos).all(|a| {
                    acts.iter().all(|m| m[(perm[a], t)] == m[(a, pos)] && m[(t, perm[a])] == m[(pos, a)])
                });
                if ok {
                    used[t] = true;
                    rec(pos + 1, perm, used, acts, dims, out);
                    used[t] = false;
                }
            }
            perm[pos] = usize::MAX;
        }
        rec(0, &mut perm, &mut used, &acts, &self.m.dims, &mut out);
        out
    }

    /// Indices of one representative per orbit of `maps` under the
    /// automorphisms of `M`.
    pub fn classes_up_to_automorphism(&self, maps: &[MultMap]) -> Vec<usize> {
        let autos = self.m_automorphisms();
        let mut seen: std::collections::BTreeSet<MultMap> = Default::default();
        let mut reps = Vec::new();
        for (idx, map) in maps.iter().enumerate() {
            if seen.contains(map) {
                continue;
            }
            reps.push(idx);
            for perm in &autos {
                let mut img = map.clone();
                for (row, orig) in img.v.iter_mut().zip(&map.v) {
                    for (v, o) in row.iter_mut().zip(orig) {
                        for (k, &c) in o.iter().enumerate() {
                            v[perm[k]] = c;
                        }
                    }
                }
                seen.insert(img);
            }
        }
        reps
    }
}

/// Adjacency `(i, k)` = coefficient of `xi_k` in `x . xi_i`, where `x` is a
/// nonnegative combination of left-ring basis elements.
pub fn fusion_graph_action(module: &FusionBimodule, x: &[i64]) -> Result<BipartiteGraph> {
    if x.len() != module.left_ring.rank() || x.iter().any(|&c| c < 0) || x.iter().all(|&c| c == 0) {
        return Err(Error::Fusion("generator must be a nonzero nonnegative combination".into()));
    }
    let n = module.rank();
    let mut adj = vec![vec![0i64; n]; n];
    for (a, &c) in x.iter().enumerate() {
        for (i, row) in adj.iter_mut().enumerate() {
            for (k, e) in row.iter_mut().enumerate() {
                *e += c * module.left[a][(k, i)];
            }
        }
    }
    let right: Vec<String> = module.labels.iter().map(|l| format!("{l}'")).collect();
    BipartiteGraph::from_adjacency(&module.labels, &right, &adj)
}

/// Adjacency `(j, k)` = coefficient of `mu_k` in `x . eta_j` under the map,
/// where `x` is a nonnegative combination of basis elements of `K`.
pub fn fusion_graph_map(t: &Triple, map: &MultMap, x: &[i64]) -> Result<BipartiteGraph> {
    if x.len() != t.k.rank() || x.iter().any(|&c| c < 0) || x.iter().all(|&c| c == 0) {
        return Err(Error::Fusion("generator must be a nonzero nonnegative combination".into()));
    }
    let adj: Vec<Vec<i64>> = (0..t.l.rank())
        .map(|j| {
            (0..t.m.rank())
                .map(|k| x.iter().enumerate().map(|(i, &c)| c * map.v[i][j][k]).sum())
                .collect()
        })
        .collect();
    BipartiteGraph::from_adjacency(&t.l.labels, &t.m.labels, &adj)
}

/// Dimension defect `max_i |d(x) d(row_i) - sum_k adj_ik d(col_k)|`.
pub fn graph_dimension_defect(adj: &IntMatrix, dx: f64, rows: &[f64], cols: &[f64]) -> f64 {
    (0..adj.nrows())
        .map(|i| {
            let rhs: f64 = (0..adj.ncols()).map(|k| adj[(i, k)] as f64 * cols[k]).sum();
            (dx * rows[i] - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Bimodules by name: `regular:<ring>` for a built-in ring, else a JSON path.
pub fn bimodule_by_spec(spec: &str) -> Result<FusionBimodule> {
    if let Some(name) = spec.strip_prefix("regular:") {
        return FusionBimodule::regular(&FusionRing::builtin(name)?);
    }
    match load_fusion_data(std::path::Path::new(spec))? {
        FusionData::Bimodule(b) => Ok(b),
        FusionData::Ring(r) => FusionBimodule::regular(&r),
    }
}
