//! The four explicit double-broom and quipu connections.
//!
//! Each shape is `G` vertical on both sides, `H` bottom, `K` top. Entries
//! fixed by the constructions are pinned and the rest is completed by the
//! propagation solver; the algebraic identities behind each construction are
//! recorded as residuals.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::Serialize;

use crate::completion::ConnectionProblem;
use crate::connection::{
    complete_orthonormal_real, real_matrix, verify, CMatrix, Connection, PfData, SquareShape,
    VERIFY_TOL,
};
use crate::error::{Error, Result};
use crate::graph::{int_matrix, spectral, TraceRule, SPECTRAL_TOL};

pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Identity {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub residual: f64,
}

impl Identity {
    pub fn new(name: &str, value: f64, expected: f64) -> Self {
        Identity { name: name.to_string(), value, expected, residual: (value - expected).abs() }
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub shape: SquareShape,
    pub connection: Connection,
    pub identities: Vec<Identity>,
}

impl CatalogEntry {
    pub fn max_identity_residual(&self) -> f64 {
        self.identities.iter().map(|i| i.residual).fold(0.0, f64::max)
    }
}

pub const CATALOG_NAMES: [&str; 4] = ["small_broom", "medium_broom", "large_broom", "quipu"];

pub fn by_name(name: &str) -> Result<CatalogEntry> {
    match name {
        "small_broom" => small_broom_connection(),
        "medium_broom" => medium_broom_connection(),
        "large_broom" => large_broom_connection(0.0),
        "quipu" => quipu_connection(),
        _ => Err(Error::UnknownVertex(format!("no catalog entry named {name}"))),
    }
}

/// Shape of a named catalog entry, without building the connection.
pub fn shape_by_name(name: &str) -> Result<SquareShape> {
    match name {
        "small_broom" => small_shape(),
        "medium_broom" => medium_shape(),
        "large_broom" => large_shape(),
        "quipu" => quipu_shape(),
        _ => Err(Error::UnknownVertex(format!("no catalog entry named {name}"))),
    }
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn broom_shape(
    g: &[Vec<i64>],
    h: &[Vec<i64>],
    k: &[Vec<i64>],
    black: &[&str],
    white: &[&str],
) -> Result<SquareShape> {
    let gm = int_matrix(g)?;
    SquareShape::with_labels(
        gm.clone(),
        int_matrix(h)?,
        int_matrix(k)?,
        gm,
        strs(black),
        strs(white),
        strs(black),
        strs(white),
    )
}

const SMALL_P: [&str; 2] = ["A", "B"];
const SMALL_Q: [&str; 7] = ["a3", "a2", "a1", "a0", "b1", "b2", "b3"];

pub fn small_shape() -> Result<SquareShape> {
    broom_shape(
        &[vec![1, 1, 1, 1, 0, 0, 0], vec![0, 0, 0, 1, 1, 1, 1]],
        &[vec![3, 1], vec![1, 3]],
        &[
            vec![0, 1, 1, 1, 0, 0, 0],
            vec![1, 0, 1, 1, 0, 0, 0],
            vec![1, 1, 1, 0, 1, 0, 0],
            vec![1, 1, 0, 2, 0, 1, 1],
            vec![0, 0, 1, 0, 1, 1, 1],
            vec![0, 0, 0, 1, 1, 0, 1],
            vec![0, 0, 0, 1, 1, 1, 0],
        ],
        &SMALL_P,
        &SMALL_Q,
    )
}

const MEDIUM_P: [&str; 3] = ["A1", "A0", "B1"];
const MEDIUM_Q: [&str; 8] = ["a3", "a2", "a1", "a0", "b0", "b1", "b2", "b3"];

pub fn medium_shape() -> Result<SquareShape> {
    broom_shape(
        &[
            vec![1, 1, 1, 1, 0, 0, 0, 0],
            vec![0, 0, 0, 1, 1, 0, 0, 0],
            vec![0, 0, 0, 0, 1, 1, 1, 1],
        ],
        &[vec![2, 1, 1], vec![1, 1, 1], vec![1, 1, 2]],
        &[
            vec![1, 0, 0, 1, 0, 0, 0, 1],
            vec![0, 1, 0, 1, 0, 0, 1, 0],
            vec![0, 0, 2, 0, 1, 0, 0, 0],
            vec![1, 1, 0, 1, 1, 1, 0, 0],
            vec![0, 0, 1, 1, 1, 0, 1, 1],
            vec![0, 0, 0, 1, 0, 2, 0, 0],
            vec![0, 1, 0, 0, 1, 0, 1, 0],
            vec![1, 0, 0, 0, 1, 0, 0, 1],
        ],
        &MEDIUM_P,
        &MEDIUM_Q,
    )
}

const LARGE_P: [&str; 5] = ["A2", "A1", "A0", "B1", "B2"];
const LARGE_Q: [&str; 10] = ["a4", "a3", "a2", "a1", "a0", "b0", "b1", "b2", "b3", "b4"];

pub fn large_shape() -> Result<SquareShape> {
    broom_shape(
        &[
            vec![1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
            vec![0, 0, 0, 1, 1, 0, 0, 0, 0, 0],
            vec![0, 0, 0, 0, 1, 1, 0, 0, 0, 0],
            vec![0, 0, 0, 0, 0, 1, 1, 0, 0, 0],
            vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1],
        ],
        &[
            vec![3, 2, 1, 1, 2],
            vec![2, 0, 1, 1, 1],
            vec![1, 1, 0, 1, 1],
            vec![1, 1, 1, 0, 2],
            vec![2, 1, 1, 2, 3],
        ],
        &[
            vec![0, 0, 1, 2, 0, 1, 0, 0, 0, 2],
            vec![0, 1, 1, 1, 1, 0, 1, 0, 1, 0],
            vec![1, 1, 0, 1, 1, 0, 1, 1, 0, 0],
            vec![2, 1, 1, 1, 1, 1, 1, 1, 1, 0],
            vec![0, 1, 1, 1, 0, 1, 1, 0, 0, 1],
            vec![1, 0, 0, 1, 1, 0, 1, 1, 1, 0],
            vec![0, 1, 1, 1, 1, 1, 1, 1, 1, 2],
            vec![0, 0, 1, 1, 0, 1, 1, 0, 1, 1],
            vec![0, 1, 0, 1, 0, 1, 1, 1, 1, 0],
            vec![2, 0, 0, 0, 1, 0, 2, 1, 0, 0],
        ],
        &LARGE_P,
        &LARGE_Q,
    )
}

const QUIPU_P: [&str; 7] = ["A3", "A2", "A1", "A0", "A-1", "A-2", "A-3"];
const QUIPU_Q: [&str; 9] = ["a4", "a3", "a2", "a1", "a0", "a-1", "a-2", "a-3", "a-4"];

pub fn quipu_shape() -> Result<SquareShape> {
    broom_shape(
        &[
            vec![1, 0, 0, 0, 0, 0, 0, 0, 0],
            vec![1, 1, 1, 0, 0, 0, 0, 0, 0],
            vec![0, 0, 1, 1, 0, 0, 0, 0, 0],
            vec![0, 0, 0, 1, 1, 1, 0, 0, 0],
            vec![0, 0, 0, 0, 0, 1, 1, 0, 0],
            vec![0, 0, 0, 0, 0, 0, 1, 1, 1],
            vec![0, 0, 0, 0, 0, 0, 0, 0, 1],
        ],
        &[
            vec![0, 0, 1, 0, 1, 0, 0],
            vec![0, 1, 1, 2, 1, 1, 0],
            vec![1, 1, 1, 2, 1, 1, 1],
            vec![0, 2, 2, 2, 2, 2, 0],
            vec![1, 1, 1, 2, 1, 1, 1],
            vec![0, 1, 1, 2, 1, 1, 0],
            vec![0, 0, 1, 0, 1, 0, 0],
        ],
        &[
            vec![0, 0, 1, 1, 0, 1, 1, 0, 0],
            vec![0, 1, 0, 1, 0, 1, 0, 1, 0],
            vec![1, 0, 1, 1, 2, 1, 1, 0, 1],
            vec![1, 1, 1, 2, 0, 2, 1, 1, 1],
            vec![0, 0, 2, 0, 2, 0, 2, 0, 0],
            vec![1, 1, 1, 2, 0, 2, 1, 1, 1],
            vec![1, 0, 1, 1, 2, 1, 1, 0, 1],
            vec![0, 1, 0, 1, 0, 1, 0, 1, 0],
            vec![0, 0, 1, 1, 0, 1, 1, 0, 0],
        ],
        &QUIPU_P,
        &QUIPU_Q,
    )
}

/// Named PF values of the vertical graph `G` (same on both sides).
struct Lambda {
    shape: SquareShape,
    pf: PfData,
}

impl Lambda {
    fn new(shape: &SquareShape) -> Result<Self> {
        Ok(Lambda { shape: shape.clone(), pf: PfData::from_shape(shape)? })
    }

    fn get(&self, name: &str) -> f64 {
        if let Ok(i) = self.shape.p_index(name) {
            self.pf.lambda_p[i]
        } else {
            self.pf.lambda_q[self.shape.q_index(name).expect("vertex exists")]
        }
    }
}

fn finish(name: &str, problem: ConnectionProblem, identities: Vec<Identity>) -> Result<CatalogEntry> {
    let connection = problem.solve()?;
    let report = verify(&connection, VERIFY_TOL);
    if !report.passed() {
        return Err(Error::Completion(format!(
            "{name}: completed connection fails verification (u {:.2e}, v {:.2e})",
            report.max_unitarity_residual_u, report.max_unitarity_residual_v
        )));
    }
    Ok(CatalogEntry { name: name.to_string(), shape: connection.shape.clone(), connection, identities })
}

fn rm(rows: &[Vec<f64>]) -> CMatrix {
    real_matrix(rows)
}

pub fn small_broom_connection() -> Result<CatalogEntry> {
    let shape = small_shape()?;
    let lam = Lambda::new(&shape)?;
    let mut pr = ConnectionProblem::new(shape.clone(), lam.pf.clone())?;
    pr.pin_scalar_blocks(1.0);
    let h = 0.5f64.sqrt();
    pr.pin_u_sub("A", "a0", "a3", "A", &rm(&[vec![0.0, 0.0, h]]))?;
    pr.pin_u_sub("A", "a0", "a2", "A", &rm(&[vec![0.0, 0.0, -h]]))?;
    pr.pin_u_sub("A", "a0", "a0", "A", &rm(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]))?;
    pr.pin_u_sub("B", "a0", "a0", "B", &rm(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]))?;
    pr.pin_u_sub("B", "a0", "b2", "B", &rm(&[vec![-h, 0.0, 0.0]]))?;
    pr.pin_u_sub("B", "a0", "b3", "B", &rm(&[vec![h, 0.0, 0.0]]))?;
    pr.pin_v_sub("a0", "A", "A", "a3", &rm(&[vec![0.0], vec![0.0], vec![h]]))?;
    pr.pin_v_sub("a0", "A", "A", "a2", &rm(&[vec![0.0], vec![0.0], vec![-h]]))?;
    pr.pin_v_sub("a0", "B", "B", "b2", &rm(&[vec![-h], vec![0.0], vec![0.0]]))?;
    pr.pin_v_sub("a0", "B", "B", "b3", &rm(&[vec![h], vec![0.0], vec![0.0]]))?;

    let gk = &shape.g * &shape.k;
    let norm_sq = spectral(&shape.g_graph()?, SPECTRAL_TOL)?.index();
    let ids = vec![
        Identity::new("index ||G||^2", norm_sq, 5.0),
        Identity::new("H(A,A)", shape.h[(0, 0)] as f64, 3.0),
        Identity::new("(GK)(A,a0)", gk[(0, 3)] as f64, 4.0),
        Identity::new("lambda(A)/lambda(a3)", lam.get("A") / lam.get("a3"), 5f64.sqrt()),
    ];
    finish("small_broom", pr, ids)
}

pub fn medium_broom_connection() -> Result<CatalogEntry> {
    let shape = medium_shape()?;
    let lam = Lambda::new(&shape)?;
    let l = |n: &str| lam.get(n);
    let mut pr = ConnectionProblem::new(shape.clone(), lam.pf.clone())?;
    for s in ["a2", "a3", "b2", "b3"] {
        pr.pin_u("A0", s, &rm(&[vec![1.0]]))?;
    }
    let x = (l("a3") * l("A0") / (l("A1") * l("a0"))).sqrt();
    let x0 = (1.0 - 2.0 * x * x).sqrt();
    // columns (alpha | x): the last column is (x3, x2, x0)
    let ba = complete_orthonormal_real(&[vec![x, x, x0]], 3)?.transpose();
    let ua = CMatrix::from_columns(&[ba.column(1).clone_owned(), ba.column(2).clone_owned(), ba.column(0).clone_owned()]);
    pr.pin_u("A1", "a0", &ua)?;
    let bb = complete_orthonormal_real(&[vec![x0, x, x]], 3)?.transpose();
    pr.pin_u("B1", "b0", &bb)?;

    let r3 = 3f64.sqrt();
    let alpha = |i: usize| [ua[(i, 0)].re, ua[(i, 1)].re];
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    let (a3, a2, a0) = (alpha(0), alpha(1), alpha(2));
    let tr = spectral(&shape.g_graph()?, SPECTRAL_TOL)?.trace_weights(TraceRule::LeftIsSum);
    let leaf = tr.1[0];
    let ids = vec![
        Identity::new("x3^2 = (3-sqrt3)/3", x * x, (3.0 - r3) / 3.0),
        Identity::new("x0 = sqrt((-3+2sqrt3)/3)", x0, ((-3.0 + 2.0 * r3) / 3.0).sqrt()),
        Identity::new("<alpha3,alpha2> = -(3-sqrt3)/3", dot(a3, a2), -(3.0 - r3) / 3.0),
        Identity::new("||alpha3||^2 = sqrt3/3", dot(a3, a3), r3 / 3.0),
        Identity::new("||alpha2||^2 = sqrt3/3", dot(a2, a2), r3 / 3.0),
        Identity::new(
            "<alpha3,alpha0> = -sqrt((-5+3sqrt3)/3)",
            dot(a3, a0),
            -((-5.0 + 3.0 * r3) / 3.0).sqrt(),
        ),
        Identity::new("||alpha0||^2 = (6-2sqrt3)/3", dot(a0, a0), (6.0 - 2.0 * r3) / 3.0),
        Identity::new("lambda(A1) = 3+sqrt3 (leaves 1)", tr.0[0] / leaf, 3.0 + r3),
        Identity::new("lambda(A0) = 2sqrt3 (leaves 1)", tr.0[1] / leaf, 2.0 * r3),
        Identity::new("lambda(B1) = 3+sqrt3 (leaves 1)", tr.0[2] / leaf, 3.0 + r3),
    ];
    finish("medium_broom", pr, ids)
}

/// Root of the large-broom identity system on the line `s + t = t0`.
pub fn large_broom_t0() -> f64 {
    2.0 * PI - (((-1.0 + 17f64.sqrt()) / 2.0).sqrt()).atan()
}

/// The displayed closed form, read literally: the square root covers only
/// the numerator.
pub fn large_broom_t0_literal() -> f64 {
    2.0 * PI - ((-1.0 + 17f64.sqrt()).sqrt() / 2.0).atan()
}

/// Intermediate vectors of the large-broom construction at `(s, t)`.
#[derive(Debug, Clone)]
pub struct LargeCascade {
    pub u_a2a1: [[f64; 5]; 5],
    pub alpha: [[f64; 2]; 3],
    pub xi: [[f64; 3]; 3],
    pub g1: Vector3<f64>,
    pub g2: Vector3<f64>,
    pub g3: Vector3<f64>,
    pub f3: Vector3<f64>,
    pub f4: Vector3<f64>,
    pub h1: Vector3<f64>,
    /// `F1, F2, F3`.
    pub f: [f64; 3],
    /// `G_{ij}`.
    pub g: [[f64; 3]; 3],
}

/// Evaluate the large-broom construction with the displayed eigenvalues
/// (leaves 1, `lambda(a1) = (-1+sqrt17)/2`).
pub fn large_cascade(s: f64, t: f64) -> LargeCascade {
    let r17 = 17f64.sqrt();
    let sq = f64::sqrt;
    let la1 = (-1.0 + r17) / 2.0;
    let (la0, la2, la3) = (1.0, 1.0, 1.0);
    let x1 = Vector3::new(sq(5.0 - r17) / 2.0, 0.0, sq(-1.0 + r17) / 2.0);
    let x2 = Vector3::new(-sq((-11.0 + 3.0 * r17) / 4.0), sq((-3.0 + r17) / 2.0), sq(21.0 - 5.0 * r17) / 2.0);
    let q1 = x1 * s.cos() + x2 * s.sin();
    let q2 = -x1 * s.sin() + x2 * s.cos();
    let c = sq(la1 / la0);
    let mut alpha = [[0.0; 2]; 3];
    for i in 0..3 {
        alpha[i] = [q2[i] / c, -q1[i] / c];
    }
    let k = -sq((7.0 - r17) / (1.0 + r17));
    let xi3 = [sq((5.0 - r17) / 2.0), sq((5.0 - r17) / 2.0), -sq(-4.0 + r17)];
    let mut xi = [[0.0; 3]; 3];
    for i in 0..3 {
        xi[i] = [k * alpha[i][0], k * alpha[i][1], xi3[i]];
    }
    let g0 = sq((1.0 + r17) / 8.0);
    let w0 = sq((7.0 - r17) / 8.0);
    let mut u = [[0.0; 5]; 5];
    u[0] = [g0, 0.0, 0.0, w0, 0.0];
    u[1] = [0.0, g0, 0.0, 0.0, w0];
    for i in 0..3 {
        u[i + 2] = [xi[i][0], xi[i][1], xi[i][2], alpha[i][0], alpha[i][1]];
    }
    let v3 = |a: [f64; 3]| Vector3::new(a[0], a[1], a[2]);
    let (xa3, xa2, xa1) = (v3(xi[0]), v3(xi[1]), v3(xi[2]));
    let g2 = Vector3::new(t.cos(), t.sin(), 0.0);
    let g1 = Vector3::new(-t.sin(), t.cos(), 0.0);
    let g3 = g2.cross(&xa3) * sq(la1 / la3);
    let f3 = g3.cross(&xa2).normalize();
    let h1 = g3.cross(&f3);
    let r = sq((-45.0 + 11.0 * r17) / 16.0);
    let f = [
        h1.dot(&g1) / la1 + (-3.0 + r17) / 4.0,
        h1.dot(&xa1) / sq(la1) + r,
        g1.dot(&xa1) / sq(la1) - r,
    ];
    let col = xa2 * sq(la1 / la2);
    let f4 = f3.cross(&col);
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let base = (-f4[i] * f4[j] + h1[i] * h1[j] + g1[i] * g1[j]) / la1 + xa1[i] * xa1[j];
            g[i][j] = if i == j { base + 1.0 / la1 - 1.0 } else { base };
        }
    }
    LargeCascade { u_a2a1: u, alpha, xi, g1, g2, g3, f3, f4, h1, f, g }
}

fn rows3(vs: &[Vector3<f64>]) -> CMatrix {
    CMatrix::from_fn(vs.len(), 3, |i, j| Complex64::new(vs[i][j], 0.0))
}

fn large_mirror(n: &str) -> String {
    if n == "A0" {
        return n.to_string();
    }
    let (head, tail) = n.split_at(1);
    let head = match head {
        "A" => "B",
        "B" => "A",
        "a" => "b",
        "b" => "a",
        other => other,
    };
    format!("{head}{tail}")
}

/// Large double broom at parameter `s`, with `t = t0 - s`.
pub fn large_broom_connection(s: f64) -> Result<CatalogEntry> {
    if !s.is_finite() {
        return Err(Error::Inconsistent(format!("parameter s = {s} is not finite")));
    }
    let t = large_broom_t0() - s;
    let c = large_cascade(s, t);
    let worst = c.f.iter().chain(c.g.iter().flatten()).fold(0.0f64, |m, x| m.max(x.abs()));
    if worst > IDENTITY_TOL {
        return Err(Error::Inconsistent(format!(
            "s = {s} is off the solution line: identity residual {worst:.3e}"
        )));
    }
    let shape = large_shape()?;
    let lam = Lambda::new(&shape)?;
    let mut pr = ConnectionProblem::new(shape.clone(), lam.pf.clone())?;
    let u: Vec<Vec<f64>> = c.u_a2a1.iter().map(|r| r.to_vec()).collect();
    pr.pin_u("A2", "a1", &rm(&u))?;
    pr.pin_u("A2", "a2", &rows3(&[Vector3::new(0.0, 0.0, 1.0), c.g2, c.g1]))?;
    pr.pin_u("A2", "a3", &rows3(&[c.g3, c.f3, c.h1]))?;
    pr.pin_v(
        "a4",
        "A2",
        &rm(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]),
    )?;
    let f4 = c.f4.normalize();
    let e = complete_orthonormal_real(&[f4.iter().copied().collect()], 3)?;
    let e1 = Vector3::new(e[(1, 0)].re, e[(1, 1)].re, e[(1, 2)].re);
    let e2 = Vector3::new(e[(2, 0)].re, e[(2, 1)].re, e[(2, 2)].re);
    pr.pin_u("A2", "a4", &rows3(&[f4, e1, e2]))?;
    let la1 = (-1.0 + 17f64.sqrt()) / 2.0;
    let sq = la1.sqrt();
    let xa1 = Vector3::new(c.xi[2][0], c.xi[2][1], c.xi[2][2]);
    let cols = [e1 / sq, e2 / sq, c.h1 / sq, c.g1 / sq, xa1];
    let top: Vec<Vec<f64>> = (0..3).map(|i| cols.iter().map(|v| v[i]).collect()).collect();
    let full = complete_orthonormal_real(&top, 5)?;
    pr.pin_v("a1", "A2", &full)?;
    pr.mirror(large_mirror)?;

    let r17 = 17f64.sqrt();
    let kxi = -((7.0 - r17) / (1.0 + r17)).sqrt();
    let xi_dev = (0..3)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (c.xi[i][j] - kxi * c.alpha[i][j]).abs())
        .fold(0.0, f64::max);
    let n2 = |a: [f64; 2]| a[0] * a[0] + a[1] * a[1];
    let mut ids = vec![
        Identity::new("index ||G||^2 = (5+sqrt17)/2", spectral(&shape.g_graph()?, SPECTRAL_TOL)?.index(), (5.0 + r17) / 2.0),
        Identity::new("xi_ij = -sqrt((7-sqrt17)/(1+sqrt17)) alpha_ij", xi_dev, 0.0),
        Identity::new("||alpha1||^2 = (-3+sqrt17)/2", n2(c.alpha[2]), (-3.0 + r17) / 2.0),
        Identity::new("||alpha2||^2 = (7-sqrt17)/8", n2(c.alpha[1]), (7.0 - r17) / 8.0),
        Identity::new("||alpha3||^2 = (7-sqrt17)/8", n2(c.alpha[0]), (7.0 - r17) / 8.0),
        Identity::new("xi13 = -sqrt(-4+sqrt17)", c.xi[2][2], -(-4.0 + r17).sqrt()),
        Identity::new("F1", c.f[0], 0.0),
        Identity::new("F2", c.f[1], 0.0),
        Identity::new("F3", c.f[2], 0.0),
    ];
    for i in 0..3 {
        for j in i..3 {
            ids.push(Identity::new(&format!("G{}{}", i + 1, j + 1), c.g[i][j], 0.0));
        }
    }
    finish("large_broom", pr, ids)
}

/// Largest root of `x^3 - 8x^2 + 17x - 5`, by bisection on `[4, 5]`.
pub fn quipu_t() -> f64 {
    let p = |x: f64| ((x - 8.0) * x + 17.0) * x - 5.0;
    let (mut lo, mut hi) = (4.0, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn quipu_connection() -> Result<CatalogEntry> {
    let shape = quipu_shape()?;
    let lam = Lambda::new(&shape)?;
    let mut pr = ConnectionProblem::new(shape.clone(), lam.pf.clone())?;
    for sg in ["", "-"] {
        let a_up = |i: i32| format!("A{sg}{i}");
        let a_lo = |i: i32| format!("a{sg}{i}");
        for (p, s) in [(3, 2), (2, 4), (2, 3), (1, 3)] {
            pr.pin_u(&a_up(p), &a_lo(s), &rm(&[vec![1.0]]))?;
            pr.pin_v(&a_lo(s), &a_up(p), &rm(&[vec![1.0]]))?;
        }
        pr.pin_u(&a_up(3), &a_lo(1), &rm(&[vec![-1.0]]))?;
        pr.pin_v(&a_lo(1), &a_up(3), &rm(&[vec![-1.0]]))?;
    }
    let ids = quipu_identities(&shape)?;
    finish("quipu", pr, ids)
}

fn quipu_identities(shape: &SquareShape) -> Result<Vec<Identity>> {
    let sp = spectral(&shape.g_graph()?, SPECTRAL_TOL)?;
    let (black, white) = sp.trace_weights(TraceRule::RightIsSum);
    let a0 = black[shape.p_index("A0")?];
    let l = |n: &str| -> f64 {
        match shape.p_index(n) {
            Ok(i) => black[i] / a0,
            Err(_) => white[shape.q_index(n).expect("vertex exists")] / a0,
        }
    };
    let t = quipu_t();
    let (t2, t3, t4, t5) = (t * t, t.powi(3), t.powi(4), t.powi(5));
    let mut ids = vec![
        Identity::new("index ||G||^2 = t", sp.index(), t),
        Identity::new("lambda(a0) = 1", l("a0"), 1.0),
        Identity::new("lambda(a1) = (t-1)/2", l("a1"), (t - 1.0) / 2.0),
        Identity::new("lambda(A1) = (t-3)/2", l("A1"), (t - 3.0) / 2.0),
        Identity::new("lambda(a2) = (t^2-4t+1)/2", l("a2"), (t2 - 4.0 * t + 1.0) / 2.0),
        Identity::new("lambda(A2) = (t^2-5t+4)/2", l("A2"), (t2 - 5.0 * t + 4.0) / 2.0),
        Identity::new("lambda(a3) = (t^2-5t+4)/2", l("a3"), (t2 - 5.0 * t + 4.0) / 2.0),
        Identity::new("lambda(A3) = (t^3-7t^2+13t-5)/(2t)", l("A3"), (t3 - 7.0 * t2 + 13.0 * t - 5.0) / (2.0 * t)),
        Identity::new("lambda(a4) = (t^3-7t^2+13t-5)/2", l("a4"), (t3 - 7.0 * t2 + 13.0 * t - 5.0) / 2.0),
    ];
    let one = |name: &str, v: f64| Identity::new(name, v, 1.0);
    ids.push(one(
        "x1^2+y1^2 = lambda(A3)(lambda(a1)+lambda(a2))/(lambda(a4)lambda(A1))",
        l("A3") * (l("a1") + l("a2")) / (l("a4") * l("A1")),
    ));
    ids.push(one("x2^2+y2^2 = (t^3-7t^2+13t-5)/(t^2-4t)", (t3 - 7.0 * t2 + 13.0 * t - 5.0) / (t2 - 4.0 * t)));
    ids.push(one(
        "x3^2+y3^2+z3^2 = (-t^5+12t^4-49t^3+76t^2-33t+5)/(t^3-5t^2+4t)",
        (-t5 + 12.0 * t4 - 49.0 * t3 + 76.0 * t2 - 33.0 * t + 5.0) / (t3 - 5.0 * t2 + 4.0 * t),
    ));
    ids.push(one(
        "||alpha4||^2 = (-t^5+12t^4-48t^3+73t^2-37t+5)/(2t^4-14t^3+26t^2-10t)",
        (-t5 + 12.0 * t4 - 48.0 * t3 + 73.0 * t2 - 37.0 * t + 5.0)
            / (2.0 * t4 - 14.0 * t3 + 26.0 * t2 - 10.0 * t),
    ));
    ids.push(one(
        "||alpha4||^2 = (lambda(A2)lambda(a1)-lambda(A3)lambda(a2))/(lambda(A0)lambda(a4))",
        (l("A2") * l("a1") - l("A3") * l("a2")) / (l("A0") * l("a4")),
    ));
    ids.push(one(
        "y4^2+||gamma4||^2 = (-t^4+9t^3-25t^2+24t-5)/(2t)",
        (-t4 + 9.0 * t3 - 25.0 * t2 + 24.0 * t - 5.0) / (2.0 * t),
    ));
    ids.push(one(
        "X' column norm = (t^4-9t^3+23t^2-14t+5)/(-2t^2+8t)",
        (t4 - 9.0 * t3 + 23.0 * t2 - 14.0 * t + 5.0) / (-2.0 * t2 + 8.0 * t),
    ));
    ids.push(one(
        "X' column norm = (lambda(a2)lambda(A0)-lambda(a2)lambda(A3)-lambda(a3)lambda(A1))/(lambda(a0)lambda(A2))",
        (l("a2") * l("A0") - l("a2") * l("A3") - l("a3") * l("A1")) / (l("a0") * l("A2")),
    ));
    ids.push(one(
        "Y' column norm = (t^4-9t^3+25t^2-22t+7)/2",
        (t4 - 9.0 * t3 + 25.0 * t2 - 22.0 * t + 7.0) / 2.0,
    ));
    ids.push(one(
        "Y' column norm = (lambda(A0)lambda(a2)-lambda(A1)lambda(a1)+lambda(A2)lambda(a4))/(lambda(a0)lambda(A1))",
        (l("A0") * l("a2") - l("A1") * l("a1") + l("A2") * l("a4")) / (l("a0") * l("A1")),
    ));
    ids.push(one(
        "x6^2+y6^2 = (t^4-11t^3+41t^2-56t+17)/2",
        (t4 - 11.0 * t3 + 41.0 * t2 - 56.0 * t + 17.0) / 2.0,
    ));
    ids.push(one(
        "x6^2+y6^2 = lambda(A2)lambda(a4)/(lambda(A0)lambda(a1)) + lambda(A1)/lambda(A0)",
        l("A2") * l("a4") / (l("A0") * l("a1")) + l("A1") / l("A0"),
    ));
    Ok(ids)
}

/// Closed form of `||G||^2` for each catalog entry.
pub fn stated_norm_sq(name: &str) -> Result<f64> {
    match name {
        "small_broom" => Ok(5.0),
        "medium_broom" => Ok(3.0 + 3f64.sqrt()),
        "large_broom" => Ok((5.0 + 17f64.sqrt()) / 2.0),
        "quipu" => Ok(quipu_t()),
        _ => Err(Error::UnknownVertex(format!("no catalog entry named {name}"))),
    }
}

/// Known indices between 4 and 5.25 with their closed forms.
pub fn index_list() -> Vec<(&'static str, f64)> {
    vec![
        ("(5+sqrt13)/2", (5.0 + 13f64.sqrt()) / 2.0),
        ("root of x^3-8x^2+17x-5", quipu_t()),
        ("(5+sqrt17)/2", (5.0 + 17f64.sqrt()) / 2.0),
        ("3+sqrt3", 3.0 + 3f64.sqrt()),
        ("(5+sqrt21)/2", (5.0 + 21f64.sqrt()) / 2.0),
        ("5", 5.0),
        ("5.04892", 5.04892),
        ("3+sqrt5", 3.0 + 5f64.sqrt()),
    ]
}

/// A vertical graph by name: a catalog entry (its `G`), `starABC..` with
/// single-digit arm lengths, or `star:a,b,c,..`.
pub fn graph_by_name(name: &str) -> Result<crate::graph::BipartiteGraph> {
    if let Some(arms) = name.strip_prefix("star:") {
        let arms = arms
            .split(',')
            .map(|a| a.trim().parse::<usize>().map_err(|e| Error::Parse(format!("arm length {a}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        return crate::graph::make_star(&arms);
    }
    if let Some(digits) = name.strip_prefix("star") {
        if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
            let arms: Vec<usize> = digits.chars().map(|c| c as usize - '0' as usize).collect();
            return crate::graph::make_star(&arms);
        }
    }
    shape_by_name(name)?.g_graph()
}
