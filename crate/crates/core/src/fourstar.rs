//! One-parameter family of bi-unitary connections on the four-star
//! `S(i,i,j,j)` and its index table.
//!
//! The square has `G` (black x white) as left vertical and bottom inclusion
//! and `G^t` on the other two sides. The only `4 x 4` block is `u^{(A,A)}`,
//! indexed by the first vertices `a1, b1, c1, d1` of the four arms. Arms `a`
//! and `d` carry the larger first-vertex weight, i.e. they are the longer
//! arms, so that the parameter curve `t(s)` is defined for every `s`.

use num_complex::Complex64;
use serde::Serialize;

use crate::completion::ConnectionProblem;
use crate::connection::{
    complete_orthonormal, unitarity_residual, verify, CMatrix, CVector, Connection, PfData,
    SquareShape, VERIFY_TOL,
};
use crate::error::{Error, Result};
use crate::graph::{make_star, spectral, BipartiteGraph, SpectralData, SPECTRAL_TOL};

pub const UNITARY_TOL: f64 = 1e-12;
const ARCCOS_SLACK: f64 = 1e-12;
/// Arm length standing in for an infinite arm.
pub const INFINITE_ARM: usize = 60;

#[derive(Debug, Clone)]
pub struct FourStarConstants {
    pub i: usize,
    pub j: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub beta: f64,
    pub xi: f64,
    pub graph: BipartiteGraph,
    pub lambda: SpectralData,
}

impl FourStarConstants {
    /// Arm lengths in the order `a, b, c, d`.
    pub fn arms(&self) -> [usize; 4] {
        let (long, short) = (self.i.max(self.j), self.i.min(self.j));
        [long, short, short, long]
    }

    pub fn norm_sq(&self) -> f64 {
        self.lambda.index()
    }
}

fn star_arms(i: usize, j: usize) -> [usize; 4] {
    let (long, short) = (i.max(j), i.min(j));
    [long, short, short, long]
}

pub fn fourstar_constants(i: usize, j: usize) -> Result<FourStarConstants> {
    if i == 0 || j == 0 {
        return Err(Error::Dimension("arm lengths must be at least 1".into()));
    }
    let graph = make_star(&star_arms(i, j))?;
    let lambda = spectral(&graph, SPECTRAL_TOL)?;
    let white = |name: &str| -> Result<f64> {
        let k = graph.right_index(name).ok_or_else(|| Error::UnknownVertex(name.into()))?;
        Ok(lambda.pf_right[k])
    };
    let center = lambda.pf_left[graph.left_index("A").ok_or_else(|| Error::UnknownVertex("A".into()))?];
    let (la, lb) = (white("a1")?, white("b1")?);
    let alpha3 = la / center;
    let alpha2 = (la * lb).sqrt() / center;
    let beta = lb / center;
    let a1sq = 1.0 - 2.0 * alpha2 * alpha2 - alpha3 * alpha3;
    let xisq = 1.0 - 2.0 * alpha2 * alpha2 - beta * beta;
    if a1sq < -1e-12 || xisq < -1e-12 {
        return Err(Error::Inconsistent(format!(
            "normalization fails: 1-2a2^2-a3^2 = {a1sq:.3e}, 1-2a2^2-b^2 = {xisq:.3e}"
        )));
    }
    Ok(FourStarConstants {
        i,
        j,
        alpha1: a1sq.max(0.0).sqrt(),
        alpha2,
        alpha3,
        beta,
        xi: xisq.max(0.0).sqrt(),
        graph,
        lambda,
    })
}

/// The `t` with `|z1| = |z2| = 1` on the principal arccos branch.
pub fn t_of_s(c: &FourStarConstants, s: f64) -> Result<f64> {
    let arg = (c.beta * c.beta - c.xi * c.xi + c.alpha1 * c.alpha1 * s.cos()) / (c.alpha3 * c.alpha3);
    if !arg.is_finite() || arg.abs() > 1.0 + ARCCOS_SLACK {
        return Err(Error::Inconsistent(format!("arccos argument {arg} outside [-1, 1]")));
    }
    Ok(0.5 * (s - arg.clamp(-1.0, 1.0).acos()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPoint {
    pub s: f64,
    pub t: f64,
    pub w: Complex64,
    pub z1: Complex64,
    pub z2: Complex64,
    pub z3: Complex64,
    pub block: CMatrix,
}

pub fn family_point(c: &FourStarConstants, s: f64) -> Result<FamilyPoint> {
    let t = t_of_s(c, s)?;
    let w = Complex64::from_polar(1.0, s);
    let z3 = Complex64::from_polar(1.0, t);
    let (a1, a2, a3, b, xi) = (c.alpha1, c.alpha2, c.alpha3, c.beta, c.xi);
    let one = Complex64::new(1.0, 0.0);
    let z1 = -((one + w) * a1 + (z3 - w * z3.conj()) * a3) / (2.0 * xi);
    let z2 = -((one - w) * a1 + (z3 + w * z3.conj()) * a3) / (2.0 * b);
    let r = |x: f64| Complex64::new(x, 0.0);
    let rows = [
        CVector::from_vec(vec![r(a1), r(a2), r(a2), r(a3)]),
        CVector::from_vec(vec![r(a2), z1 * xi, z2 * b, z3 * a2]),
        CVector::from_vec(vec![r(a2), -w * z2.conj() * b, w * z1.conj() * xi, -z3 * a2]),
    ];
    let mut block = complete_orthonormal(&rows, 4).map_err(|e| {
        Error::Inconsistent(format!("rows of the central block are not orthonormal: {e}"))
    })?;
    let first = block[(3, 0)];
    if first.norm() < 1e-9 {
        return Err(Error::Degenerate("fourth row has vanishing first entry".into()));
    }
    let phase = first.conj() / first.norm();
    for k in 0..4 {
        block[(3, k)] *= phase;
    }
    let res = unitarity_residual(&block);
    if res > UNITARY_TOL {
        return Err(Error::NotOrthonormal(res));
    }
    Ok(FamilyPoint { s, t, w, z1, z2, z3, block })
}

/// The commuting-square shape over `S(i,i,j,j)`.
pub fn fourstar_shape(c: &FourStarConstants) -> Result<SquareShape> {
    let g = c.graph.adjacency.clone();
    let gt = g.transpose();
    SquareShape::with_labels(
        g.clone(),
        g,
        gt.clone(),
        gt,
        c.graph.left_labels.clone(),
        c.graph.right_labels.clone(),
        c.graph.right_labels.clone(),
        c.graph.left_labels.clone(),
    )
}

pub fn family_connection(i: usize, j: usize, s: f64) -> Result<Connection> {
    let c = fourstar_constants(i, j)?;
    let point = family_point(&c, s)?;
    let shape = fourstar_shape(&c)?;
    let pf = PfData::from_shape(&shape)?;
    let mut pr = ConnectionProblem::new(shape.clone(), pf)?;
    pr.pin_u("A", "A", &point.block)?;
    let conn = pr.solve()?;
    let report = verify(&conn, VERIFY_TOL);
    if !report.passed() {
        return Err(Error::Completion(format!(
            "four-star connection fails verification: u {:.2e}, v {:.2e}",
            report.max_unitarity_residual_u, report.max_unitarity_residual_v
        )));
    }
    Ok(conn)
}

pub fn family_distinct(i: usize, j: usize, s1: f64, s2: f64, tol: f64) -> Result<bool> {
    let c = fourstar_constants(i, j)?;
    let a = family_point(&c, s1)?;
    let b = family_point(&c, s2)?;
    Ok((&a.block - &b.block).iter().any(|z| z.norm() > tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Arm {
    Finite(usize),
    Infinite,
}

impl Arm {
    fn length(self) -> usize {
        match self {
            Arm::Finite(n) => n,
            Arm::Infinite => INFINITE_ARM,
        }
    }
}

impl std::fmt::Display for Arm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Arm::Finite(n) => write!(f, "{n}"),
            Arm::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexCell {
    pub i: Arm,
    pub j: Arm,
    pub norm_sq: f64,
    /// Change in the value when infinite arms grow from 60 to 80; zero for
    /// finite cells.
    pub truncation_estimate: f64,
}

pub fn star_norm_sq(arms: &[usize]) -> Result<f64> {
    Ok(spectral(&make_star(arms)?, SPECTRAL_TOL)?.index())
}

fn cell(i: Arm, j: Arm) -> Result<IndexCell> {
    let norm_sq = star_norm_sq(&[i.length(), i.length(), j.length(), j.length()])?;
    let longer = |a: Arm| match a {
        Arm::Finite(n) => n,
        Arm::Infinite => INFINITE_ARM + 20,
    };
    let truncation_estimate = if i == Arm::Infinite || j == Arm::Infinite {
        (star_norm_sq(&[longer(i), longer(i), longer(j), longer(j)])? - norm_sq).abs()
    } else {
        0.0
    };
    Ok(IndexCell { i, j, norm_sq, truncation_estimate })
}

/// Index of `S(i,i,j,j)` for `1 <= i <= j <= j_max`, `i <= i_max`, followed
/// by the `j = inf` row and the `(inf, inf)` corner.
pub fn index_table(i_max: usize, j_max: usize) -> Result<Vec<IndexCell>> {
    let mut out = Vec::new();
    for j in 1..=j_max {
        for i in 1..=j.min(i_max) {
            out.push(cell(Arm::Finite(i), Arm::Finite(j))?);
        }
    }
    for i in 1..=i_max {
        out.push(cell(Arm::Finite(i), Arm::Infinite)?);
    }
    out.push(cell(Arm::Infinite, Arm::Infinite)?);
    Ok(out)
}
