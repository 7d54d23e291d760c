//! General quadratic equations `P C^2 + Q C + R = 0` for a Cauchy transform,
//! with `deg P = n + 2`, `deg Q <= n + 1`, `deg R <= n`. The candidate
//! motherbody support lies on horizontal trajectories of
//! `(4PR - Q^2) / P^2 dz^2`.

use crate::error::{Error, Result};
use crate::poly::{cluster_roots, quadratic_roots, ComplexPolynomial};
use crate::tracer::{trace_critical_with, ArcEnd, RationalQD, TraceConfig};
use num_complex::Complex64;
use serde::Serialize;

/// Roots closer than this (relative) are treated as one multiple root.
pub const ROOT_CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticCauchyEquation {
    #[serde(rename = "P")]
    pub p: ComplexPolynomial,
    #[serde(rename = "Q")]
    pub q: ComplexPolynomial,
    #[serde(rename = "R")]
    pub r: ComplexPolynomial,
    pub n: usize,
}

impl QuadraticCauchyEquation {
    pub fn new(p: ComplexPolynomial, q: ComplexPolynomial, r: ComplexPolynomial) -> Result<Self> {
        let dp = p.degree().ok_or(Error::ZeroPolynomial)?;
        if dp < 2 {
            return Err(Error::InvalidEquation(format!("deg P = {dp}, need at least 2")));
        }
        let n = dp - 2;
        if let Some(dq) = q.degree().filter(|&d| d > n + 1) {
            return Err(Error::InvalidEquation(format!("deg Q = {dq} exceeds n + 1 = {}", n + 1)));
        }
        if let Some(dr) = r.degree().filter(|&d| d > n) {
            return Err(Error::InvalidEquation(format!("deg R = {dr} exceeds n = {n}")));
        }
        Ok(QuadraticCauchyEquation { p, q, r, n })
    }

    /// The Jacobi limit: `P = 1 - z^2`, `Q = -((A+B) z + A - B)`, `R = A + B + 1`.
    pub fn jacobi_limit(a: Complex64, b: Complex64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        QuadraticCauchyEquation {
            p: ComplexPolynomial::new(vec![one, Complex64::new(0.0, 0.0), -one]),
            q: ComplexPolynomial::new(vec![-(a - b), -(a + b)]),
            r: ComplexPolynomial::constant(a + b + 1.0),
            n: 0,
        }
    }

    pub fn evaluate(&self, z: Complex64, c: Complex64) -> Complex64 {
        (self.p.evaluate(z) * c + self.q.evaluate(z)) * c + self.r.evaluate(z)
    }
}

/// `D = Q^2 - 4PR`.
pub fn discriminant(eq: &QuadraticCauchyEquation) -> ComplexPolynomial {
    eq.q.mul(&eq.q).sub(&eq.p.mul(&eq.r).scale(Complex64::new(4.0, 0.0)))
}

/// `(4PR - Q^2) / P^2` with numerically common roots cancelled.
pub fn theta_differential(eq: &QuadraticCauchyEquation) -> Result<RationalQD> {
    let num = discriminant(eq).scale(Complex64::new(-1.0, 0.0));
    let den = eq.p.mul(&eq.p);
    if num.degree().unwrap_or(0) == 0 {
        return RationalQD::new(num, den);
    }
    let mut zeros: Vec<Complex64> = num.find_roots(1e-12)?.roots().to_vec();
    let p_roots = eq.p.find_roots(1e-12)?;
    let mut poles: Vec<Complex64> = p_roots.roots().iter().flat_map(|&z| [z, z]).collect();
    let mut cancelled = false;
    zeros.retain(|&z| {
        let hit = poles
            .iter()
            .enumerate()
            .filter(|(_, &w)| (w - z).norm() <= ROOT_CLUSTER_TOL * (1.0 + z.norm()))
            .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
            .map(|(i, _)| i);
        match hit {
            Some(i) => {
                poles.swap_remove(i);
                cancelled = true;
                false
            }
            None => true,
        }
    });
    if !cancelled {
        return RationalQD::new(num, den);
    }
    RationalQD::new(
        ComplexPolynomial::from_roots(&zeros, num.leading()),
        ComplexPolynomial::from_roots(&poles, den.leading()),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoints {
    /// Roots of `D`, repeated by multiplicity.
    pub points: Vec<Complex64>,
    /// Branching order at infinity, `2n + 2 - deg D`, when positive.
    pub infinity: Option<usize>,
    /// Smallest relative `|Q|` at a root of `P`; zero exactly when the
    /// resultant of `P` and `Q` vanishes.
    pub coprimality_margin: f64,
    pub not_coprime_warning: bool,
    /// `D` vanishes identically; `C` is then a double root everywhere.
    pub identically_zero: bool,
}

/// Smallest `|Q(z)| / sum |q_k| |z|^k` over the roots of `P`.
fn coprimality_margin(eq: &QuadraticCauchyEquation) -> Result<f64> {
    let roots = eq.p.find_roots(1e-12)?;
    Ok(roots
        .roots()
        .iter()
        .map(|&z| {
            let scale: f64 = eq.q.coeffs().iter().rev().fold(0.0, |acc, c| acc * z.norm() + c.norm());
            if scale == 0.0 {
                0.0
            } else {
                eq.q.evaluate(z).norm() / scale
            }
        })
        .fold(f64::INFINITY, f64::min))
}

pub fn branch_points(eq: &QuadraticCauchyEquation, tol: f64) -> Result<BranchPoints> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let d = discriminant(eq);
    let margin = coprimality_margin(eq)?;
    let full = 2 * eq.n + 2;
    let Some(deg) = d.degree() else {
        return Ok(BranchPoints {
            points: Vec::new(),
            infinity: None,
            coprimality_margin: margin,
            not_coprime_warning: margin < tol,
            identically_zero: true,
        });
    };
    let points = if deg == 0 { Vec::new() } else { d.find_roots(1e-12)?.roots().to_vec() };
    Ok(BranchPoints {
        points,
        infinity: (deg < full).then(|| full - deg),
        coprimality_margin: margin,
        not_coprime_warning: margin < tol,
        identically_zero: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleResidue {
    pub pole: Complex64,
    pub residue: Complex64,
}

/// `-Q(z0) / P'(z0)` at every root of `P`; the roots must be simple to within
/// `tol` (relative).
pub fn pole_residues(eq: &QuadraticCauchyEquation, tol: f64) -> Result<Vec<PoleResidue>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let roots = eq.p.find_roots(1e-12)?;
    let dp = eq.p.derivative();
    let mut out = Vec::new();
    for (z, m) in cluster_roots(roots.roots(), tol) {
        if m > 1 {
            return Err(Error::HigherOrderPole(z));
        }
        out.push(PoleResidue { pole: z, residue: -eq.q.evaluate(z) / dp.evaluate(z) });
    }
    Ok(out)
}

/// What the residue theorem says the residues of `-Q/P` add up to.
pub fn expected_residue_sum(eq: &QuadraticCauchyEquation) -> Complex64 {
    match (eq.q.degree(), eq.p.degree()) {
        (Some(dq), Some(dp)) if dq + 1 == dp => -eq.q.leading() / eq.p.leading(),
        _ => Complex64::new(0.0, 0.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficiencyReport {
    pub simple_poles: bool,
    pub residues_real: bool,
    pub asymptotic_real_branch: bool,
    /// Largest `|Im|` among the residues, absent when a pole is not simple.
    pub max_residue_imag: Option<f64>,
    /// Both roots of `p_lead a^2 + q_(n+1) a + r_n = 0`: `C ~ a / z` at infinity.
    pub alpha_at_infinity: Vec<Complex64>,
    pub alpha_imag: f64,
    pub infinity_branching: Option<usize>,
    pub not_coprime_warning: bool,
}

pub fn sufficiency_report(eq: &QuadraticCauchyEquation, tol: f64) -> Result<SufficiencyReport> {
    let bp = branch_points(eq, tol)?;
    let (simple_poles, max_imag) = match pole_residues(eq, ROOT_CLUSTER_TOL) {
        Ok(res) => (true, Some(res.iter().map(|r| r.residue.im.abs()).fold(0.0, f64::max))),
        Err(Error::HigherOrderPole(_)) => (false, None),
        Err(e) => return Err(e),
    };
    let alpha = quadratic_roots(eq.p.leading(), eq.q.coeff(eq.n + 1), eq.r.coeff(eq.n));
    let alpha_imag = alpha.iter().map(|a| a.im.abs()).fold(f64::INFINITY, f64::min);
    Ok(SufficiencyReport {
        simple_poles,
        residues_real: max_imag.is_some_and(|m| m <= tol),
        asymptotic_real_branch: alpha_imag <= tol,
        max_residue_imag: max_imag,
        alpha_at_infinity: alpha,
        alpha_imag,
        infinity_branching: bp.infinity,
        not_coprime_warning: bp.not_coprime_warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dk0Vertex {
    pub id: usize,
    pub z: Complex64,
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub vertex: usize,
    pub q_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timeout {
    pub vertex: usize,
    pub departure: usize,
    pub q_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dk0Report {
    pub vertices: Vec<Dk0Vertex>,
    /// Per vertex, the zeros reached by finite critical trajectories.
    pub adjacency: Vec<Vec<Neighbor>>,
    /// Every zero has at least one finite critical trajectory (loops count).
    pub all_touched: bool,
    /// A spanning subgraph without isolated vertices exists.
    pub spanning: bool,
    pub verdict: &'static str,
    pub timeouts: Vec<Timeout>,
}

/// Numerical DK0 graph: zeros of `D` joined by finite critical trajectories
/// of the theta differential. Arcs that exhaust the budget are listed as
/// timeouts.
pub fn dk0_connectivity(eq: &QuadraticCauchyEquation, cfg: &TraceConfig) -> Result<Dk0Report> {
    let theta = theta_differential(eq)?;
    let graph = trace_critical_with(&theta, cfg)?;
    let zero_ids: Vec<usize> = graph.vertices.iter().filter(|v| v.is_zero()).map(|v| v.id).collect();
    let index = |id: usize| zero_ids.iter().position(|&z| z == id);
    let vertices: Vec<Dk0Vertex> = zero_ids
        .iter()
        .enumerate()
        .map(|(i, &id)| {
            let v = &graph.vertices[id];
            let order = match v.kind {
                crate::tracer::VertexKind::Zero { order } => order,
                crate::tracer::VertexKind::Pole { .. } => 0,
            };
            Dk0Vertex { id: i, z: v.z, order }
        })
        .collect();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for e in &graph.edges {
        let (Some(a), Some(b)) = (index(e.from), index(e.to)) else { continue };
        adjacency[a].push(Neighbor { vertex: b, q_length: e.q_length });
        if a != b {
            adjacency[b].push(Neighbor { vertex: a, q_length: e.q_length });
        }
    }
    let timeouts = graph
        .arcs
        .iter()
        .filter_map(|a| match a.end {
            ArcEnd::Truncated { q_length } => index(a.start).map(|v| Timeout { vertex: v, departure: a.departure, q_length }),
            _ => None,
        })
        .collect();
    let all_touched = adjacency.iter().all(|n| !n.is_empty());
    let spanning = vertices.len() <= 1 || adjacency.iter().enumerate().all(|(i, n)| n.iter().any(|x| x.vertex != i));
    Ok(Dk0Report {
        vertices,
        adjacency,
        all_touched,
        spanning,
        verdict: if spanning { "spanning" } else { "no spanning subgraph" },
        timeouts,
    })
}
