//! The limiting Cauchy transform of Jacobi zero distributions with
//! `alpha_n / n -> A`, `beta_n / n -> B`, which solves
//!
//! ```text
//! (1 - z^2) C^2 - ((A + B) z + A - B) C + (A + B + 1) = 0,
//! ```
//!
//! and the quadratic differential `-D(z) / ((z-1)^2 (z+1)^2) dz^2` built from
//! its discriminant.

use crate::error::{Error, Result};
use crate::poly::{ComplexPolynomial, RootCountingMeasure};
use crate::qdclass::NormalizedQD;
use num_complex::Complex64;
use serde::Serialize;

const PARAM_TOL: f64 = 1e-12;
/// Distance to a discriminant zero below which branch ordering is refused.
pub const BRANCH_POINT_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitParams {
    #[serde(rename = "A")]
    pub a: Complex64,
    #[serde(rename = "B")]
    pub b: Complex64,
}

impl LimitParams {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if (1.0 + a + b).norm() <= PARAM_TOL {
            return Err(Error::DegenerateParameters(format!("1 + A + B = 0 for A = {a}, B = {b}")));
        }
        Ok(LimitParams { a, b })
    }

    /// `(P, Q, R)` of the quadratic `P C^2 + Q C + R = 0`.
    pub fn quadratic(&self) -> (ComplexPolynomial, ComplexPolynomial, ComplexPolynomial) {
        let one = Complex64::new(1.0, 0.0);
        let s = self.a + self.b;
        (
            ComplexPolynomial::new(vec![one, Complex64::new(0.0, 0.0), -one]),
            ComplexPolynomial::new(vec![-(self.a - self.b), -s]),
            ComplexPolynomial::constant(s + 1.0),
        )
    }

    /// Left-hand side of the quadratic at `(z, C)`.
    pub fn residual(&self, z: Complex64, c: Complex64) -> Complex64 {
        let s = self.a + self.b;
        (1.0 - z * z) * c * c - (s * z + self.a - self.b) * c + (s + 1.0)
    }

    /// The closed form `[(A-B)^2 - 4(A+B+1), 2(A^2-B^2), (A+B+2)^2]`.
    pub fn discriminant_closed_form(&self) -> [Complex64; 3] {
        let (a, b) = (self.a, self.b);
        [
            (a - b) * (a - b) - 4.0 * (a + b + 1.0),
            2.0 * (a * a - b * b),
            (a + b + 2.0) * (a + b + 2.0),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyBranches {
    /// The branch with `C ~ 1/z` at infinity (closest to it at the probe),
    /// unless `branch_point_vicinity` is set, in which case the pair is
    /// unordered.
    pub first: Complex64,
    pub second: Complex64,
    pub branch_point_vicinity: bool,
    pub coincident: bool,
}

/// Both solutions of the limiting quadratic at `z`.
pub fn limit_cauchy_branches(lp: &LimitParams, z: Complex64) -> Result<CauchyBranches> {
    if (z - 1.0).norm() <= PARAM_TOL || (z + 1.0).norm() <= PARAM_TOL {
        return Err(Error::PointAtPole(z));
    }
    let s = lp.a + lp.b;
    let qa = 1.0 - z * z;
    let qb = -(s * z + lp.a - lp.b);
    let qc = s + 1.0;
    let disc = qb * qb - 4.0 * qa * qc;
    let r = disc.sqrt();
    // cancellation-free pair
    let t = if (qb + r).norm() >= (qb - r).norm() { qb + r } else { qb - r };
    let (mut c1, mut c2) = if t.norm() == 0.0 {
        let c = -qb / (2.0 * qa);
        (c, c)
    } else {
        let q = -0.5 * t;
        (q / qa, qc / q)
    };
    if (z * c2 - 1.0).norm() < (z * c1 - 1.0).norm() {
        std::mem::swap(&mut c1, &mut c2);
    }
    let near = limit_discriminant(lp)
        .find_roots(1e-12)
        .map(|mu| mu.roots().iter().any(|&p| (z - p).norm() < BRANCH_POINT_RADIUS))
        .unwrap_or(false);
    Ok(CauchyBranches {
        first: c1,
        second: c2,
        branch_point_vicinity: near,
        coincident: (c1 - c2).norm() <= 1e-12 * (1.0 + c1.norm()),
    })
}

/// `D(z) = Q^2 - 4PR` for the limiting quadratic.
pub fn limit_discriminant(lp: &LimitParams) -> ComplexPolynomial {
    let (p, q, r) = lp.quadratic();
    q.mul(&q).sub(&p.mul(&r).scale(Complex64::new(4.0, 0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Theorem2Form {
    /// `-D/((z-1)^2(z+1)^2) dz^2 = scale * Q_normalized dz^2`.
    Normalized { qd: NormalizedQD, scale: Complex64 },
    /// `A + B + 2 = 0`: the discriminant is at most linear.
    Degenerate { discriminant: ComplexPolynomial },
}

/// Zeros of a quadratic ordered with the larger imaginary part first, the
/// larger real part first when both are real.
pub fn order_zero_pair(u: Complex64, v: Complex64) -> (Complex64, Complex64) {
    let tol = 1e-12 * (1.0 + u.norm().max(v.norm()));
    if (u.im - v.im).abs() > tol {
        if u.im > v.im { (u, v) } else { (v, u) }
    } else if u.re >= v.re {
        (u, v)
    } else {
        (v, u)
    }
}

/// The limiting differential in the normalized two-zero form.
pub fn theorem2_differential(lp: &LimitParams) -> Theorem2Form {
    let d = limit_discriminant(lp);
    let lead = d.coeff(2);
    let s2 = lp.a + lp.b + 2.0;
    if s2.norm() <= PARAM_TOL || lead.norm() == 0.0 {
        return Theorem2Form::Degenerate { discriminant: d };
    }
    let b = d.coeff(1) / lead;
    let c = d.coeff(0) / lead;
    let r = (b * b - 4.0 * c).sqrt();
    let t = if (b + r).norm() >= (b - r).norm() { b + r } else { b - r };
    let (u, v) = if t.norm() == 0.0 {
        (-0.5 * b, -0.5 * b)
    } else {
        let q = -0.5 * t;
        (q, c / q)
    };
    let (p1, p2) = order_zero_pair(u, v);
    Theorem2Form::Normalized { qd: NormalizedQD::new(p1, p2), scale: lead }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualStats {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub n_probes: usize,
}

impl ResidualStats {
    pub fn from_values(mut v: Vec<f64>) -> ResidualStats {
        if v.is_empty() {
            return ResidualStats { min: f64::NAN, median: f64::NAN, max: f64::NAN, n_probes: 0 };
        }
        v.sort_by(|a, b| a.total_cmp(b));
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        ResidualStats { min: v[0], median, max: v[n - 1], n_probes: n }
    }
}

/// `|residual|` of the limiting quadratic with the empirical Cauchy transform
/// plugged in, over the probes.
pub fn eq12_residual(lp: &LimitParams, mu: &RootCountingMeasure, probes: &[Complex64]) -> Result<ResidualStats> {
    let mut v = Vec::with_capacity(probes.len());
    for &z in probes {
        let c = mu.empirical_cauchy(z)?;
        v.push(lp.residual(z, c).norm());
    }
    Ok(ResidualStats::from_values(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "kappa", rename_all = "camelCase")]
pub enum DegenerateLimit {
    /// Unit mass at the origin.
    Delta0,
    /// Unit mass at `kappa`.
    DeltaKappa(Complex64),
}

/// Residual of `(z - kappa) C - 1`, which vanishes for a unit point mass.
pub fn degenerate_limit_check(kind: DegenerateLimit, mu: &RootCountingMeasure, probes: &[Complex64]) -> Result<ResidualStats> {
    let kappa = match kind {
        DegenerateLimit::Delta0 => Complex64::new(0.0, 0.0),
        DegenerateLimit::DeltaKappa(k) => k,
    };
    let mut v = Vec::with_capacity(probes.len());
    for &z in probes {
        let c = mu.empirical_cauchy(z)?;
        v.push(((z - kappa) * c - 1.0).norm());
    }
    Ok(ResidualStats::from_values(v))
}

/// `count` points evenly spaced on the circle `|z| = radius`, offset by half a
/// step so none falls on the real axis.
pub fn circle_probes(radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.5) / count as f64))
        .collect()
}
