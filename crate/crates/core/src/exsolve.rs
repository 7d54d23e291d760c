//! Exactly solvable second-order pencils
//!
//! ```text
//! T_lambda = Q2(z) d^2/dz^2 + (Q1(z) lambda + P1(z)) d/dz + (lambda^2 + p lambda + q) Q0
//! ```
//!
//! with `deg Q2 <= 2`, `deg Q1, deg P1 <= 1` and a nonzero constant `Q0`.
//! `T_lambda` maps polynomials of degree at most `n` into themselves with an
//! upper-triangular matrix in the monomial basis. Its diagonal is
//!
//! ```text
//! c_jj = j(j-1) q22 + j p11 + Q0 q + (j q11 + Q0 p) lambda + Q0 lambda^2,
//! ```
//!
//! so a degree-`n` eigenpolynomial exists exactly when `c_nn = 0` and no
//! earlier `c_jj` vanishes. Dividing `c_nn` by `n^2` gives the characteristic
//! polynomial `q22 + q11 t + q00 t^2` in the limit `t = lambda / n`.
//!
//! The Jacobi equation with `alpha = A n`, `beta = B n` embeds as
//! `Q2 = 1 - z^2`, `Q1 = (B - A) - (A + B) z`, `P1 = -2z`, `Q0 = 1 + A + B`,
//! `p = 1 / (1 + A + B)`, `q = 0`; then `lambda = n` is an eigenvalue and the
//! eigenpolynomial is `P_n^(An, Bn)` up to scale.

use crate::ddouble::CDD;
use crate::error::{Error, Result};
use crate::limitfield::ResidualStats;
use crate::output::fmt_f64;
use crate::poly::{evaluate_dd, quadratic_roots, ComplexPolynomial, ExtendedPolynomial, RootCountingMeasure};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;

/// Relative gap under which the two eigenvalues of one degree count as equal.
pub const COINCIDENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorPencil {
    #[serde(rename = "Q2")]
    pub q2: ComplexPolynomial,
    #[serde(rename = "Q1")]
    pub q1: ComplexPolynomial,
    #[serde(rename = "P1")]
    pub p1: ComplexPolynomial,
    #[serde(rename = "Q0")]
    pub q0: Complex64,
    pub p: Complex64,
    pub q: Complex64,
}

impl OperatorPencil {
    pub fn new(
        q2: ComplexPolynomial,
        q1: ComplexPolynomial,
        p1: ComplexPolynomial,
        q0: Complex64,
        p: Complex64,
        q: Complex64,
    ) -> Result<Self> {
        if q2.degree() != Some(2) {
            return Err(Error::InvalidPencil(format!("Q2 must have degree 2, got {:?}", q2.degree())));
        }
        if q1.degree().unwrap_or(0) > 1 || p1.degree().unwrap_or(0) > 1 {
            return Err(Error::InvalidPencil("Q1 and P1 must have degree at most 1".into()));
        }
        if q0.norm() == 0.0 {
            return Err(Error::InvalidPencil("Q0 must be nonzero".into()));
        }
        Ok(OperatorPencil { q2, q1, p1, q0, p, q })
    }

    /// The Jacobi equation with `alpha = A n`, `beta = B n` (see the module docs).
    pub fn jacobi(a: Complex64, b: Complex64) -> Result<Self> {
        let s = 1.0 + a + b;
        if s.norm() <= 1e-12 {
            return Err(Error::DegenerateParameters(format!("1 + A + B = 0 for A = {a}, B = {b}")));
        }
        let c = |re: f64| Complex64::new(re, 0.0);
        Self::new(
            ComplexPolynomial::new(vec![c(1.0), c(0.0), c(-1.0)]),
            ComplexPolynomial::new(vec![b - a, -(a + b)]),
            ComplexPolynomial::new(vec![c(0.0), c(-2.0)]),
            s,
            1.0 / s,
            c(0.0),
        )
    }

    pub fn q22(&self) -> Complex64 {
        self.q2.coeff(2)
    }

    pub fn q11(&self) -> Complex64 {
        self.q1.coeff(1)
    }

    /// Coefficients `(c_j, c_{j-1}, c_{j-2})` of `T_lambda(z^j)` at the powers
    /// `z^j, z^{j-1}, z^{j-2}`.
    fn column(&self, j: usize, lambda: CDD) -> [CDD; 3] {
        let cd = |z: Complex64| CDD::from(z);
        let jf = CDD::from(j as f64);
        let jj = CDD::from((j * j.saturating_sub(1)) as f64);
        let zero_order = cd(self.q0) * (lambda * lambda + cd(self.p) * lambda + cd(self.q));
        [
            jj * cd(self.q2.coeff(2)) + jf * (cd(self.q1.coeff(1)) * lambda + cd(self.p1.coeff(1))) + zero_order,
            jj * cd(self.q2.coeff(1)) + jf * (cd(self.q1.coeff(0)) * lambda + cd(self.p1.coeff(0))),
            jj * cd(self.q2.coeff(0)),
        ]
    }

    /// Sum of the magnitudes of the terms of `c_jj`, the scale for resonance.
    fn diagonal_scale(&self, j: usize, lambda: Complex64) -> f64 {
        let jf = j as f64;
        jf * (jf - 1.0) * self.q22().norm()
            + jf * (self.q11() * lambda).norm()
            + jf * self.p1.coeff(1).norm()
            + self.q0.norm() * (lambda.norm_sqr() + (self.p * lambda).norm() + self.q.norm())
    }

    /// `(c_nn constant term, lambda coefficient, lambda^2 coefficient)`.
    pub fn diagonal_coeffs(&self, n: usize) -> [Complex64; 3] {
        let nf = n as f64;
        [
            nf * (nf - 1.0) * self.q22() + nf * self.p1.coeff(1) + self.q0 * self.q,
            nf * self.q11() + self.q0 * self.p,
            self.q0,
        ]
    }

    /// `T_lambda(y)(z)` together with the sum of the magnitudes of its three terms.
    pub fn apply(&self, y: &ComplexPolynomial, lambda: Complex64, z: Complex64) -> (Complex64, f64) {
        let d1 = y.derivative();
        let d2 = d1.derivative();
        let c2 = self.q2.evaluate(z);
        let c1 = self.q1.evaluate(z) * lambda + self.p1.evaluate(z);
        let c0 = self.q0 * (lambda * lambda + self.p * lambda + self.q);
        let r = c2 * evaluate_dd(&d2, z) + c1 * evaluate_dd(&d1, z) + c0 * evaluate_dd(y, z);
        let scale = c2.norm() * d2.abs_eval(z) + c1.norm() * d1.abs_eval(z) + c0.norm() * y.abs_eval(z);
        (r, scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicPoly {
    pub q22: Complex64,
    pub q11: Complex64,
    pub q00: Complex64,
    /// `alpha_1` has the larger real part (then the larger imaginary part).
    pub roots: [Complex64; 2],
}

pub fn characteristic_poly(t: &OperatorPencil) -> CharacteristicPoly {
    let r = quadratic_roots(t.q0, t.q11(), t.q22());
    let mut roots = [r[0], r[1]];
    if (roots[1].re, roots[1].im) > (roots[0].re, roots[0].im) {
        roots.swap(0, 1);
    }
    CharacteristicPoly { q22: t.q22(), q11: t.q11(), q00: t.q0, roots }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenericTypeReport {
    pub generic: bool,
    /// `q22 q00 / q11^2`, absent when `q11 = 0`.
    pub rho: Option<Complex64>,
    /// `|arg(alpha_1 / alpha_2)|`.
    pub arg_gap: f64,
}

/// The characteristic roots have distinct arguments exactly when
/// `rho = q22 q00 / q11^2` avoids `[0, 1/4]`. With `q11 = 0` the roots are
/// `+-r e^{i theta}`, always generic.
pub fn generic_type_check(t: &OperatorPencil, tol: f64) -> GenericTypeReport {
    let ch = characteristic_poly(t);
    let arg_gap = (ch.roots[0] / ch.roots[1]).arg().abs();
    let (q22, q11, q00) = (ch.q22, ch.q11, ch.q00);
    if q11.norm_sqr() <= tol * (q22 * q00).norm() {
        return GenericTypeReport { generic: true, rho: None, arg_gap };
    }
    let rho = q22 * q00 / (q11 * q11);
    let same_arg = rho.im.abs() <= tol * (1.0 + rho.norm()) && rho.re >= -tol && rho.re <= 0.25 + tol;
    GenericTypeReport { generic: !same_arg, rho: Some(rho), arg_gap }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenvaluePair {
    pub n: usize,
    /// `lambda[i]` is the root of `c_nn = 0` tracking `n alpha_{i+1}`.
    pub lambda: [Complex64; 2],
    pub ratio: [Complex64; 2],
    pub coincident: bool,
}

pub fn eigenvalues_for_degree(t: &OperatorPencil, n: usize) -> Result<EigenvaluePair> {
    if n == 0 {
        return Err(Error::DegreeOutOfRange("eigenvalues need n >= 1".into()));
    }
    let mut lambda = diagonal_roots(t, n);
    let nf = n as f64;
    let alpha = characteristic_poly(t).roots;
    let straight = (lambda[0] - nf * alpha[0]).norm() + (lambda[1] - nf * alpha[1]).norm();
    let crossed = (lambda[1] - nf * alpha[0]).norm() + (lambda[0] - nf * alpha[1]).norm();
    if crossed < straight {
        lambda.swap(0, 1);
    }
    let coincident = (lambda[0] - lambda[1]).norm() <= COINCIDENT_TOL * (1.0 + lambda[0].norm() + lambda[1].norm());
    Ok(EigenvaluePair { n, lambda, ratio: [lambda[0] / nf, lambda[1] / nf], coincident })
}

fn diagonal_roots(t: &OperatorPencil, n: usize) -> [Complex64; 2] {
    let [c0, c1, c2] = t.diagonal_coeffs(n);
    let r = quadratic_roots(c2, c1, c0);
    [r[0], r[1]]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenpolynomial {
    pub n: usize,
    pub lambda: Complex64,
    /// Monic, in the monomial basis.
    pub poly: ComplexPolynomial,
    #[serde(skip)]
    pub extended: ExtendedPolynomial,
    /// Max over the probe grid of `|T_lambda y|` over the sum of its term magnitudes.
    pub ode_residual: f64,
}

/// Points on three circles, used to measure ODE residuals.
fn residual_grid() -> Vec<Complex64> {
    let mut g = Vec::new();
    for (k, r) in [0.5, 1.5, 3.0].into_iter().enumerate() {
        for m in 0..8 {
            let th = std::f64::consts::TAU * (m as f64 + 0.3 * (k as f64 + 1.0)) / 8.0;
            g.push(Complex64::from_polar(r, th));
        }
    }
    g
}

/// Monic degree-`n` solution of `T_lambda y = 0` for family `which` (1 or 2),
/// by back-substitution from `z^n` down. `tol` is the relative size below which
/// an earlier diagonal entry counts as zero.
pub fn eigenpolynomial(t: &OperatorPencil, n: usize, which: u8, tol: f64) -> Result<Eigenpolynomial> {
    if which != 1 && which != 2 {
        return Err(Error::InvalidPencil(format!("family must be 1 or 2, got {which}")));
    }
    let lambda = if n == 0 {
        let r = diagonal_roots(t, 0);
        r[(which - 1) as usize]
    } else {
        eigenvalues_for_degree(t, n)?.lambda[(which - 1) as usize]
    };
    eigenpolynomial_at(t, n, lambda, tol)
}

/// Two Newton steps on `c_nn` in double-double. The coefficients of high
/// degree eigenpolynomials are sensitive to the last bits of `lambda`.
fn refine_lambda(t: &OperatorPencil, n: usize, lambda: Complex64) -> CDD {
    let [_, c1, c2] = t.diagonal_coeffs(n).map(CDD::from);
    let mut lam = CDD::from(lambda);
    for _ in 0..2 {
        let f = t.column(n, lam)[0];
        let df = c1 + CDD::from(2.0) * c2 * lam;
        if df == CDD::ZERO {
            break;
        }
        lam = lam - f / df;
    }
    lam
}

/// As [`eigenpolynomial`], for a given eigenvalue of `c_nn`.
pub fn eigenpolynomial_at(t: &OperatorPencil, n: usize, lambda: Complex64, tol: f64) -> Result<Eigenpolynomial> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let lam = refine_lambda(t, n, lambda);
    let cols: Vec<[CDD; 3]> = (0..=n).map(|j| t.column(j, lam)).collect();
    let mut a = vec![CDD::ZERO; n + 1];
    a[n] = CDD::from(1.0);
    for i in (0..n).rev() {
        let diag = cols[i][0];
        if diag.abs_f64() <= tol * t.diagonal_scale(i, lambda) {
            return Err(Error::ResonantIndex(i));
        }
        let mut rhs = cols[i + 1][1] * a[i + 1];
        if i + 2 <= n {
            rhs = rhs + cols[i + 2][2] * a[i + 2];
        }
        a[i] = -(rhs / diag);
    }
    let extended = ExtendedPolynomial::new(a);
    let poly = extended.to_f64();
    let ode_residual = residual_grid()
        .into_iter()
        .map(|z| {
            let (r, s) = t.apply(&poly, lambda, z);
            if s > 0.0 {
                r.norm() / s
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(Eigenpolynomial { n, lambda, poly, extended, ode_residual })
}

/// Scaled residual of the Stieltjes equations below before polishing is accepted.
pub const STIELTJES_TOL: f64 = 1e-10;

/// Residuals `2 Q2(z_k) sum_(j != k) 1/(z_k - z_j) + R1(z_k)`, `R1 = Q1 lambda + P1`,
/// which vanish exactly at the roots of a simple eigenpolynomial, each divided
/// by the sum of its term magnitudes.
fn stieltjes_residuals(t: &OperatorPencil, lambda: Complex64, z: &[Complex64]) -> (Vec<Complex64>, f64) {
    let mut f = Vec::with_capacity(z.len());
    let mut worst: f64 = 0.0;
    for (k, &zk) in z.iter().enumerate() {
        let (mut s, mut sa) = (Complex64::new(0.0, 0.0), 0.0);
        for (j, &zj) in z.iter().enumerate() {
            if j != k {
                let d = zk - zj;
                s += 1.0 / d;
                sa += 1.0 / d.norm();
            }
        }
        let q2 = t.q2.evaluate(zk);
        let r1 = t.q1.evaluate(zk) * lambda + t.p1.evaluate(zk);
        let fk = 2.0 * q2 * s + r1;
        let scale = 2.0 * q2.norm() * sa + r1.norm();
        worst = worst.max(if scale > 0.0 { fk.norm() / scale } else { f64::INFINITY });
        f.push(fk);
    }
    (f, worst)
}

/// Roots of an eigenpolynomial. The monomial coefficients lose accuracy fast
/// as `n` grows, so the roots found from them seed a damped Newton iteration
/// on the Stieltjes equations, which stay well conditioned. Returns the roots
/// and the final scaled Stieltjes residual.
pub fn eigenpolynomial_roots(t: &OperatorPencil, ep: &Eigenpolynomial) -> Result<(RootCountingMeasure, f64)> {
    let mut z = match ep.extended.find_roots(1e-12) {
        Ok(mu) => mu.roots().to_vec(),
        Err(Error::RootsNotConverged { best, .. }) => best,
        Err(e) => return Err(e),
    };
    let n = z.len();
    let lambda = ep.lambda;
    let dq2 = t.q2.derivative();
    let dr1 = t.q11() * lambda + t.p1.coeff(1);
    let (mut f, mut res) = stieltjes_residuals(t, lambda, &z);
    let mut iterations = 0;
    while res > 1e-14 && iterations < 60 {
        iterations += 1;
        let jac = DMatrix::from_fn(n, n, |k, j| {
            let zk = z[k];
            if j != k {
                let d = zk - z[j];
                2.0 * t.q2.evaluate(zk) / (d * d)
            } else {
                let (mut s, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for (i, &zi) in z.iter().enumerate() {
                    if i != k {
                        let d = zk - zi;
                        s += 1.0 / d;
                        s2 += 1.0 / (d * d);
                    }
                }
                2.0 * dq2.evaluate(zk) * s - 2.0 * t.q2.evaluate(zk) * s2 + dr1
            }
        });
        let Some(step) = jac.lu().solve(&DVector::from_vec(f.iter().map(|v| -v).collect())) else { break };
        let mut damp = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: Vec<Complex64> = z.iter().zip(step.iter()).map(|(a, b)| a + damp * b).collect();
            let (ft, rt) = stieltjes_residuals(t, lambda, &trial);
            if rt < res {
                (z, f, res) = (trial, ft, rt);
                accepted = true;
                break;
            }
            damp *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !(res <= STIELTJES_TOL) {
        return Err(Error::RootsNotConverged { iterations, residual: res, best: z });
    }
    Ok((RootCountingMeasure::new(z), res))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenCauchyRow {
    pub n: usize,
    pub lambda: Complex64,
    pub max_root_modulus: f64,
    /// Scaled Stieltjes residual of the roots used.
    pub root_residual: f64,
    pub residual: ResidualStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenCauchyReport {
    pub which: u8,
    /// The characteristic root `alpha = lim lambda_n / n` of the family.
    pub alpha: Complex64,
    /// `lim sqrt(eigenvalue) / n` with eigenvalue `-(lambda^2 + p lambda + q) Q0`.
    pub gamma: Complex64,
    pub rows: Vec<GenCauchyRow>,
}

/// Residual of the conjectured limit equation for the Cauchy transform `C` of
/// the root distribution,
/// `Q2 (C/gamma)^2 + Q1~ (C/gamma) - 1`, with `gamma = alpha sqrt(-Q0)` and
/// `Q1~ = alpha Q1 / gamma`. It equals `-(Q2 w^2 + Q1 w + Q0) / Q0` with
/// `w = C / alpha`, which is branch free.
pub fn gen_cauchy_residual(
    t: &OperatorPencil,
    which: u8,
    n_list: &[usize],
    probes: &[Complex64],
    tol: f64,
) -> Result<GenCauchyReport> {
    let g = generic_type_check(t, 1e-12);
    if !g.generic {
        return Err(Error::NonGenericPencil(g.rho));
    }
    if which != 1 && which != 2 {
        return Err(Error::InvalidPencil(format!("family must be 1 or 2, got {which}")));
    }
    let alpha = characteristic_poly(t).roots[(which - 1) as usize];
    let gamma = alpha * (-t.q0).sqrt();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let ep = eigenpolynomial(t, n, which, tol)?;
        let (mu, root_residual) = eigenpolynomial_roots(t, &ep)?;
        let mut v = Vec::with_capacity(probes.len());
        for &z in probes {
            let w = mu.empirical_cauchy(z)? / alpha;
            v.push(((t.q2.evaluate(z) * w * w + t.q1.evaluate(z) * w + t.q0) / t.q0).norm());
        }
        rows.push(GenCauchyRow { n, lambda: ep.lambda, max_root_modulus: mu.max_modulus(), root_residual, residual: ResidualStats::from_values(v) });
    }
    Ok(GenCauchyReport { which, alpha, gamma, rows })
}

/// `n,lambda_re,lambda_im,max_root_modulus,median_residual` per row.
pub fn gen_cauchy_csv(report: &GenCauchyReport) -> String {
    let mut s = String::from("n,lambda_re,lambda_im,max_root_modulus,median_residual\n");
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.n,
            fmt_f64(r.lambda.re),
            fmt_f64(r.lambda.im),
            fmt_f64(r.max_root_modulus),
            fmt_f64(r.residual.median)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{jacobi_poly, JacobiParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pencil(q2: [Complex64; 3], q1: [Complex64; 2], p1: [Complex64; 2], q0: Complex64, p: Complex64, q: Complex64) -> OperatorPencil {
        OperatorPencil::new(
            ComplexPolynomial::new(q2.to_vec()),
            ComplexPolynomial::new(q1.to_vec()),
            ComplexPolynomial::new(p1.to_vec()),
            q0,
            p,
            q,
        )
        .unwrap()
    }

    fn sample() -> OperatorPencil {
        pencil(
            [c(0.3, -0.2), c(-0.5, 0.1), c(1.0, 0.4)],
            [c(0.2, 0.7), c(-0.8, 0.3)],
            [c(0.1, -0.4), c(0.6, 0.2)],
            c(1.3, -0.5),
            c(0.4, 0.9),
            c(-0.7, 0.2),
        )
    }

    #[test]
    fn rejects_bad_pencils() {
        let one = ComplexPolynomial::constant(c(1.0, 0.0));
        let quad = ComplexPolynomial::from_real(&[0.0, 0.0, 1.0]);
        let r = OperatorPencil::new(one.clone(), one.clone(), one.clone(), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(r, Err(Error::InvalidPencil(_))));
        let r = OperatorPencil::new(quad.clone(), quad.clone(), one.clone(), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(r, Err(Error::InvalidPencil(_))));
        let r = OperatorPencil::new(quad, one.clone(), one, c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(r, Err(Error::InvalidPencil(_))));
    }

    #[test]
    fn characteristic_examples() {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let t = pencil([z, z, one], [z, z], [z, z], one, z, z);
        let ch = characteristic_poly(&t);
        assert!((ch.roots[0] - c(0.0, 1.0)).norm() < 1e-15 && (ch.roots[1] - c(0.0, -1.0)).norm() < 1e-15);
        let g = generic_type_check(&t, 1e-12);
        assert!(g.generic && g.rho.is_none());

        let t = pencil([z, z, one], [z, c(-2.0, 0.0)], [z, z], one, z, z);
        let g = generic_type_check(&t, 1e-12);
        assert!(!g.generic);
        assert!((g.rho.unwrap() - 0.25).norm() < 1e-15);

        // q22 q00 = rho q11^2 with rho = 1/8 and rho = 0.1
        for rho in [0.125, 0.1] {
            let t = pencil([z, z, c(rho * 4.0, 0.0)], [z, c(2.0, 0.0)], [z, z], one, z, z);
            let g = generic_type_check(&t, 1e-12);
            assert!(!g.generic && g.arg_gap < 1e-12, "{rho}: {g:?}");
        }
        let t = pencil([z, z, c(0.3, 0.0)], [z, c(1.0, 0.0)], [z, z], one, z, z);
        assert!(generic_type_check(&t, 1e-12).generic);
    }

    #[test]
    fn degree_one_by_hand() {
        // c_11 = p11 + Q0 q + (q11 + Q0 p) lambda + Q0 lambda^2
        let t = sample();
        let e = eigenvalues_for_degree(&t, 1).unwrap();
        for l in e.lambda {
            let v = t.p1.coeff(1) + t.q0 * t.q + (t.q11() + t.q0 * t.p) * l + t.q0 * l * l;
            assert!(v.norm() < 1e-13, "{v}");
        }
        // y = z + a0 with T y = (Q1 lambda + P1) + c0 (z + a0) = 0 at z^0
        let ep = eigenpolynomial(&t, 1, 1, 1e-12).unwrap();
        let l = ep.lambda;
        let c0 = t.q0 * (l * l + t.p * l + t.q);
        let a0 = -(t.q1.coeff(0) * l + t.p1.coeff(0)) / c0;
        assert!((ep.poly.coeff(0) - a0).norm() < 1e-13);
        assert!(ep.ode_residual < 1e-13);
    }

    #[test]
    fn vieta_and_limits() {
        let t = sample();
        let alpha = characteristic_poly(&t).roots;
        let mut prev = [f64::INFINITY; 2];
        for n in [50, 100, 200] {
            let e = eigenvalues_for_degree(&t, n).unwrap();
            let [c0, _, _] = t.diagonal_coeffs(n);
            let prod = e.lambda[0] * e.lambda[1] * t.q0;
            assert!((prod - c0).norm() <= 1e-10 * c0.norm());
            for i in 0..2 {
                let d = (e.ratio[i] - alpha[i]).norm();
                assert!(d <= 5.0 / n as f64 && d < prev[i]);
                prev[i] = d;
            }
        }
    }

    #[test]
    fn jacobi_embedding() {
        let t = OperatorPencil::jacobi(c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        let ep = eigenpolynomial(&t, 2, 1, 1e-12).unwrap();
        assert!((ep.lambda - 2.0).norm() < 1e-14);
        // monic (3z^2 - 1)/2 is z^2 - 1/3
        assert!((ep.poly.coeff(0) + 1.0 / 3.0).norm() < 1e-15 && ep.poly.coeff(1).norm() < 1e-15);

        let (a, b) = (c(0.7, -0.3), c(-0.2, 0.5));
        let t = OperatorPencil::jacobi(a, b).unwrap();
        for n in 1..=12 {
            let ep = eigenpolynomial(&t, n, 1, 1e-12).unwrap();
            assert!((ep.lambda - n as f64).norm() < 1e-11 * n as f64);
            let jp = jacobi_poly(&JacobiParams::new(n, a * n as f64, b * n as f64));
            let lead = jp.poly().leading();
            for k in 0..=n {
                assert!((ep.poly.coeff(k) - jp.poly().coeff(k) / lead).norm() < 1e-10, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn constant_eigenpolynomial() {
        let ep = eigenpolynomial(&sample(), 0, 2, 1e-12).unwrap();
        assert_eq!(ep.poly.degree(), Some(0));
        let l = ep.lambda;
        assert!((l * l + sample().p * l + sample().q).norm() < 1e-14);
    }

    #[test]
    fn resonance_is_reported() {
        // c_jj = -j(j-1) + j lambda + lambda^2 - 2 lambda, so c_33 = 0 at
        // lambda = 2 or -3, and c_00 also vanishes at lambda = 2
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let t = pencil([one, z, -one], [z, one], [z, z], one, c(-2.0, 0.0), z);
        let e = eigenvalues_for_degree(&t, 3).unwrap();
        let which = if (e.lambda[0] - 2.0).norm() < 1e-12 { 1 } else { 2 };
        assert!(matches!(eigenpolynomial(&t, 3, which, 1e-10), Err(Error::ResonantIndex(0))));
        assert!(eigenpolynomial(&t, 3, 3 - which, 1e-10).is_ok());
    }

    #[test]
    fn random_degree_eight_residual() {
        let ep = eigenpolynomial(&sample(), 8, 1, 1e-12).unwrap();
        assert!(ep.ode_residual < 1e-8, "{}", ep.ode_residual);
        let ep = eigenpolynomial(&sample(), 8, 2, 1e-12).unwrap();
        assert!(ep.ode_residual < 1e-8, "{}", ep.ode_residual);
    }

    #[test]
    fn non_generic_refused() {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let t = pencil([z, z, c(0.5, 0.0)], [z, c(2.0, 0.0)], [z, z], one, z, z);
        assert!(matches!(gen_cauchy_residual(&t, 1, &[10], &[c(2.0, 0.0)], 1e-12), Err(Error::NonGenericPencil(Some(_)))));
    }
}
