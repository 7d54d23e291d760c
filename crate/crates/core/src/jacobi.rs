//! Jacobi polynomials `P_n^{(alpha, beta)}` with complex parameters.
//!
//! Monomial coefficients come from back-substitution of the Jacobi equation
//! `(1-z^2) y'' + (beta - alpha - (alpha+beta+2) z) y' + n(n+alpha+beta+1) y = 0`
//! in double-double arithmetic. Writing `y = sum a_j z^j`, the coefficient of
//! `z^j` gives
//!
//! ```text
//! (n-j)(n+j+alpha+beta+1) a_j = -(j+2)(j+1) a_{j+2} - (beta-alpha)(j+1) a_{j+1}
//! ```
//!
//! started from `a_n = (n+alpha+beta+1)_n / (2^n n!)`. The explicit binomial
//! sum is mathematically identical but cancels catastrophically once the
//! parameters grow with `n`; it is kept as the fallback for the parameter sets
//! where the recurrence denominator vanishes (these are exactly the sets where
//! the degree drops) and as an independent oracle.

use crate::ddouble::{CDD, DD};
use crate::error::{Error, Result};
use crate::poly::{find_roots_with, ComplexPolynomial, ExtendedPolynomial, RootCountingMeasure, RootEval};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Degrees above this use double-double evaluation in the root finder.
pub const EXTENDED_PRECISION_DEGREE: usize = 32;
/// Relative size under which a recurrence denominator counts as vanishing.
const DENOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    pub n: usize,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl JacobiParams {
    pub fn new(n: usize, alpha: Complex64, beta: Complex64) -> Self {
        JacobiParams { n, alpha, beta }
    }

    /// Eigenvalue `n(n+alpha+beta+1)` of the Jacobi equation.
    pub fn lambda(&self) -> Complex64 {
        let n = self.n as f64;
        (self.alpha + self.beta + n + 1.0) * n
    }

    /// Parameters with `alpha` and `beta` exchanged.
    pub fn swapped(&self) -> Self {
        JacobiParams { n: self.n, alpha: self.beta, beta: self.alpha }
    }
}

/// `alpha_n = A n + alpha0`, `beta_n = B n + beta0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSequence {
    pub a: Complex64,
    pub b: Complex64,
    pub alpha0: Complex64,
    pub beta0: Complex64,
}

impl ParamSequence {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        ParamSequence { a, b, alpha0: Complex64::default(), beta0: Complex64::default() }
    }

    pub fn with_offsets(mut self, alpha0: Complex64, beta0: Complex64) -> Self {
        self.alpha0 = alpha0;
        self.beta0 = beta0;
        self
    }

    pub fn params(&self, n: usize) -> JacobiParams {
        let nf = n as f64;
        JacobiParams::new(n, self.a * nf + self.alpha0, self.b * nf + self.beta0)
    }
}

/// How the coefficients were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    OdeRecurrence,
    BinomialSum,
}

#[derive(Debug, Clone)]
pub struct JacobiPolynomial {
    pub params: JacobiParams,
    extended: ExtendedPolynomial,
    poly: ComplexPolynomial,
    /// True when the actual degree is below `n`.
    pub degree_drop: bool,
    pub construction: Construction,
}

impl JacobiPolynomial {
    pub fn poly(&self) -> &ComplexPolynomial {
        &self.poly
    }

    pub fn extended(&self) -> &ExtendedPolynomial {
        &self.extended
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.extended.evaluate(CDD::from(z)).to_c64()
    }

    /// Roots by Aberth–Ehrlich. The iteration evaluates `P_n` through the
    /// three-term recurrence in `n`, which stays accurate where the monomial
    /// basis does not (for `alpha = 2.5n, beta = 0.2n` at `n = 60` the
    /// monomial root condition number is about 1e27). Double-double is used
    /// above [`EXTENDED_PRECISION_DEGREE`]. Parameter sets where the
    /// recurrence divides by zero fall back to the monomial coefficients.
    pub fn roots(&self, tol: f64) -> Result<RootCountingMeasure> {
        let extended = self.params.n > EXTENDED_PRECISION_DEGREE;
        if !self.degree_drop && self.params.n >= 2 {
            if extended {
                if let Some(ev) = RecurrenceEval::<CDD>::new(self) {
                    return find_roots_with(&ev, tol);
                }
            } else if let Some(ev) = RecurrenceEval::<Complex64>::new(self) {
                return find_roots_with(&ev, tol);
            }
        }
        if extended {
            self.extended.find_roots(tol)
        } else {
            self.poly.find_roots(tol)
        }
    }

    /// Value and derivative through the three-term recurrence (double-double),
    /// or by Horner on the coefficients where the recurrence is singular.
    pub fn evaluate_stable(&self, z: Complex64) -> (Complex64, Complex64) {
        match RecurrenceEval::<CDD>::new(self) {
            Some(ev) if !self.degree_drop => {
                let (p, dp, _, scales) = ev.eval_scaled(z);
                // undo the rescaling; past f64 range this is honestly infinite
                scales.iter().fold((p, dp), |(p, dp), &f| (p * f, dp * f))
            }
            _ => {
                let (p, dp, _) = self.extended.eval_pd(z);
                (p, dp)
            }
        }
    }

    /// CLI-facing record `{n, alpha, beta, roots}`.
    pub fn roots_json(&self, mu: &RootCountingMeasure) -> serde_json::Value {
        serde_json::json!({
            "n": self.params.n,
            "alpha": [self.params.alpha.re, self.params.alpha.im],
            "beta": [self.params.beta.re, self.params.beta.im],
            "degree_drop": self.degree_drop,
            "roots": mu.to_json(),
        })
    }
}

/// Scalar type the recurrence runs in.
trait Field:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + From<Complex64>
{
    fn c64(self) -> Complex64;
}

impl Field for Complex64 {
    fn c64(self) -> Complex64 {
        self
    }
}

impl Field for CDD {
    fn c64(self) -> Complex64 {
        self.to_c64()
    }
}

/// `P_k = ((a_k z + b_k) P_{k-1} - c_k P_{k-2})`, with the standard Jacobi
/// recurrence coefficients already divided by `2k(k+alpha+beta)(2k+alpha+beta-2)`.
struct RecurrenceEval<'a, T> {
    jp: &'a JacobiPolynomial,
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
    p1: (T, T),
    unit: f64,
}

impl<'a, T: Field> RecurrenceEval<'a, T> {
    fn new(jp: &'a JacobiPolynomial) -> Option<Self> {
        let JacobiParams { n, alpha, beta } = jp.params;
        let one = Complex64::new(1.0, 0.0);
        let t = |z: Complex64| T::from(z);
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        for k in 2..=n {
            let kf = k as f64;
            let s = alpha + beta + 2.0 * kf;
            let f1 = alpha + beta + kf;
            let f2 = s - 2.0;
            let scale = 1.0 + kf + (alpha + beta).norm();
            if f1.norm() <= 1e-10 * scale || f2.norm() <= 1e-10 * scale {
                return None;
            }
            let c0 = t(one * (2.0 * kf)) * t(f1) * t(f2);
            a.push(t((s - 1.0) * s) * t(f2) / c0);
            b.push(t(s - 1.0) * (t(alpha) * t(alpha) - t(beta) * t(beta)) / c0);
            c.push(t((alpha + kf - 1.0) * 2.0) * t(beta + kf - 1.0) * t(s) / c0);
        }
        let half = one * 0.5;
        let p1 = (t((alpha + beta + 2.0) * half), t((alpha - beta) * half));
        let unit = if std::mem::size_of::<T>() > 16 { 4.93e-32 } else { f64::EPSILON * 0.5 };
        Some(RecurrenceEval { jp, a, b, c, p1, unit })
    }

    /// Value, derivative and noise estimate, plus the factors divided out
    /// along the way to stay inside f64 range.
    fn eval_scaled(&self, z: Complex64) -> (Complex64, Complex64, f64, Vec<f64>) {
        let zz = T::from(z);
        let zero = T::from(Complex64::new(0.0, 0.0));
        if self.jp.params.n == 0 {
            return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.0, Vec::new());
        }
        let (mut p0, mut d0) = (T::from(Complex64::new(1.0, 0.0)), zero);
        let (mut p1, mut d1) = (self.p1.0 * zz + self.p1.1, self.p1.0);
        let mut noise = 0.0;
        let mut scales = Vec::new();
        for k in 0..self.a.len() {
            let lin = self.a[k] * zz + self.b[k];
            let p2 = lin * p1 - self.c[k] * p0;
            let d2 = lin * d1 + self.a[k] * p1 - self.c[k] * d0;
            noise = (lin.c64().norm() * p1.c64().norm() + self.c[k].c64().norm() * p0.c64().norm()) * self.unit;
            p0 = p1;
            p1 = p2;
            d0 = d1;
            d1 = d2;
            // far from the roots the values outgrow f64; only ratios matter
            // to the iteration, so rescale all four together
            let big = p1.c64().norm().max(d1.c64().norm());
            if big > 1e150 {
                let f = T::from(Complex64::new(1.0 / big, 0.0));
                p0 = p0 * f;
                p1 = p1 * f;
                d0 = d0 * f;
                d1 = d1 * f;
                noise /= big;
                scales.push(big);
            }
        }
        let n = self.jp.params.n as f64;
        (p1.c64(), d1.c64(), 4.0 * n * noise, scales)
    }
}

impl<T: Field> RootEval for RecurrenceEval<'_, T> {
    fn deg(&self) -> Option<usize> {
        Some(self.jp.params.n)
    }

    /// Values are exact up to a common positive factor once they would
    /// overflow; near the roots no rescaling happens.
    fn eval_pd(&self, z: Complex64) -> (Complex64, Complex64, f64) {
        let (p, dp, noise, _) = self.eval_scaled(z);
        (p, dp, noise)
    }

    fn abs_coeffs(&self) -> Vec<f64> {
        self.jp.extended.coeffs().iter().map(|c| c.abs_f64()).collect()
    }

    fn taylor(&self, z: Complex64, m: usize) -> Vec<Complex64> {
        self.jp.extended.taylor(z, m)
    }
}

fn cdd(z: Complex64) -> CDD {
    CDD::from(z)
}

fn real(x: f64) -> CDD {
    CDD::from(x)
}

/// Complex binomial `C(g, m)` as a product of `(g - j)/(j + 1)`.
pub fn binomial(g: Complex64, m: usize) -> Complex64 {
    binomial_dd(cdd(g), m).to_c64()
}

fn binomial_dd(g: CDD, m: usize) -> CDD {
    let mut acc = CDD::ONE;
    for j in 0..m {
        acc = acc * (g - real(j as f64)) / real((j + 1) as f64);
    }
    acc
}

/// Falling factorial `g (g-1) ... (g-k+1)`.
fn falling(g: Complex64, k: usize) -> Complex64 {
    (0..k).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (g - j as f64))
}

fn binomial_sum_coeffs(p: &JacobiParams) -> Vec<CDD> {
    let n = p.n;
    let na = cdd(p.alpha) + real(n as f64);
    let nb = cdd(p.beta) + real(n as f64);
    let mut out = vec![CDD::ZERO; n + 1];
    let half_n = DD::ONE / DD::new(2f64.powi(n as i32));
    for k in 0..=n {
        let w = binomial_dd(na, n - k) * binomial_dd(nb, k);
        // (z-1)^k (z+1)^{n-k} has exact integer coefficients
        let mut basis = vec![DD::ZERO; n + 1];
        basis[0] = DD::ONE;
        let mut deg = 0;
        for step in 0..n {
            let shift = if step < k { -1.0 } else { 1.0 };
            for j in (0..=deg + 1).rev() {
                let lower = if j > 0 { basis[j - 1] } else { DD::ZERO };
                basis[j] = lower + basis[j] * DD::new(shift);
            }
            deg += 1;
        }
        for (j, b) in basis.iter().enumerate() {
            out[j] = out[j] + w.scale(*b * half_n);
        }
    }
    out
}

/// The explicit binomial sum
/// `2^{-n} sum_k C(n+alpha, n-k) C(n+beta, k) (z-1)^k (z+1)^{n-k}`,
/// accumulated in double-double. Exact in structure, but it cancels badly when
/// the parameters are large.
pub fn jacobi_binomial_sum(p: &JacobiParams) -> ExtendedPolynomial {
    ExtendedPolynomial::new(binomial_sum_coeffs(p))
}

fn ode_coeffs(p: &JacobiParams) -> Option<Vec<CDD>> {
    let n = p.n;
    let s = cdd(p.alpha + p.beta);
    let ba = cdd(p.beta - p.alpha);
    // leading coefficient (n+a+b+1)_n / (2^n n!)
    let mut lead = CDD::ONE;
    for k in 1..=n {
        let f = s + real((n + k) as f64);
        if f.abs_f64() <= DENOM_TOL * (1.0 + (n + k) as f64) {
            return None;
        }
        lead = lead * f / real(2.0 * k as f64);
    }
    let mut a = vec![CDD::ZERO; n + 3];
    a[n] = lead;
    for j in (0..n).rev() {
        let denom = real((n - j) as f64) * (s + real((n + j + 1) as f64));
        let rhs = -(a[j + 2] * real(((j + 2) * (j + 1)) as f64) + ba * a[j + 1] * real((j + 1) as f64));
        a[j] = rhs / denom;
    }
    a.truncate(n + 1);
    Some(a)
}

/// `P_n^{(alpha, beta)}` in the monomial basis.
pub fn jacobi_poly(p: &JacobiParams) -> JacobiPolynomial {
    let (coeffs, construction) = match ode_coeffs(p) {
        Some(c) => (c, Construction::OdeRecurrence),
        None => (binomial_sum_coeffs(p), Construction::BinomialSum),
    };
    let scale = coeffs.iter().map(|c| c.abs_f64()).fold(0.0, f64::max);
    let lead = coeffs.last().map(|c| c.abs_f64()).unwrap_or(0.0);
    // the leading coefficient (n+a+b+1)_n / (2^n n!) vanishes only where the
    // recurrence was abandoned, so only the fallback can drop degree
    let degree_drop = construction == Construction::BinomialSum && p.n > 0 && lead <= 1e-13 * scale.max(f64::MIN_POSITIVE);
    let mut coeffs = coeffs;
    if degree_drop {
        while coeffs.len() > 1 && coeffs.last().unwrap().abs_f64() <= 1e-13 * scale {
            coeffs.pop();
        }
    }
    let extended = ExtendedPolynomial::new(coeffs);
    let poly = extended.to_f64();
    JacobiPolynomial { params: *p, extended, poly, degree_drop, construction }
}

/// Value of the Rodrigues construction at one point,
/// `(-1)^n / (2^n n!) sum_k C(n,k) (-1)^k ff(alpha+n,k) ff(beta+n,n-k) (1-z)^{n-k} (1+z)^k`,
/// together with the sum of term magnitudes.
fn rodrigues_value(p: &JacobiParams, z: Complex64) -> (Complex64, f64) {
    let n = p.n;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    let mut nck = 1.0;
    for k in 0..=n {
        if k > 0 {
            nck = nck * (n - k + 1) as f64 / k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let t = falling(p.alpha + n as f64, k)
            * falling(p.beta + n as f64, n - k)
            * (1.0 - z).powu((n - k) as u32)
            * (1.0 + z).powu(k as u32)
            * (nck * sign);
        sum += t;
        mag += t.norm();
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let c = (if n % 2 == 0 { 1.0 } else { -1.0 }) / (2f64.powi(n as i32) * fact);
    (sum * c, mag * c.abs())
}

/// Max deviation between `jacobi_poly` and the Rodrigues formula on `grid`,
/// relative to the magnitude of the Rodrigues terms at each point.
pub fn jacobi_rodrigues_check(p: &JacobiParams, grid: &[Complex64]) -> Result<f64> {
    if p.n > 12 {
        return Err(Error::DegreeOutOfRange(format!("Rodrigues check needs n <= 12, got {}", p.n)));
    }
    let jp = jacobi_poly(p);
    let mut worst: f64 = 0.0;
    for &z in grid {
        if (z - 1.0).norm() == 0.0 || (z + 1.0).norm() == 0.0 {
            return Err(Error::GridAtPole(z));
        }
        let (r, mag) = rodrigues_value(p, z);
        let v = jp.evaluate(z);
        worst = worst.max((v - r).norm() / mag.max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Max over `grid` of the Jacobi-equation residual of `poly`, divided by the
/// sum of the magnitudes of the three terms (each evaluated as a sum of
/// coefficient magnitudes). A `(1+|z|)^n` normalisation is not scale
/// invariant for complex parameters, where the individual terms are large and
/// cancel; this one is, and rounding the coefficients to `f64` costs about
/// `n * 1e-16` in it.
pub fn ode_residual(p: &JacobiParams, poly: &ComplexPolynomial, grid: &[Complex64]) -> f64 {
    let d1 = poly.derivative();
    let d2 = d1.derivative();
    let lam = p.lambda();
    let mut worst: f64 = 0.0;
    for &z in grid {
        let y = crate::poly::evaluate_dd(poly, z);
        let y1 = crate::poly::evaluate_dd(&d1, z);
        let y2 = crate::poly::evaluate_dd(&d2, z);
        let c2 = 1.0 - z * z;
        let c1 = p.beta - p.alpha - (p.alpha + p.beta + 2.0) * z;
        let r = c2 * y2 + c1 * y1 + lam * y;
        let scale = c2.norm() * d2.abs_eval(z) + c1.norm() * d1.abs_eval(z) + lam.norm() * poly.abs_eval(z);
        if scale > 0.0 {
            worst = worst.max(r.norm() / scale);
        }
    }
    worst
}

/// `C(n+alpha, n)`, the value at `z = 1`.
pub fn value_at_one(p: &JacobiParams) -> Complex64 {
    binomial(p.alpha + p.n as f64, p.n)
}

/// One root-counting measure per degree.
pub fn root_cloud_sequence(seq: &ParamSequence, degrees: &[usize], tol: f64) -> Result<Vec<RootCountingMeasure>> {
    degrees.iter().map(|&n| jacobi_poly(&seq.params(n)).roots(tol)).collect()
}

/// Symmetric Hausdorff distance between the root sets of `p` and `p'`.
pub fn derivative_measure_distance(mu_p: &RootCountingMeasure, mu_pprime: &RootCountingMeasure) -> f64 {
    mu_p.hausdorff(mu_pprime)
}
