//! Dense complex polynomials, the Aberth–Ehrlich root finder and root-counting
//! measures.
//!
//! Two coefficient carriers share one root finder: [`ComplexPolynomial`] with
//! `f64` parts and [`ExtendedPolynomial`] with double-double parts. The root
//! iterates are always `f64`; only the evaluation of `p` and `p'` changes, which
//! is where monomial-basis conditioning bites for high-degree Jacobi families.

use crate::ddouble::CDD;
use crate::error::{Error, Result};
use crate::output::fmt_f64;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const U64: f64 = f64::EPSILON * 0.5;
const UDD: f64 = 4.93e-32;

/// Iteration budget for the simultaneous iteration.
pub const ABERTH_MAX_ITER: usize = 1000;
/// Relative radius under which converged roots are collapsed into one atom.
pub const CLUSTER_RADIUS: f64 = 1e-8;
/// On-support guard: `|z - atom| <= GUARD * (1 + |z|)` is rejected.
pub const GUARD: f64 = 1e-12;

/// Polynomial with complex coefficients in ascending order.
///
/// Trailing zero coefficients are trimmed on construction, so the last stored
/// coefficient is the (nonzero) leading one. The zero polynomial has no
/// coefficients at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        ComplexPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        ComplexPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `lead * prod (z - r)`.
    pub fn from_roots(roots: &[Complex64], lead: Complex64) -> Self {
        let mut p = Self::constant(lead);
        for &r in roots {
            p = p.mul(&Self::new(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by a joint Horner pass.
    pub fn evaluate_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |c_k| |z|^k`, the scale against which evaluation error is measured.
    pub fn abs_eval(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Substitute `z -> -z`.
    pub fn reflect(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
                .collect(),
        )
    }

    pub fn find_roots(&self, tol: f64) -> Result<RootCountingMeasure> {
        find_roots_impl(self, tol)
    }
}

/// Groups roots closer than `tol * (1 + |z|)` and returns each group's first
/// member with its multiplicity.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for &r in roots {
        if let Some(e) = out.iter_mut().find(|(z, _)| (*z - r).norm() <= tol * (1.0 + r.norm())) {
            e.1 += 1;
        } else {
            out.push((r, 1));
        }
    }
    out
}

pub fn evaluate(poly: &ComplexPolynomial, z: Complex64) -> Complex64 {
    poly.evaluate(z)
}

pub fn derivative(poly: &ComplexPolynomial) -> ComplexPolynomial {
    poly.derivative()
}

pub fn find_roots(poly: &ComplexPolynomial, tol: f64) -> Result<RootCountingMeasure> {
    poly.find_roots(tol)
}

/// Roots of `a x^2 + b x + c`, avoiding cancellation. Fewer than two roots
/// come back when `a` (and then `b`) vanishes exactly.
pub fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    if a.norm() == 0.0 {
        return if b.norm() == 0.0 { Vec::new() } else { vec![-c / b] };
    }
    let sq = (b * b - 4.0 * a * c).sqrt();
    let q = if (b.conj() * sq).re >= 0.0 { -0.5 * (b + sq) } else { -0.5 * (b - sq) };
    if q.norm() == 0.0 {
        vec![Complex64::new(0.0, 0.0); 2]
    } else {
        vec![q / a, c / q]
    }
}

/// Polynomial with double-double complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPolynomial {
    coeffs: Vec<CDD>,
}

impl ExtendedPolynomial {
    pub fn new(mut coeffs: Vec<CDD>) -> Self {
        while coeffs.last().is_some_and(|c| *c == CDD::ZERO) {
            coeffs.pop();
        }
        ExtendedPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[CDD] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn to_f64(&self) -> ComplexPolynomial {
        ComplexPolynomial::new(self.coeffs.iter().map(|c| c.to_c64()).collect())
    }

    pub fn evaluate(&self, z: CDD) -> CDD {
        self.coeffs.iter().rev().fold(CDD::ZERO, |acc, &c| acc * z + c)
    }

    pub fn scale(&self, s: CDD) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn find_roots(&self, tol: f64) -> Result<RootCountingMeasure> {
        find_roots_impl(self, tol)
    }
}

/// What the root finder needs from a polynomial: the iteration only ever
/// evaluates, so any stable evaluation scheme can stand in for Horner.
pub trait RootEval {
    fn deg(&self) -> Option<usize>;
    /// Value, derivative, and a bound on the rounding noise of the value.
    fn eval_pd(&self, z: Complex64) -> (Complex64, Complex64, f64);
    fn abs_coeffs(&self) -> Vec<f64>;
    /// Taylor coefficients `p^{(j)}(z)/j!` for `j = 0..=m`.
    fn taylor(&self, z: Complex64, m: usize) -> Vec<Complex64>;
}

fn taylor_shift<T>(coeffs: &[T], z: T, m: usize) -> Vec<T>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
{
    let mut a = coeffs.to_vec();
    let n = a.len() - 1;
    let mut out = Vec::with_capacity(m + 1);
    for j in 0..=m.min(n) {
        for i in (j..n).rev() {
            a[i] = a[i] + z * a[i + 1];
        }
        out.push(a[j]);
    }
    out
}

impl RootEval for ComplexPolynomial {
    fn deg(&self) -> Option<usize> {
        self.degree()
    }
    fn eval_pd(&self, z: Complex64) -> (Complex64, Complex64, f64) {
        let (p, dp) = self.evaluate_with_derivative(z);
        let n = self.coeffs.len() as f64;
        (p, dp, 4.0 * n * U64 * self.abs_eval(z))
    }
    fn abs_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }
    fn taylor(&self, z: Complex64, m: usize) -> Vec<Complex64> {
        taylor_shift(&self.coeffs, z, m)
    }
}

impl RootEval for ExtendedPolynomial {
    fn deg(&self) -> Option<usize> {
        self.degree()
    }
    fn eval_pd(&self, z: Complex64) -> (Complex64, Complex64, f64) {
        let zz = CDD::from(z);
        let mut p = CDD::ZERO;
        let mut dp = CDD::ZERO;
        let r = z.norm();
        let mut scale = 0.0;
        for c in self.coeffs.iter().rev() {
            dp = dp * zz + p;
            p = p * zz + *c;
            scale = scale * r + c.abs_f64();
        }
        let n = self.coeffs.len() as f64;
        (p.to_c64(), dp.to_c64(), 4.0 * n * UDD * scale)
    }
    fn abs_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.abs_f64()).collect()
    }
    fn taylor(&self, z: Complex64, m: usize) -> Vec<Complex64> {
        taylor_shift(&self.coeffs, CDD::from(z), m).into_iter().map(|c| c.to_c64()).collect()
    }
}

/// Fujiwara's bound on the moduli of the roots.
fn fujiwara_radius(a: &[f64]) -> f64 {
    let n = a.len() - 1;
    let lead = a[n];
    let mut r: f64 = 0.0;
    for k in 1..=n {
        let mut c = a[n - k] / lead;
        if k == n {
            c *= 0.5;
        }
        r = r.max(c.powf(1.0 / k as f64));
    }
    2.0 * r
}

/// Aberth–Ehrlich on any evaluator.
pub fn find_roots_with<P: RootEval>(p: &P, tol: f64) -> Result<RootCountingMeasure> {
    find_roots_impl(p, tol)
}

fn find_roots_impl<P: RootEval>(p: &P, tol: f64) -> Result<RootCountingMeasure> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let n = match p.deg() {
        None => return Err(Error::ZeroPolynomial),
        Some(0) => return Err(Error::DegreeTooLow { need: 1, got: 0 }),
        Some(n) => n,
    };
    let a = p.abs_coeffs();
    let maxc = a.iter().cloned().fold(0.0, f64::max);

    // Root-free disc around zero from the lowest nonzero coefficient: low-order
    // zero coefficients mean exact roots at the origin.
    let zeros_at_origin = a.iter().take_while(|&&c| c == 0.0).count();
    let radius = fujiwara_radius(&a[zeros_at_origin..]).max(f64::MIN_POSITIVE);

    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            if k < zeros_at_origin {
                Complex64::new(0.0, 0.0)
            } else {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
                Complex64::from_polar(radius, t)
            }
        })
        .collect();
    let mut done = vec![false; n];
    for d in done.iter_mut().take(zeros_at_origin) {
        *d = true;
    }

    let mut iterations = 0;
    while iterations < ABERTH_MAX_ITER {
        iterations += 1;
        let mut active = false;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (v, dv, noise) = p.eval_pd(z[i]);
            if v.norm() <= noise {
                done[i] = true;
                continue;
            }
            active = true;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() > 0.0 {
                        s += d.inv();
                    }
                }
            }
            let w = if dv.norm() == 0.0 {
                // stationary point: kick off it
                Complex64::from_polar(1e-3 * (1.0 + z[i].norm()), i as f64)
            } else {
                let ratio = v / dv;
                ratio / (Complex64::new(1.0, 0.0) - ratio * s)
            };
            if !w.is_finite() {
                continue;
            }
            z[i] -= w;
            if w.norm() <= 4.0 * U64 * z[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
            }
        }
        if !active {
            break;
        }
    }

    // Newton polish, accepted only if it lowers the residual.
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv, _) = p.eval_pd(*zi);
            if dv.norm() == 0.0 || v.norm() == 0.0 {
                break;
            }
            let cand = *zi - v / dv;
            let (vc, _, _) = p.eval_pd(cand);
            if vc.norm() < v.norm() {
                *zi = cand;
            } else {
                break;
            }
        }
    }

    merge_multiple_roots(p, &mut z);
    cluster(&mut z, CLUSTER_RADIUS);

    let mut worst: f64 = 0.0;
    // the residual bound alone is weak far from the unit disc, so an iterate
    // that never settled is a failure whatever its residual
    let mut ok = done.iter().all(|&d| d);
    for &r in &z {
        let (v, _, _) = p.eval_pd(r);
        let bound = tol * maxc * r.norm().max(1.0).powi(n as i32);
        let rel = v.norm() / (maxc * r.norm().max(1.0).powi(n as i32));
        worst = worst.max(rel);
        if !(v.norm() <= bound) {
            ok = false;
        }
    }
    if !ok {
        return Err(Error::RootsNotConverged { iterations, residual: worst, best: z });
    }
    sort_roots(&mut z);
    Ok(RootCountingMeasure { roots: z })
}

/// Collapse groups of nearby iterates whose mean evaluates to rounding noise:
/// the signature of a multiple root, which Aberth resolves only to about the
/// square root of the working precision.
fn merge_multiple_roots<P: RootEval>(p: &P, z: &mut [Complex64]) {
    let n = z.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (z[i] - z[j]).norm() <= 1e-5 * z[i].norm().max(1.0) {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    for root in 0..n {
        let members: Vec<usize> = (0..n).filter(|&i| find(&mut group, i) == root).collect();
        if members.len() < 2 {
            continue;
        }
        let k = members.len();
        let mut m = members.iter().map(|&i| z[i]).sum::<Complex64>() / k as f64;
        // Newton on p^{(k-1)}, for which a k-fold root of p is simple
        for _ in 0..4 {
            let t = p.taylor(m, k);
            if t.len() <= k || t[k].norm() == 0.0 {
                break;
            }
            let step = t[k - 1] / (t[k] * k as f64);
            if !step.is_finite() || step.norm() > 1e-5 * m.norm().max(1.0) {
                break;
            }
            m -= step;
        }
        let (v, _, noise) = p.eval_pd(m);
        if v.norm() <= 100.0 * noise.max(f64::MIN_POSITIVE) {
            for &i in &members {
                z[i] = m;
            }
        }
    }
}

fn cluster(z: &mut [Complex64], radius: f64) {
    let n = z.len();
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> = (i..n)
            .filter(|&j| !assigned[j] && (z[i] - z[j]).norm() <= radius * z[i].norm().max(1.0))
            .collect();
        let m = members.iter().map(|&j| z[j]).sum::<Complex64>() / members.len() as f64;
        for &j in &members {
            assigned[j] = true;
            z[j] = m;
        }
    }
}

/// Deterministic order: by real part, then imaginary part.
fn sort_roots(z: &mut [Complex64]) {
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Uniform probability measure on a multiset of roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCountingMeasure {
    roots: Vec<Complex64>,
}

impl RootCountingMeasure {
    pub fn new(roots: Vec<Complex64>) -> Self {
        RootCountingMeasure { roots }
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn n(&self) -> usize {
        self.roots.len()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.roots.len() as f64
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    fn guard(&self, z: Complex64) -> Result<()> {
        let g = GUARD * (1.0 + z.norm());
        match self.roots.iter().find(|r| (z - **r).norm() <= g) {
            Some(&atom) => Err(Error::OnSupport { z, atom }),
            None => Ok(()),
        }
    }

    /// `(1/n) sum 1/(z - xi)`.
    pub fn empirical_cauchy(&self, z: Complex64) -> Result<Complex64> {
        self.guard(z)?;
        let s: Complex64 = self.roots.iter().map(|r| (z - r).inv()).sum();
        Ok(s * self.weight())
    }

    /// `(1/n) sum log|z - xi|`.
    pub fn empirical_potential(&self, z: Complex64) -> Result<f64> {
        self.guard(z)?;
        let s: f64 = self.roots.iter().map(|r| (z - r).norm().ln()).sum();
        Ok(s * self.weight())
    }

    /// Symmetric Hausdorff distance between two root sets.
    pub fn hausdorff(&self, other: &Self) -> f64 {
        fn one_side(a: &[Complex64], b: &[Complex64]) -> f64 {
            a.iter()
                .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        }
        one_side(&self.roots, &other.roots).max(one_side(&other.roots, &self.roots))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im\n");
        for r in &self.roots {
            s.push_str(&format!("{},{}\n", fmt_f64(r.re), fmt_f64(r.im)));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut roots = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 && line.trim() == "re,im" || line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|t| t.trim().parse().ok())
                    .ok_or_else(|| Error::Io(format!("bad CSV line {}: {line}", i + 1)))
            };
            roots.push(Complex64::new(parse(it.next())?, parse(it.next())?));
        }
        Ok(Self::new(roots))
    }

    /// JSON array of `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.roots.iter().map(|r| serde_json::json!([r.re, r.im])).collect())
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::Io("expected array".into()))?;
        let mut roots = Vec::with_capacity(arr.len());
        for e in arr {
            let pair = e.as_array().filter(|p| p.len() == 2);
            let (re, im) = match pair {
                Some(p) => (p[0].as_f64(), p[1].as_f64()),
                None => (None, None),
            };
            match (re, im) {
                (Some(re), Some(im)) => roots.push(Complex64::new(re, im)),
                _ => return Err(Error::Io("expected [re, im] pairs".into())),
            }
        }
        Ok(Self::new(roots))
    }
}

pub fn empirical_cauchy(mu: &RootCountingMeasure, z: Complex64) -> Result<Complex64> {
    mu.empirical_cauchy(z)
}

pub fn empirical_potential(mu: &RootCountingMeasure, z: Complex64) -> Result<f64> {
    mu.empirical_potential(z)
}

/// Double-double Horner evaluation of an `f64` polynomial.
pub fn evaluate_dd(poly: &ComplexPolynomial, z: Complex64) -> Complex64 {
    let zz = CDD::from(z);
    poly.coeffs()
        .iter()
        .rev()
        .fold(CDD::ZERO, |acc, &c| acc * zz + CDD::from(c))
        .to_c64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn contains(mu: &RootCountingMeasure, z: Complex64, tol: f64) -> bool {
        mu.roots().iter().any(|r| (r - z).norm() < tol)
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(ComplexPolynomial::from_real(&[1.0, 0.0, 1.0]).evaluate(c(0.0, 1.0)), c(0.0, 0.0));
        assert_eq!(ComplexPolynomial::from_real(&[-1.0, 0.0, 0.0, 1.0]).evaluate(c(1.0, 0.0)), c(0.0, 0.0));
        assert_eq!(ComplexPolynomial::from_real(&[2.0, 3.0]).evaluate(c(1.0, 1.0)), c(5.0, 3.0));
    }

    #[test]
    fn derivative_examples() {
        assert!(ComplexPolynomial::from_real(&[7.0]).derivative().is_zero());
        assert_eq!(
            ComplexPolynomial::from_real(&[0.0, 0.0, 1.0]).derivative(),
            ComplexPolynomial::from_real(&[0.0, 2.0])
        );
        assert_eq!(
            ComplexPolynomial::from_real(&[1.0, 2.0, 3.0]).derivative(),
            ComplexPolynomial::from_real(&[2.0, 6.0])
        );
    }

    #[test]
    fn roots_of_small_polynomials() {
        let mu = ComplexPolynomial::from_real(&[1.0, 0.0, 1.0]).find_roots(1e-12).unwrap();
        assert_eq!(mu.n(), 2);
        assert!(contains(&mu, c(0.0, 1.0), 1e-14) && contains(&mu, c(0.0, -1.0), 1e-14));

        let mu = ComplexPolynomial::from_real(&[-1.0, 0.0, 0.0, 1.0]).find_roots(1e-12).unwrap();
        for k in 0..3 {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
            assert!(contains(&mu, w, 1e-14));
        }

        let mu = ComplexPolynomial::from_real(&[-0.5, 0.0, 1.5]).find_roots(1e-12).unwrap();
        assert!(contains(&mu, c(0.5773503, 0.0), 1e-7) && contains(&mu, c(-0.5773503, 0.0), 1e-7));
    }

    #[test]
    fn rejects_zero_and_constant() {
        assert!(matches!(ComplexPolynomial::zero().find_roots(1e-12), Err(Error::ZeroPolynomial)));
        assert!(matches!(
            ComplexPolynomial::from_real(&[3.0]).find_roots(1e-12),
            Err(Error::DegreeTooLow { .. })
        ));
        assert!(matches!(
            ComplexPolynomial::from_real(&[1.0, 1.0]).find_roots(0.0),
            Err(Error::InvalidTolerance(_))
        ));
    }

    #[test]
    fn double_root_collapses() {
        let p = ComplexPolynomial::from_roots(&[c(0.3, 0.0), c(0.3, 0.0), c(-1.0, 2.0)], c(1.0, 0.0));
        let mu = p.find_roots(1e-12).unwrap();
        let hits = mu.roots().iter().filter(|r| **r == mu.roots()[0]).count()
            + mu.roots().iter().filter(|r| **r == mu.roots()[2]).count();
        assert!(hits >= 2);
        assert!(contains(&mu, c(0.3, 0.0), 1e-10));
    }

    #[test]
    fn roots_at_origin() {
        let p = ComplexPolynomial::from_real(&[0.0, 0.0, -1.0, 1.0]);
        let mu = p.find_roots(1e-12).unwrap();
        assert_eq!(mu.roots().iter().filter(|r| r.norm() == 0.0).count(), 2);
        assert!(contains(&mu, c(1.0, 0.0), 1e-14));
    }

    #[test]
    fn cauchy_and_potential_examples() {
        let d0 = RootCountingMeasure::new(vec![c(0.0, 0.0)]);
        assert_eq!(d0.empirical_cauchy(c(2.0, 0.0)).unwrap(), c(0.5, 0.0));
        let pm = RootCountingMeasure::new(vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(pm.empirical_cauchy(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let ii = RootCountingMeasure::new(vec![c(0.0, 1.0), c(0.0, -1.0)]);
        assert!((ii.empirical_cauchy(c(1.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);

        assert!((d0.empirical_potential(c(std::f64::consts::E, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pm.empirical_potential(c(0.0, 0.0)).unwrap(), 0.0);
        let two = RootCountingMeasure::new(vec![c(2.0, 0.0)]);
        assert!((two.empirical_potential(c(0.0, 0.0)).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn on_support_is_an_error() {
        let mu = RootCountingMeasure::new(vec![c(0.5, 0.5)]);
        assert!(matches!(mu.empirical_cauchy(c(0.5, 0.5)), Err(Error::OnSupport { .. })));
        assert!(matches!(mu.empirical_potential(c(0.5, 0.5 + 1e-13)), Err(Error::OnSupport { .. })));
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let mu = RootCountingMeasure::new(vec![c(0.1, -2.0), c(1.0 / 3.0, 0.0)]);
        assert_eq!(RootCountingMeasure::from_csv(&mu.to_csv()).unwrap(), mu);
        assert_eq!(RootCountingMeasure::from_json(&mu.to_json()).unwrap(), mu);
    }

    #[test]
    fn extended_matches_plain_on_easy_input() {
        let p = ComplexPolynomial::from_roots(&[c(1.0, 1.0), c(-2.0, 0.5), c(0.25, 0.0)], c(2.0, -1.0));
        let e = ExtendedPolynomial::new(p.coeffs().iter().map(|&z| CDD::from(z)).collect());
        let a = p.find_roots(1e-12).unwrap();
        let b = e.find_roots(1e-12).unwrap();
        for (x, y) in a.roots().iter().zip(b.roots()) {
            assert!((x - y).norm() < 1e-13);
        }
    }
}
