//! The canonical map `F(z) = (1/2pi) int_{p1}^z sqrt(Q) dz` of the normalized
//! differential, its strip diagram in the `w`-plane, and the short geodesics
//! and geodesic loops it determines.
//!
//! With `a = sqrt(C1)/2` and `b = sqrt(Cm1)/2` on the height-positive
//! branches, the periods of `F` around `inf`, `+1`, `-1` are `1`, `a`, `b`.
//! Every short geodesic between the zeros integrates to one of
//! `(+-1 + a +- b)/2` and every loop to a period, so its rotation angle is
//! `s = 2 arg(v) mod 2pi`: the differential `e^{-is} Q dz^2` has the arc as a
//! horizontal trajectory.
//!
//! Strip diagram (b2 orientation, `h1 > 0`): `W2 = x2 + i h1` and
//! `W2' = x2' + i h` are
//!
//! ```text
//! W2  = 1/2 + (sqrt(C1) - sqrt(Cm1)) / 4
//! W2' = 1/2 + (sqrt(C1) + sqrt(Cm1)) / 4
//! ```
//!
//! The line through `0` parallel to `W2 - 1` meets `Im w = h` at
//! `u1 = (x2 - 1) h / h1`; the line through `1` and `W2` at `u2 = u1 + 1`; the
//! line through `0` and `W2` at `u3 = x2 h / h1`; its parallel through `1` at
//! `u4 = u3 + 1`. The subcase letter records where `x2'` falls among them.

use crate::error::{Error, Result};
use crate::output::fmt_f64;
use crate::qdclass::{
    classify, leading_coeffs, sqrt_upper, NormalizedQD, Orientation, Pole, TopologicalType, ZeroLabel,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

/// Tolerance on the equalities that define the degenerate subcases.
pub const SUBCASE_TOL: f64 = 1e-9;
/// s-values closer than this are reported as one.
pub const S_TOL: f64 = 1e-9;
/// Minimum distance from a quadrature path to a critical point.
pub const PATH_CLEARANCE: f64 = 1e-3;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(a, b) = (sqrt_upper(C1) / 2, sqrt_upper(Cm1) / 2)`.
pub fn half_periods(qd: &NormalizedQD) -> Result<(Complex64, Complex64)> {
    let (c1, cm1) = leading_coeffs(qd)?;
    Ok((0.5 * sqrt_upper(c1), 0.5 * sqrt_upper(cm1)))
}

fn w_points(c1: Complex64, cm1: Complex64) -> (Complex64, Complex64) {
    let (s1, sm1) = (sqrt_upper(c1), sqrt_upper(cm1));
    (0.5 + 0.25 * (s1 - sm1), 0.5 + 0.25 * (s1 + sm1))
}

/// `F(p2) = 1/2 + (sqrt(C1) - sqrt(Cm1)) / 4` on the height-positive branches.
pub fn f_p2_closed_form(qd: &NormalizedQD) -> Result<Complex64> {
    if !qd.is_generic() {
        return Err(Error::DegenerateParameters(format!("non-generic pair {}, {}", qd.p1, qd.p2)));
    }
    let (c1, cm1) = leading_coeffs(qd)?;
    Ok(w_points(c1, cm1).0)
}

/// Distance from `v` to the nearest point of `+-target + Z + Z a + Z b`,
/// searching coefficients up to 4 in modulus.
pub fn lattice_deviation(qd: &NormalizedQD, v: Complex64, target: Complex64) -> Result<f64> {
    let (a, b) = half_periods(qd)?;
    let mut best = f64::INFINITY;
    for sign in [1.0, -1.0] {
        let d0 = sign * v - target;
        for m in -4..=4 {
            for j in -4..=4 {
                for k in -4..=4 {
                    let d = d0 - m as f64 - a * j as f64 - b * k as f64;
                    best = best.min(d.norm());
                }
            }
        }
    }
    Ok(best)
}

/// Sheet choices for the elementary antiderivative `Phi`: the radicals
/// `sqrt(p_k -+ 1)` are fixed once, so `sqrt(C1) = t1 t2` and
/// `sqrt(Cm1) = u1 u2`; `sqrt(z - p_k)` and the five logarithms are continued
/// from the previous evaluation point.
#[derive(Debug, Clone)]
pub struct PhiBranch {
    qd: NormalizedQD,
    t: [Complex64; 2],
    u: [Complex64; 2],
    r: Option<[Complex64; 2]>,
    logs: Option<[Complex64; 5]>,
    /// Check `dPhi/dz = sqrt(Q) / 2pi` by central differences at every call.
    pub validate: bool,
}

fn nearest_sign(v: Complex64, prev: Complex64) -> Complex64 {
    if (v - prev).norm() <= (v + prev).norm() {
        v
    } else {
        -v
    }
}

fn nearest_log(w: Complex64, prev: Complex64) -> Complex64 {
    let l = w.ln();
    let k = ((prev.im - l.im) / TAU).round();
    l + c(0.0, k * TAU)
}

impl PhiBranch {
    pub fn new(qd: &NormalizedQD) -> Result<Self> {
        leading_coeffs(qd)?;
        Ok(PhiBranch {
            qd: *qd,
            t: [(qd.p1 - 1.0).sqrt(), (qd.p2 - 1.0).sqrt()],
            u: [(qd.p1 + 1.0).sqrt(), (qd.p2 + 1.0).sqrt()],
            r: None,
            logs: None,
            validate: true,
        })
    }

    pub fn sqrt_c1(&self) -> Complex64 {
        self.t[0] * self.t[1]
    }

    pub fn sqrt_cm1(&self) -> Complex64 {
        self.u[0] * self.u[1]
    }

    fn radicals(&self, z: Complex64) -> [Complex64; 2] {
        let r = [(z - self.qd.p1).sqrt(), (z - self.qd.p2).sqrt()];
        match self.r {
            Some(prev) => [nearest_sign(r[0], prev[0]), nearest_sign(r[1], prev[1])],
            None => r,
        }
    }

    fn raw(&self, z: Complex64) -> ([Complex64; 2], [Complex64; 5]) {
        let r = self.radicals(z);
        let (t, u) = (self.t, self.u);
        let args = [z - 1.0, z + 1.0, r[0] + r[1], u[0] * r[1] - u[1] * r[0], t[0] * r[1] - t[1] * r[0]];
        let logs = match self.logs {
            Some(prev) => std::array::from_fn(|k| nearest_log(args[k], prev[k])),
            None => args.map(|a| a.ln()),
        };
        (r, logs)
    }

    fn combine(&self, logs: &[Complex64; 5]) -> Complex64 {
        let (s1, sm1) = (self.sqrt_c1(), self.sqrt_cm1());
        (s1 * logs[0] - sm1 * logs[1] + 4.0 * logs[2] + 2.0 * sm1 * logs[3] - 2.0 * s1 * logs[4]) / c(0.0, 4.0 * PI)
    }

    /// The branch of `sqrt(Q)` this antiderivative integrates at `z`.
    pub fn sqrt_q(&self, z: Complex64) -> Complex64 {
        let r = self.radicals(z);
        c(0.0, -1.0) * r[0] * r[1] / ((z - 1.0) * (z + 1.0))
    }

    /// `Phi(z)`, continuing every sheet from the previous call.
    pub fn eval(&mut self, z: Complex64) -> Result<Complex64> {
        if (z - 1.0).norm() == 0.0 || (z + 1.0).norm() == 0.0 {
            return Err(Error::PointAtPole(z));
        }
        let (r, logs) = self.raw(z);
        self.r = Some(r);
        self.logs = Some(logs);
        let value = self.combine(&logs);
        let clearance = [self.qd.p1, self.qd.p2, c(1.0, 0.0), c(-1.0, 0.0)]
            .iter()
            .map(|p| (z - p).norm())
            .fold(f64::INFINITY, f64::min);
        if self.validate && clearance > PATH_CLEARANCE {
            let eps = 1e-5;
            let fd = (self.combine(&self.raw(z + eps).1) - self.combine(&self.raw(z - eps).1)) / (2.0 * eps);
            let want = self.sqrt_q(z) / TAU;
            let err = (fd - want).norm();
            if err > 1e-6 * (1.0 + want.norm()) {
                return Err(Error::BranchInconsistency(err));
            }
        }
        Ok(value)
    }
}

pub fn phi(qd: &NormalizedQD, z: Complex64, branch: &mut PhiBranch) -> Result<Complex64> {
    debug_assert_eq!(qd, &branch.qd);
    branch.eval(z)
}

/// `Phi` continued along a polyline, sampled finely enough that no sheet
/// jumps between consecutive points. Returns the values at the polyline
/// vertices.
pub fn phi_along(qd: &NormalizedQD, path: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut br = PhiBranch::new(qd)?;
    br.validate = false;
    let crit = [qd.p1, qd.p2, c(1.0, 0.0), c(-1.0, 0.0)];
    let Some(&first) = path.first() else { return Ok(Vec::new()) };
    let mut out = vec![br.eval(first)?];
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut t = 0.0;
        while t < 1.0 {
            let z = a + (b - a) * t;
            let d = crit.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min);
            let step = (0.05 * d.max(1e-4) / (b - a).norm().max(1e-300)).max(1e-6);
            t = (t + step).min(1.0);
            br.eval(a + (b - a) * t)?;
        }
        out.push(br.combine(br.logs.as_ref().expect("evaluated")));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FNumeric {
    pub value: Complex64,
    pub error_estimate: f64,
}

// 15-point Kronrod nodes and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64) -> (Complex64, f64) {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(mid);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let s = f(mid - x) + f(mid + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * half, ((k - g) * half).norm())
}

fn adaptive<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64, tol: f64, depth: usize) -> Result<(Complex64, f64)> {
    let (v, e) = gk15(f, lo, hi);
    // relative to the piece as well, or rounding near a pole never passes
    if e <= tol * (hi - lo).max(v.norm()) || hi - lo < 1e-14 {
        return Ok((v, e));
    }
    if depth == 0 {
        return Err(Error::QuadratureFailed(e));
    }
    let mid = 0.5 * (lo + hi);
    let (v1, e1) = adaptive(f, lo, mid, tol, depth - 1)?;
    let (v2, e2) = adaptive(f, mid, hi, tol, depth - 1)?;
    Ok((v1 + v2, e1 + e2))
}

fn seg_dist(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// `(1/2pi) int sqrt(Q) dz` along the polyline `z_from, waypoints.., z_to` by
/// adaptive Gauss-Kronrod quadrature. The branch is `-i sqrt(z - p1)
/// sqrt(z - p2) / (z^2 - 1)`, with both radicals continued along the path
/// from their principal values at the start. The path must keep
/// `PATH_CLEARANCE` from every critical point that is not one of its ends.
pub fn f_numeric(qd: &NormalizedQD, z_from: Complex64, z_to: Complex64, waypoints: &[Complex64]) -> Result<FNumeric> {
    leading_coeffs(qd)?;
    let mut path = vec![z_from];
    path.extend_from_slice(waypoints);
    path.push(z_to);
    let zeros = [qd.p1, qd.p2];
    for pole in [c(1.0, 0.0), c(-1.0, 0.0)] {
        for &z in [z_from, z_to].iter() {
            if (z - pole).norm() == 0.0 {
                return Err(Error::PointAtPole(z));
            }
        }
    }
    for &p in zeros.iter().chain([c(1.0, 0.0), c(-1.0, 0.0)].iter()) {
        let is_end = (p - z_from).norm() < 1e-14 || (p - z_to).norm() < 1e-14;
        let d = if is_end {
            // only the interior of the path has to stay clear of an endpoint
            path.windows(2)
                .enumerate()
                .filter(|(i, w)| !(*i == 0 && (w[0] - p).norm() < 1e-14) && !(*i == path.len() - 2 && (w[1] - p).norm() < 1e-14))
                .map(|(_, w)| seg_dist(p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min)
        } else {
            path.windows(2).map(|w| seg_dist(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
        };
        if d < PATH_CLEARANCE {
            return Err(Error::PathTooClose { point: p, distance: d });
        }
    }
    // split so each piece turns by less than a quarter turn as seen from each
    // zero; the ratio (z - p)/(z_start - p) then stays in the right half-plane
    let mut pieces = Vec::new();
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).norm();
        let mut n = 1usize;
        // a zero at an end of the segment needs no split: the ratio stays on
        // the positive real axis
        for &p in zeros.iter().filter(|&&p| (p - a).norm() >= 1e-14 && (p - b).norm() >= 1e-14) {
            n = n.max((4.0 * len / seg_dist(p, a, b)).ceil() as usize);
        }
        for k in 0..n {
            pieces.push((a + (b - a) * (k as f64 / n as f64), a + (b - a) * ((k + 1) as f64 / n as f64)));
        }
    }
    let mut r = [(z_from - qd.p1).sqrt(), (z_from - qd.p2).sqrt()];
    let mut total = c(0.0, 0.0);
    let mut err = 0.0;
    for (a, b) in pieces {
        let h = b - a;
        let base = r;
        let rad = |k: usize, t: f64| -> Complex64 {
            let p = zeros[k];
            if (a - p).norm() < 1e-14 {
                t.sqrt() * h.sqrt()
            } else {
                base[k] * ((a + h * t - p) / (a - p)).sqrt()
            }
        };
        let f = |t: f64| -> Complex64 {
            let z = a + h * t;
            c(0.0, -1.0) * rad(0, t) * rad(1, t) / ((z - 1.0) * (z + 1.0)) * h / TAU
        };
        // smoothstep substitution removes the square-root endpoint behaviour
        // when the piece starts or ends at a zero
        let touches = zeros.iter().any(|&p| (a - p).norm() < 1e-14 || (b - p).norm() < 1e-14);
        let g = |x: f64| -> Complex64 {
            if touches {
                f(x * x * (3.0 - 2.0 * x)) * (6.0 * x * (1.0 - x))
            } else {
                f(x)
            }
        };
        let (v, e) = adaptive(&g, 0.0, 1.0, 1e-13, 50)?;
        total += v;
        err += e;
        r = [rad(0, 1.0), rad(1, 1.0)];
    }
    Ok(FNumeric { value: total, error_estimate: err })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcase {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
}

impl Subcase {
    const ALL: [Subcase; 9] =
        [Subcase::A, Subcase::B, Subcase::C, Subcase::D, Subcase::E, Subcase::F, Subcase::G, Subcase::H, Subcase::I];

    pub fn from_index(i: usize) -> Subcase {
        Self::ALL[i]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        (b'a' + self as u8) as char
    }

    /// b, d, f, h: `x2'` sits exactly on one of the `u_k`.
    pub fn is_degenerate(self) -> bool {
        self.index() % 2 == 1
    }

    /// Letter of the complex-conjugate configuration: the diagram reflects in
    /// `Re w = 1/2`, which reverses the order of `u1..u4`.
    pub fn conjugated(self) -> Subcase {
        Self::ALL[8 - self.index()]
    }

    /// Short geodesics and loops.
    pub fn counts(self) -> (usize, usize) {
        match self {
            Subcase::B | Subcase::H => (4, 2),
            Subcase::D | Subcase::F => (3, 3),
            _ => (4, 3),
        }
    }
}

impl std::fmt::Display for Subcase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripDiagram {
    pub x2: f64,
    pub h1: f64,
    #[serde(rename = "x2prime")]
    pub x2p: f64,
    pub h: f64,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
    pub subcase: Subcase,
    /// `x2'` within tolerance of some `u_k`.
    pub boundary_marker: bool,
    /// The input had b3 orientation and was mirrored by `z -> -z` first.
    pub mirrored: bool,
}

impl StripDiagram {
    pub fn w2(&self) -> Complex64 {
        c(self.x2, self.h1)
    }

    pub fn w2p(&self) -> Complex64 {
        c(self.x2p, self.h)
    }
}

/// The pair in b2 orientation and whether it had to be mirrored.
fn b2_frame(qd: &NormalizedQD) -> Result<(NormalizedQD, bool, ZeroLabel)> {
    match classify(qd).topology {
        TopologicalType::OneCircleTwoStrips { orientation, zero_on_dinf, .. } => {
            let mirrored = orientation == Orientation::B3;
            Ok((if mirrored { qd.mirror() } else { *qd }, mirrored, zero_on_dinf))
        }
        other => Err(Error::NotTwoStrip(format!("type {} has no two-strip diagram", other.name()))),
    }
}

pub fn strip_diagram(qd: &NormalizedQD) -> Result<StripDiagram> {
    let (frame, mirrored, _) = b2_frame(qd)?;
    let (c1, cm1) = leading_coeffs(&frame)?;
    let (w2, w2p) = w_points(c1, cm1);
    let (x2, h1, x2p, h) = (w2.re, w2.im, w2p.re, w2p.im);
    if h1 <= SUBCASE_TOL {
        return Err(Error::NotTwoStrip(format!("h1 = {h1:.3e}")));
    }
    let u1 = (x2 - 1.0) * h / h1;
    let u3 = x2 * h / h1;
    let u = [u1, u1 + 1.0, u3, u3 + 1.0];
    let mut tie = None;
    let mut above = 0;
    for (k, &uk) in u.iter().enumerate() {
        let d = x2p - uk;
        if d.abs() <= SUBCASE_TOL * (1.0 + uk.abs()) {
            tie = Some(k);
        } else if d > 0.0 {
            above += 1;
        }
    }
    let idx = tie.map_or(2 * above, |k| 2 * k + 1);
    Ok(StripDiagram {
        x2,
        h1,
        x2p,
        h,
        u1: u[0],
        u2: u[1],
        u3: u[2],
        u4: u[3],
        subcase: Subcase::from_index(idx),
        boundary_marker: tie.is_some(),
        mirrored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubcaseReport {
    pub subcase: Subcase,
    pub boundary_marker: bool,
}

/// The subcase from argument comparisons of `W2`, `W2 - 1`, `W2'`, `W2' - 1`
/// alone: `x2'` lies right of `u1`, `u2`, `u3`, `u4` exactly when
/// `arg W2' < arg(W2 - 1)`, `arg(W2' - 1) < arg(W2 - 1)`, `arg W2' < arg W2`,
/// `arg(W2' - 1) < arg W2` respectively.
pub fn subcase_by_inequalities(qd: &NormalizedQD) -> Result<SubcaseReport> {
    let (frame, _, _) = b2_frame(qd)?;
    let (c1, cm1) = leading_coeffs(&frame)?;
    let (w2, w2p) = w_points(c1, cm1);
    if w2.im <= SUBCASE_TOL {
        return Err(Error::NotTwoStrip(format!("h1 = {:.3e}", w2.im)));
    }
    let pairs = [(w2p, w2 - 1.0), (w2p - 1.0, w2 - 1.0), (w2p, w2), (w2p - 1.0, w2)];
    let mut tie = None;
    let mut right = 0;
    for (k, (x, y)) in pairs.iter().enumerate() {
        let d = y.arg() - x.arg();
        if d.abs() <= SUBCASE_TOL {
            tie = Some(k);
        } else if d > 0.0 {
            right += 1;
        }
    }
    Ok(SubcaseReport {
        subcase: Subcase::from_index(tie.map_or(2 * right, |k| 2 * k + 1)),
        boundary_marker: tie.is_some(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LoopPole {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
    #[serde(rename = "inf")]
    Infinity,
}

impl From<Pole> for LoopPole {
    fn from(p: Pole) -> Self {
        match p {
            Pole::Plus => LoopPole::Plus,
            Pole::Minus => LoopPole::Minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicEntry {
    pub name: String,
    pub endpoints: [ZeroLabel; 2],
    /// Direction of the image segment in the `w`-plane, in `[0, pi)`.
    #[serde(rename = "angle")]
    pub w_angle: f64,
    pub s: f64,
    /// Length of the image in the `w`-plane; the Q-length is `2 pi` times it.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopEntry {
    pub name: String,
    pub base: ZeroLabel,
    pub pole: LoopPole,
    #[serde(rename = "angle")]
    pub w_angle: f64,
    pub s: f64,
    /// Length of the image in the `w`-plane; the Q-length is `2 pi` times it.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicInventory {
    pub case: &'static str,
    pub subcase: Option<Subcase>,
    pub geodesics: Vec<GeodesicEntry>,
    pub loops: Vec<LoopEntry>,
    pub counts: (usize, usize),
}

fn angle_of(v: Complex64) -> f64 {
    let a = v.arg().rem_euclid(PI) + 0.0;
    if PI - a <= S_TOL {
        0.0
    } else {
        a
    }
}

fn s_of(angle: f64) -> f64 {
    let s = (2.0 * angle).rem_euclid(TAU);
    if TAU - s <= S_TOL {
        0.0
    } else {
        s
    }
}

struct Builder {
    geodesics: Vec<GeodesicEntry>,
    loops: Vec<LoopEntry>,
}

impl Builder {
    fn new() -> Self {
        Builder { geodesics: Vec::new(), loops: Vec::new() }
    }

    fn geodesic(&mut self, name: &str, v: Complex64) {
        let a = angle_of(v);
        self.geodesics.push(GeodesicEntry {
            name: name.into(),
            endpoints: [ZeroLabel::P1, ZeroLabel::P2],
            w_angle: a,
            s: s_of(a),
            length: v.norm(),
        });
    }

    fn lp(&mut self, name: &str, base: ZeroLabel, pole: LoopPole, v: Complex64) {
        let a = angle_of(v);
        self.loops.push(LoopEntry { name: name.into(), base, pole, w_angle: a, s: s_of(a), length: v.norm() });
    }

    fn finish(self, case: &'static str, subcase: Option<Subcase>) -> GeodesicInventory {
        let counts = (self.geodesics.len(), self.loops.len());
        GeodesicInventory { case, subcase, geodesics: self.geodesics, loops: self.loops, counts }
    }
}

/// Short geodesics between the zeros and geodesic loops at the zeros, with
/// their rotation angles.
pub fn geodesic_inventory(qd: &NormalizedQD) -> Result<GeodesicInventory> {
    let cls = classify(qd);
    let topo = cls.topology;
    if let TopologicalType::Degenerate { kind } = topo {
        return Err(Error::NotApplicable(format!("degenerate configuration {kind:?}")));
    }
    let (a, b) = half_periods(qd)?;
    let one = c(1.0, 0.0);
    // geodesic vectors (+-1 + a -+ b) / 2
    let g = [0.5 * (one + a - b), 0.5 * (-one + a - b), 0.5 * (one + a + b), 0.5 * (-one + a + b)];
    let mut bl = Builder::new();
    let (p1, p2) = (ZeroLabel::P1, ZeroLabel::P2);
    let re = |l: ZeroLabel| qd.zero(l).re;
    match topo {
        TopologicalType::ThreeCirclesA | TopologicalType::ThreeCirclesB => {
            // the largest circle domain is bounded by both loops and twice the
            // segment, which fixes the segment length
            let (hi, lo) = if re(p1) > re(p2) { (p1, p2) } else { (p2, p1) };
            if topo == TopologicalType::ThreeCirclesA {
                bl.geodesic("gamma_0", -g[3]);
                bl.lp("gamma_1", hi, LoopPole::Plus, a);
                bl.lp("gamma_-1", lo, LoopPole::Minus, b);
            } else if re(p1) > 1.0 {
                bl.geodesic("gamma_0", -g[0]);
                bl.lp("gamma_1", lo, LoopPole::Plus, a);
                bl.lp("gamma_inf", hi, LoopPole::Infinity, one);
            } else {
                bl.geodesic("gamma_0", g[1]);
                bl.lp("gamma_-1", hi, LoopPole::Minus, b);
                bl.lp("gamma_inf", lo, LoopPole::Infinity, one);
            }
        }
        TopologicalType::ThreeCirclesC => {
            // each circle domain is bounded by two of the three arcs
            bl.geodesic("gamma_0", g[3]);
            bl.geodesic("gamma_1", g[0]);
            bl.geodesic("gamma_-1", -g[1]);
        }
        TopologicalType::TwoCircles { second_pole, zero_on_dinf } => {
            // in the frame where the second circle domain surrounds -1
            let (pa, pb) = match second_pole {
                Pole::Minus => (a, b),
                Pole::Plus => (b, a),
            };
            let gg = [0.5 * (one + pa - pb), 0.5 * (one + pa + pb), 0.5 * (-one + pa - pb), 0.5 * (-one + pa + pb)];
            for (name, v) in ["gamma_12", "gamma'_12", "gamma_21", "gamma'_21"].iter().zip(gg) {
                bl.geodesic(name, v);
            }
            let inner = zero_on_dinf.other();
            bl.lp("gamma_inf", zero_on_dinf, LoopPole::Infinity, one);
            bl.lp(if second_pole == Pole::Minus { "gamma_-1" } else { "gamma_1" }, inner, second_pole.into(), pb);
            let len = pb.re;
            if (len - 1.0).abs() > SUBCASE_TOL {
                let base = if len < 1.0 { zero_on_dinf } else { inner };
                let name = if base == zero_on_dinf { "gamma_11" } else { "gamma_22" };
                bl.lp(name, base, second_pole.other().into(), pa);
            }
        }
        TopologicalType::OneCircleOneStripA { p2_pole } => {
            let period = |p: Pole| if p == Pole::Plus { a } else { b };
            let p1_pole = p2_pole.other();
            let (pp, pq) = (period(p1_pole), period(p2_pole));
            bl.geodesic("gamma_12", 0.5 * (one + pp - pq));
            bl.geodesic("gamma'_12", 0.5 * (one - pp + pq));
            bl.geodesic("gamma_21", g[2]);
            bl.geodesic("gamma'_21", g[3]);
            bl.lp("gamma_11", p1, p1_pole.into(), period(p1_pole));
            bl.lp("gamma_22", p2, p2_pole.into(), period(p2_pole));
        }
        TopologicalType::OneCircleOneStripB1 { zero_on_dinf } => {
            let inner = zero_on_dinf.other();
            bl.geodesic("gamma_0", c(0.5 * ((a - b).norm() - 1.0), 0.0));
            bl.geodesic("gamma_12", g[2]);
            bl.geodesic("gamma'_12", g[3]);
            bl.lp("gamma_inf", zero_on_dinf, LoopPole::Infinity, one);
            bl.lp("gamma'_22", inner, LoopPole::Plus, a);
            bl.lp("gamma''_22", inner, LoopPole::Minus, b);
        }
        TopologicalType::OneCircleTwoStrips { zero_on_dinf, .. } => {
            let sd = strip_diagram(qd)?;
            let letter = sd.subcase;
            // the frame's -1 is the original +1 when mirrored
            let (minus, plus, pm, pp) = if sd.mirrored { (LoopPole::Plus, LoopPole::Minus, a, b) } else { (LoopPole::Minus, LoopPole::Plus, b, a) };
            let (w2, w2p) = (sd.w2(), sd.w2p());
            bl.geodesic("gamma_12", w2);
            bl.geodesic("gamma'_12", w2 - 1.0);
            if letter != Subcase::F {
                bl.geodesic("gamma_21", w2p);
            }
            if letter != Subcase::D {
                bl.geodesic("gamma'_21", w2p - 1.0);
            }
            let inner = zero_on_dinf.other();
            bl.lp("gamma_inf", zero_on_dinf, LoopPole::Infinity, one);
            bl.lp("gamma_22", inner, minus, pm);
            match letter {
                Subcase::A | Subcase::I => bl.lp("gamma'_22", inner, plus, pp),
                Subcase::B | Subcase::H => {}
                _ => bl.lp("gamma'_11", zero_on_dinf, plus, pp),
            }
            return Ok(bl.finish(topo.name(), Some(letter)));
        }
        TopologicalType::Degenerate { .. } => unreachable!(),
    }
    Ok(bl.finish(topo.name(), None))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SKind {
    ShortTrajectory,
    TrajectoryLoop(LoopPole),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SValue {
    pub s: f64,
    pub kinds: Vec<SKind>,
    pub multiplicity: usize,
}

/// Distinct rotation angles at which short geodesics or loops become
/// horizontal trajectories, ascending.
pub fn short_s_values(qd: &NormalizedQD) -> Result<Vec<SValue>> {
    let inv = geodesic_inventory(qd)?;
    let items = inv
        .geodesics
        .iter()
        .map(|g| (g.s, SKind::ShortTrajectory))
        .chain(inv.loops.iter().map(|l| (l.s, SKind::TrajectoryLoop(l.pole))));
    let mut out: Vec<SValue> = Vec::new();
    for (s, kind) in items {
        let near = |x: f64| {
            let d = (x - s).rem_euclid(TAU);
            d.min(TAU - d) <= S_TOL
        };
        match out.iter_mut().find(|v| near(v.s)) {
            Some(v) => {
                v.multiplicity += 1;
                if !v.kinds.contains(&kind) {
                    v.kinds.push(kind);
                }
            }
            None => out.push(SValue { s, kinds: vec![kind], multiplicity: 1 }),
        }
    }
    out.sort_by(|x, y| x.s.total_cmp(&y.s));
    Ok(out)
}

/// SVG of the `w`-plane picture: the strips `0 < Im w < h1` and
/// `h1 < Im w < h`, the slit from `W2`, the marked points and the four
/// geodesic segments from `0` and `1`.
pub fn diagram_svg(sd: &StripDiagram) -> String {
    let xs = [0.0, 1.0, sd.x2, sd.x2p, sd.u1, sd.u2, sd.u3, sd.u4];
    let xmin = xs.iter().cloned().fold(f64::INFINITY, f64::min) - 0.5;
    let xmax = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.5;
    let (ymin, ymax) = (-0.2 * sd.h, 1.2 * sd.h);
    let width = 800.0;
    let scale = width / (xmax - xmin);
    let height = ((ymax - ymin) * scale).max(200.0);
    let vscale = height / (ymax - ymin);
    let px = |x: f64| (x - xmin) * scale;
    let py = |y: f64| height - (y - ymin) * vscale;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt_f64(width),
        fmt_f64(height),
        fmt_f64(width),
        fmt_f64(height)
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="{}" width="{}" height="{}" fill="#eef4fb"/>"##,
        fmt_f64(py(sd.h1)),
        fmt_f64(width),
        fmt_f64(py(0.0) - py(sd.h1))
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="{}" width="{}" height="{}" fill="#f6efe4"/>"##,
        fmt_f64(py(sd.h)),
        fmt_f64(width),
        fmt_f64(py(sd.h1) - py(sd.h))
    );
    for (y, color) in [(0.0, "#1f5fa8"), (sd.h, "#a8601f")] {
        let _ = writeln!(
            s,
            r#"<line x1="0" y1="{0}" x2="{1}" y2="{0}" stroke="{2}" stroke-width="1.5"/>"#,
            fmt_f64(py(y)),
            fmt_f64(width),
            color
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#444" stroke-width="2"/>"##,
        fmt_f64(px(sd.x2)),
        fmt_f64(py(sd.h1)),
        fmt_f64(width)
    );
    let segs = [(0.0, 0.0, sd.x2, sd.h1), (1.0, 0.0, sd.x2, sd.h1), (0.0, 0.0, sd.x2p, sd.h), (1.0, 0.0, sd.x2p, sd.h)];
    for (x0, y0, x1, y1) in segs {
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#2a8a3a" stroke-width="1" stroke-dasharray="4 3"/>"##,
            fmt_f64(px(x0)),
            fmt_f64(py(y0)),
            fmt_f64(px(x1)),
            fmt_f64(py(y1))
        );
    }
    let marks = [
        ("0", 0.0, 0.0),
        ("1", 1.0, 0.0),
        ("W2", sd.x2, sd.h1),
        ("W2'", sd.x2p, sd.h),
        ("u1", sd.u1, sd.h),
        ("u2", sd.u2, sd.h),
        ("u3", sd.u3, sd.h),
        ("u4", sd.u4, sd.h),
    ];
    for (label, x, y) in marks {
        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="3" fill="black"/>"#, fmt_f64(px(x)), fmt_f64(py(y)));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12">{}</text>"#,
            fmt_f64(px(x) + 4.0),
            fmt_f64(py(y) - 4.0),
            label
        );
    }
    let _ = writeln!(s, r#"<text x="8" y="16" font-size="14">subcase {}</text>"#, sd.subcase);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anchor() -> NormalizedQD {
        NormalizedQD::new(c(0.0, 2.0), c(-0.5, 0.5))
    }

    #[test]
    fn anchor_diagram() {
        let sd = strip_diagram(&anchor()).unwrap();
        assert!((sd.x2 + 0.0389).abs() < 1e-3, "{sd:?}");
        assert!((sd.h1 - 0.0530).abs() < 1e-3);
        assert!((sd.x2p - 0.3287).abs() < 1e-3);
        assert!((sd.h - 0.5630).abs() < 1e-3);
        assert!((sd.u1 + 11.04).abs() < 1e-2 && (sd.u3 + 0.413).abs() < 1e-3);
        assert_eq!(sd.subcase, Subcase::G);
        assert_eq!(subcase_by_inequalities(&anchor()).unwrap().subcase, Subcase::G);
        assert_eq!(f_p2_closed_form(&anchor()).unwrap(), sd.w2());
    }

    #[test]
    fn anchor_inventory() {
        let inv = geodesic_inventory(&anchor()).unwrap();
        assert_eq!(inv.counts, (4, 3));
        let mut s: Vec<f64> = inv.loops.iter().map(|l| l.s).collect();
        s.sort_by(f64::total_cmp);
        assert!(s[0].abs() < 1e-12);
        assert!((s[1] - c(-0.5, 1.5).arg()).abs() < 1e-12);
        assert!((s[2] - c(0.5, -3.5).arg().rem_euclid(TAU)).abs() < 1e-12);
        for g in &inv.geodesics {
            assert!((g.s - (2.0 * g.w_angle).rem_euclid(TAU)).abs() < 1e-12);
        }
    }

    #[test]
    fn real_symmetric_b2() {
        let sd = strip_diagram(&NormalizedQD::new(c(3.0, 0.0), c(-2.0, 0.0))).unwrap();
        assert!((sd.x2 - 0.5).abs() < 1e-14 && (sd.x2p - 0.5).abs() < 1e-14);
        assert!((sd.u2 - sd.u1 - 1.0).abs() < 1e-12 && (sd.u4 - sd.u3 - 1.0).abs() < 1e-12);
        assert_eq!(sd.subcase, Subcase::E);
    }

    #[test]
    fn three_circles_all_at_zero() {
        let qd = NormalizedQD::new(c(0.5, 0.0), c(-0.5, 0.0));
        let inv = geodesic_inventory(&qd).unwrap();
        assert_eq!(inv.counts, (1, 2));
        let sv = short_s_values(&qd).unwrap();
        assert_eq!(sv.len(), 1);
        assert_eq!(sv[0].s, 0.0);
        assert_eq!(sv[0].multiplicity, 3);
        let poles: Vec<LoopPole> = inv.loops.iter().map(|l| l.pole).collect();
        assert_eq!(poles, vec![LoopPole::Plus, LoopPole::Minus]);
        assert_eq!(inv.loops[0].base, ZeroLabel::P1);
    }

    #[test]
    fn phi_derivative_and_normalization() {
        let qd = anchor();
        let mut br = PhiBranch::new(&qd).unwrap();
        for z in [c(0.3, 0.2), c(-2.0, 1.0), c(1.5, -0.7)] {
            br.eval(z).unwrap();
        }
        // Phi(p1) = (2 + sqrt(Cm1) - sqrt(C1)) log(p1 - p2) / (4 pi i) modulo periods
        let mut br = PhiBranch::new(&qd).unwrap();
        let v = br.eval(qd.p1).unwrap();
        let want = (2.0 + br.sqrt_cm1() - br.sqrt_c1()) * (qd.p1 - qd.p2).ln() / c(0.0, 4.0 * PI);
        assert!(lattice_deviation(&qd, v - want, c(0.0, 0.0)).unwrap() < 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature_and_phi() {
        let qd = anchor();
        let w = f_p2_closed_form(&qd).unwrap();
        let f = f_numeric(&qd, qd.p1, qd.p2, &[]).unwrap();
        assert!(lattice_deviation(&qd, f.value, w).unwrap() < 1e-6, "{f:?} vs {w}");
        let ph = phi_along(&qd, &[qd.p1, qd.p2]).unwrap();
        assert!(lattice_deviation(&qd, ph[1] - ph[0], w).unwrap() < 1e-6);
        assert!((ph[1] - ph[0] - f.value).norm() < 1e-8);
    }

    #[test]
    fn contour_around_plus_one() {
        let qd = anchor();
        let pts: Vec<Complex64> = (1..=64).map(|k| 1.0 + Complex64::from_polar(0.3, TAU * k as f64 / 64.0)).collect();
        let start = c(1.3, 0.0);
        let f = f_numeric(&qd, start, start, &pts[..63]).unwrap();
        let a = 0.5 * sqrt_upper((qd.p1 - 1.0) * (qd.p2 - 1.0));
        assert!((f.value - a).norm().min((f.value + a).norm()) < 1e-9, "{f:?} {a}");
        assert_eq!(f_numeric(&qd, start, start, &[]).unwrap().value, c(0.0, 0.0));
    }

    #[test]
    fn path_too_close_rejected() {
        let qd = anchor();
        let r = f_numeric(&qd, c(0.5, 0.0), c(1.5, 0.0), &[]);
        assert!(matches!(r, Err(Error::PathTooClose { .. })));
    }

    #[test]
    fn conjugation_reverses_letter() {
        let qd = anchor();
        let l = strip_diagram(&qd).unwrap().subcase;
        assert_eq!(strip_diagram(&qd.conj()).unwrap().subcase, l.conjugated());
        assert_eq!(strip_diagram(&qd.mirror()).unwrap().subcase, l);
    }
}
