//! Numerical trajectories of rational quadratic differentials `Q(z) dz^2`.
//!
//! A trajectory is integrated as `dz/dt = 1 / sqrt(Q(z))` with the square
//! root continued along the path, so `t` is arc length in the metric
//! `|Q|^{1/2} |dz|` and `Q dz^2 = dt^2 > 0`. Critical trajectories leave each
//! zero of order `m` along the `m + 2` directions of the local model
//! `c (z - p)^m dz^2`.

use crate::error::{Error, Result};
use crate::output::fmt_f64;
use crate::poly::{cluster_roots, ComplexPolynomial, RootCountingMeasure};
use crate::qdclass::{classify, spiral_behavior, NormalizedQD, Pole, Spiral, TopologicalType, ZeroLabel};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalQD {
    pub numerator: ComplexPolynomial,
    pub denominator: ComplexPolynomial,
}

impl RationalQD {
    pub fn new(numerator: ComplexPolynomial, denominator: ComplexPolynomial) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(RationalQD { numerator, denominator })
    }

    /// `-(z - p1)(z - p2) / (z^2 - 1)^2`.
    pub fn from_normalized(qd: &NormalizedQD) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let num = ComplexPolynomial::from_roots(&[qd.p1, qd.p2], -one);
        let den = ComplexPolynomial::from_roots(&[one, one, -one, -one], one);
        RationalQD { numerator: num, denominator: den }
    }

    /// The differential multiplied by `e^{-is}`.
    pub fn rotated(&self, s: f64) -> Self {
        RationalQD {
            numerator: self.numerator.scale(Complex64::from_polar(1.0, -s)),
            denominator: self.denominator.clone(),
        }
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        RationalQD { numerator: self.numerator.scale(k), denominator: self.denominator.clone() }
    }

    pub fn q(&self, z: Complex64) -> Complex64 {
        self.numerator.evaluate(z) / self.denominator.evaluate(z)
    }

    /// Zeros and finite poles with multiplicities.
    pub fn critical_points(&self) -> Result<Vec<Vertex>> {
        let mut out = Vec::new();
        for (poly, is_zero) in [(&self.numerator, true), (&self.denominator, false)] {
            if poly.degree().unwrap_or(0) == 0 {
                continue;
            }
            for (z, order) in cluster_roots(poly.find_roots(1e-10)?.roots(), 1e-7) {
                let kind = if is_zero { VertexKind::Zero { order } } else { VertexKind::Pole { order } };
                out.push(Vertex { id: out.len(), z, kind });
            }
        }
        Ok(out)
    }

    /// Order of `Q` at infinity as a pole (negative for a zero there).
    pub fn pole_order_at_infinity(&self) -> isize {
        let dn = self.numerator.degree().map_or(0, |d| d as isize);
        let dd = self.denominator.degree().unwrap_or(0) as isize;
        dn - dd + 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VertexKind {
    Zero { order: usize },
    Pole { order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vertex {
    pub id: usize,
    pub z: Complex64,
    pub kind: VertexKind,
}

impl Vertex {
    pub fn is_zero(&self) -> bool {
        matches!(self.kind, VertexKind::Zero { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ArcEnd {
    /// Reached a zero or a simple pole.
    CriticalPoint { vertex: usize },
    /// Spiralled into a pole; `direction` is `ccw` or `cw`.
    PoleSpiral { vertex: usize, direction: Spiral },
    /// Entered the capture disc of a pole without measurable winding.
    PoleRadial { vertex: usize },
    Infinity,
    Truncated { q_length: f64 },
}

impl ArcEnd {
    /// Vertex id of the endpoint, if it is a finite critical point.
    pub fn vertex(&self) -> Option<usize> {
        match *self {
            ArcEnd::CriticalPoint { vertex } | ArcEnd::PoleSpiral { vertex, .. } | ArcEnd::PoleRadial { vertex } => {
                Some(vertex)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryArc {
    pub id: usize,
    pub start: usize,
    pub departure: usize,
    pub end: ArcEnd,
    pub q_length: f64,
    /// Accumulated `|Im int sqrt(Q) dz|` over the chords of the polyline.
    pub im_drift: f64,
    #[serde(skip)]
    pub points: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub q_length: f64,
    pub arc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalGraph {
    pub vertices: Vec<Vertex>,
    pub arcs: Vec<TrajectoryArc>,
    /// Finite critical trajectories between finite critical points, one per
    /// trajectory (each is traced from both ends).
    pub edges: Vec<Edge>,
}

impl CriticalGraph {
    /// Arc endpoints of the rays departing from `vertex`, in departure order.
    pub fn ray_ends(&self, vertex: usize) -> Vec<ArcEnd> {
        self.arcs.iter().filter(|a| a.start == vertex).map(|a| a.end).collect()
    }

    pub fn vertex_near(&self, z: Complex64) -> Option<usize> {
        self.vertices
            .iter()
            .min_by(|a, b| (a.z - z).norm().total_cmp(&(b.z - z).norm()))
            .filter(|v| (v.z - z).norm() < 1e-6 * (1.0 + z.norm()))
            .map(|v| v.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceConfig {
    /// Seed distance from the zero, relative to the local scale.
    pub seed_offset: f64,
    pub capture_radius: f64,
    /// Q-length budget per arc.
    pub budget: f64,
    pub escape_radius: f64,
    /// Local error tolerance relative to the distance to the nearest critical
    /// point.
    pub rtol: f64,
    pub max_steps: usize,
    /// Winding with shrinking radius that counts as spiral capture.
    pub spiral_winding: f64,
    /// Winding per unit of `log r` below which a pole approach is radial.
    pub radial_rate: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            seed_offset: 1e-6,
            capture_radius: 1e-4,
            budget: 50.0,
            escape_radius: 1e4,
            rtol: 1e-10,
            max_steps: 400_000,
            spiral_winding: 2.0 * TAU,
            radial_rate: 1e-3,
        }
    }
}

/// Unit direction of the horizontal trajectory through `z`, oriented to agree
/// with `prev_dir`.
pub fn direction_field(qd: &RationalQD, z: Complex64, prev_dir: Complex64) -> Result<Complex64> {
    let q = qd.q(z);
    if !q.is_finite() || q.norm() < 1e-300 {
        return Err(Error::CriticalPoint(z));
    }
    let d = Complex64::from_polar(1.0, -0.5 * q.arg());
    Ok(if (d * prev_dir.conj()).re < 0.0 { -d } else { d })
}

/// `sqrt(Q(z))` on the sheet closest to `reference`.
fn sqrt_near(qd: &RationalQD, z: Complex64, reference: Complex64) -> Option<Complex64> {
    let q = qd.q(z);
    if !q.is_finite() || q.norm() == 0.0 {
        return None;
    }
    let s = q.sqrt();
    Some(if (s * reference.conj()).re < 0.0 { -s } else { s })
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
];

/// `int sqrt(Q) dz` over the chord `[a, b]`. The integral is path
/// independent, so it equals the integral along the trajectory segment
/// joining `a` and `b`; there `sqrt(Q) dz` has constant phase and the modulus
/// is the segment's Q-length. (Integrating `|Q|^{1/2} |dz|` on the chord
/// itself would overestimate it at second order in the turning angle.)
fn chord_integral(qd: &RationalQD, a: Complex64, b: Complex64, reference: Complex64) -> Complex64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut f = Complex64::new(0.0, 0.0);
    for (x, w) in GAUSS5 {
        let s = sqrt_near(qd, mid + half * x, reference).unwrap_or_default();
        f += w * s * half;
    }
    f
}

// Dormand-Prince 5(4)
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// One Dormand-Prince step of `dz/dt = 1/s(z)`; `None` if a stage hits a
/// critical point.
fn dp_step(qd: &RationalQD, z: Complex64, s: Complex64, h: f64) -> Option<(Complex64, Complex64, f64)> {
    let mut k = [Complex64::new(0.0, 0.0); 7];
    k[0] = 1.0 / s;
    for i in 0..6 {
        let mut zi = z;
        for (j, kj) in k.iter().enumerate().take(i + 1) {
            zi += h * A[i][j] * kj;
        }
        k[i + 1] = 1.0 / sqrt_near(qd, zi, s)?;
    }
    let mut znew = z;
    for (j, kj) in k.iter().enumerate().take(6) {
        znew += h * A[5][j] * kj;
    }
    let mut err = Complex64::new(0.0, 0.0);
    for (e, kj) in E.iter().zip(k.iter()) {
        err += h * e * kj;
    }
    let snew = sqrt_near(qd, znew, s)?;
    Some((znew, snew, err.norm()))
}

struct PoleWatch {
    vertex: usize,
    z: Complex64,
    order: usize,
    mark_radius: f64,
    prev_arg: f64,
    prev_dist: f64,
    window: f64,
    total: f64,
    mark: Option<(f64, f64)>,
    /// Winding and distance at the last full turn inside `local_radius`.
    turn_anchor: Option<(f64, f64)>,
    shrinking_turns: u32,
    /// Sign of the last full turn.
    turn_sense: f64,
    /// Winding about every vertex when the current turn started.
    turn_windings: Vec<f64>,
}

struct Tracer<'a> {
    qd: &'a RationalQD,
    cfg: TraceConfig,
    vertices: Vec<Vertex>,
    /// Distance from each vertex to the nearest other one.
    sep: Vec<f64>,
}

/// Raw outcome of one integration.
struct Run {
    points: Vec<Complex64>,
    end: ArcEnd,
    q_length: f64,
    im_drift: f64,
}

impl<'a> Tracer<'a> {
    fn new(qd: &'a RationalQD, cfg: TraceConfig) -> Result<Self> {
        let vertices = qd.critical_points()?;
        let sep = vertices
            .iter()
            .map(|v| {
                vertices
                    .iter()
                    .filter(|w| w.id != v.id)
                    .map(|w| (w.z - v.z).norm())
                    .fold(1.0f64, f64::min)
            })
            .collect();
        Ok(Tracer { qd, cfg, vertices, sep })
    }

    fn capture_radius(&self, v: usize) -> f64 {
        self.cfg.capture_radius.min(0.05 * self.sep[v])
    }

    fn nearest(&self, z: Complex64) -> f64 {
        self.vertices.iter().map(|v| (v.z - z).norm()).fold(1.0 + z.norm(), f64::min)
    }

    /// Integrate from `z0` with initial root `s0`. `origin` is the vertex the
    /// arc departs from, if any; it is only captured after the arc has left
    /// its neighbourhood. With `closed_probe` set, returns early when the
    /// path comes back to `z0`.
    fn run(&self, z0: Complex64, s0: Complex64, origin: Option<usize>, closed_probe: bool) -> (Run, Option<f64>) {
        let cfg = &self.cfg;
        let mut z = z0;
        let mut s = s0;
        let mut points = vec![z0];
        let mut t = 0.0;
        let mut im_drift = 0.0;
        let mut armed = origin.is_none();
        let mut left_start = false;
        let mut watches: Vec<PoleWatch> = self
            .vertices
            .iter()
            .filter(|v| matches!(v.kind, VertexKind::Pole { order } if order >= 2))
            .map(|v| {
                let d = (z0 - v.z).norm();
                let capture = self.capture_radius(v.id);
                PoleWatch {
                    vertex: v.id,
                    z: v.z,
                    order: match v.kind {
                        VertexKind::Pole { order } => order,
                        _ => 0,
                    },
                    mark_radius: (100.0 * capture).min(0.1 * self.sep[v.id]),
                    prev_arg: (z0 - v.z).arg(),
                    prev_dist: d,
                    window: 0.0,
                    total: 0.0,
                    mark: None,
                    turn_anchor: None,
                    shrinking_turns: 0,
                    turn_sense: 0.0,
                    turn_windings: Vec::new(),
                }
            })
            .collect();
        let mut windings = vec![0.0; self.vertices.len()];
        let mut h = 0.1 * self.nearest(z) * s.norm();
        let dir0 = 1.0 / s0;
        let finish = |points: Vec<Complex64>, end: ArcEnd, t: f64, im: f64| Run { points, end, q_length: t, im_drift: im };

        for _ in 0..cfg.max_steps {
            let d = self.nearest(z);
            let hmax = 0.3 * d * s.norm();
            if h > hmax {
                h = hmax;
            }
            if !(h > 0.0) || h < 1e-14 * (1.0 + t) {
                return (finish(points, ArcEnd::Truncated { q_length: t }, t, im_drift), None);
            }
            let Some((zn, sn, err)) = dp_step(self.qd, z, s, h) else {
                h *= 0.25;
                continue;
            };
            let tol = cfg.rtol * d.max(1e-12);
            if err > tol {
                h *= (0.9 * (tol / err).powf(0.2)).max(0.1);
                continue;
            }
            let fi = chord_integral(self.qd, z, zn, s);
            im_drift += fi.im.abs();
            t += fi.norm();
            let zprev = z;
            z = zn;
            s = sn;
            points.push(z);
            h *= if err > 0.0 { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) } else { 5.0 };

            if z.norm() > cfg.escape_radius {
                return (finish(points, ArcEnd::Infinity, t, im_drift), None);
            }
            if let Some(o) = origin {
                if !armed && (z - self.vertices[o].z).norm() > 3.0 * self.capture_radius(o) {
                    armed = true;
                }
            }
            if closed_probe {
                // only chords that start outside the neighbourhood of z0 count
                if left_start {
                    let miss = seg_dist(z0, zprev, z);
                    if miss < cfg.capture_radius && ((z - zprev) * dir0.conj()).re > 0.0 {
                        return (finish(points, ArcEnd::Truncated { q_length: t }, t, im_drift), Some(miss));
                    }
                }
                if (z - z0).norm() > 100.0 * cfg.capture_radius {
                    left_start = true;
                }
            }
            for v in &self.vertices {
                if !armed && Some(v.id) == origin {
                    continue;
                }
                let r = (z - v.z).norm();
                let cap = self.capture_radius(v.id);
                if r < cap {
                    let end = match v.kind {
                        VertexKind::Zero { .. } | VertexKind::Pole { order: 1 } => ArcEnd::CriticalPoint { vertex: v.id },
                        VertexKind::Pole { .. } => {
                            let w = watches.iter().find(|w| w.vertex == v.id).expect("watched pole");
                            self.pole_end(w, r)
                        }
                    };
                    return (finish(points, end, t, im_drift), None);
                }
            }
            for (wv, v) in windings.iter_mut().zip(&self.vertices) {
                let mut da = (z - v.z).arg() - (zprev - v.z).arg();
                if da > PI {
                    da -= TAU;
                } else if da < -PI {
                    da += TAU;
                }
                *wv += da;
            }
            for w in watches.iter_mut() {
                let dz = z - w.z;
                let r = dz.norm();
                let a = dz.arg();
                let mut da = a - w.prev_arg;
                if da > PI {
                    da -= TAU;
                } else if da < -PI {
                    da += TAU;
                }
                let prev_total = w.total;
                w.total += da;
                w.window = if r < w.prev_dist { w.window + da } else { 0.0 };
                // slow spirals: compare distances one full turn apart, at the
                // same angle, so oscillation within a turn does not matter; a
                // turn that also winds around another critical point is not local
                match w.turn_anchor {
                    None => {
                        w.turn_anchor = Some((w.total, r));
                        w.turn_windings = windings.clone();
                    }
                    Some((anchor, dist)) if (w.total - anchor).abs() >= TAU => {
                        let local = windings
                            .iter()
                            .zip(&w.turn_windings)
                            .enumerate()
                            .all(|(i, (now, then))| i == w.vertex || (now - then).abs() < PI);
                        w.turn_sense = (w.total - anchor).signum();
                        let target = anchor + TAU * w.turn_sense;
                        let f = if da != 0.0 { ((target - prev_total) / da).clamp(0.0, 1.0) } else { 1.0 };
                        let rc = w.prev_dist + f * (r - w.prev_dist);
                        w.shrinking_turns = if local && rc < dist * (1.0 - 1e-6) { w.shrinking_turns + 1 } else { 0 };
                        w.turn_anchor = Some((target, rc));
                        w.turn_windings = windings.clone();
                    }
                    _ => {}
                }
                w.prev_arg = a;
                w.prev_dist = r;
                if w.order == 2 && TAU * w.shrinking_turns as f64 > cfg.spiral_winding {
                    let direction = if w.turn_sense > 0.0 { Spiral::Ccw } else { Spiral::Cw };
                    return (finish(points, ArcEnd::PoleSpiral { vertex: w.vertex, direction }, t, im_drift), None);
                }
                if w.mark.is_none() && r < w.mark_radius {
                    w.mark = Some((r.ln(), w.total));
                }
                if w.order == 2 && w.window.abs() > cfg.spiral_winding {
                    let direction = if w.window > 0.0 { Spiral::Ccw } else { Spiral::Cw };
                    return (finish(points, ArcEnd::PoleSpiral { vertex: w.vertex, direction }, t, im_drift), None);
                }
            }
            if t > cfg.budget {
                return (finish(points, ArcEnd::Truncated { q_length: t }, t, im_drift), None);
            }
        }
        (finish(points, ArcEnd::Truncated { q_length: t }, t, im_drift), None)
    }

    fn pole_end(&self, w: &PoleWatch, r: f64) -> ArcEnd {
        let rate = match w.mark {
            Some((lr, wt)) if (r.ln() - lr).abs() > 0.5 => (w.total - wt) / (lr - r.ln()),
            _ => 0.0,
        };
        if rate.abs() <= self.cfg.radial_rate {
            ArcEnd::PoleRadial { vertex: w.vertex }
        } else {
            ArcEnd::PoleSpiral {
                vertex: w.vertex,
                direction: if rate > 0.0 { Spiral::Ccw } else { Spiral::Cw },
            }
        }
    }

    /// Seeds of the critical rays from zero `v`: `(point, initial root)`.
    fn seeds(&self, v: &Vertex) -> Vec<(Complex64, Complex64)> {
        let m = match v.kind {
            VertexKind::Zero { order } => order as isize,
            VertexKind::Pole { order: 1 } => -1,
            _ => return Vec::new(),
        };
        // local model Q ~ c (z - p)^m
        let c = self.local_coeff(v, m);
        let k = (m + 2) as usize;
        let eps = self.cfg.seed_offset * self.sep[v.id];
        (0..k)
            .filter_map(|j| {
                let theta = (TAU * j as f64 - c.arg()) / k as f64;
                let e = Complex64::from_polar(1.0, theta);
                let z = v.z + eps * e;
                let s = self.qd.q(z).sqrt();
                if !s.is_finite() || s.norm() == 0.0 {
                    return None;
                }
                let s = if (e.conj() / s).re < 0.0 { -s } else { s };
                Some((z, s))
            })
            .collect()
    }

    fn local_coeff(&self, v: &Vertex, m: isize) -> Complex64 {
        let (num, den) = (&self.qd.numerator, &self.qd.denominator);
        let mut c = Complex64::new(1.0, 0.0);
        let roots_num = num.find_roots(1e-10).map(|mu| mu.roots().to_vec()).unwrap_or_default();
        let roots_den = den.find_roots(1e-10).map(|mu| mu.roots().to_vec()).unwrap_or_default();
        let close = |r: &Complex64| (*r - v.z).norm() <= 1e-7 * (1.0 + v.z.norm());
        for r in roots_num.iter().filter(|r| !close(r)) {
            c *= v.z - r;
        }
        for r in roots_den.iter().filter(|r| !close(r)) {
            c /= v.z - r;
        }
        let _ = m;
        c * num.leading() / den.leading()
    }
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

fn polyline_dist(p: Complex64, pts: &[Complex64]) -> f64 {
    if pts.len() == 1 {
        return (p - pts[0]).norm();
    }
    pts.windows(2).map(|w| seg_dist(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
}

fn midpoint(pts: &[Complex64]) -> Complex64 {
    let total: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let l = (w[1] - w[0]).norm();
        if acc + l >= 0.5 * total {
            return w[0] + (w[1] - w[0]) * ((0.5 * total - acc) / l.max(f64::MIN_POSITIVE));
        }
        acc += l;
    }
    pts[pts.len() / 2]
}

/// Critical graph with the default configuration and the given Q-length
/// budget per arc.
pub fn trace_critical(qd: &RationalQD, budget: f64) -> Result<CriticalGraph> {
    trace_critical_with(qd, &TraceConfig { budget, ..TraceConfig::default() })
}

pub fn trace_critical_with(qd: &RationalQD, cfg: &TraceConfig) -> Result<CriticalGraph> {
    let tr = Tracer::new(qd, *cfg)?;
    let mut arcs = Vec::new();
    for v in &tr.vertices {
        for (j, (z0, s0)) in tr.seeds(v).into_iter().enumerate() {
            let (run, _) = tr.run(z0, s0, Some(v.id), false);
            let mut points = run.points;
            points.insert(0, v.z);
            if let Some(e) = run.end.vertex() {
                points.push(tr.vertices[e].z);
            }
            arcs.push(TrajectoryArc {
                id: arcs.len(),
                start: v.id,
                departure: j,
                end: run.end,
                q_length: run.q_length,
                im_drift: run.im_drift,
                points,
            });
        }
    }
    let edges = dedup_edges(&arcs);
    Ok(CriticalGraph { vertices: tr.vertices, arcs, edges })
}

fn dedup_edges(arcs: &[TrajectoryArc]) -> Vec<Edge> {
    let mut edges: Vec<Edge> = Vec::new();
    for a in arcs {
        let ArcEnd::CriticalPoint { vertex: to } = a.end else { continue };
        let scale = a.points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let mid = midpoint(&a.points);
        let dup = edges.iter().any(|e| {
            let b = &arcs[e.arc];
            let same_ends = (e.from == a.start && e.to == to) || (e.from == to && e.to == a.start);
            same_ends
                && (b.q_length - a.q_length).abs() <= 1e-3 * (1.0 + a.q_length)
                && polyline_dist(mid, &b.points) <= 1e-3 * scale
        });
        if !dup {
            edges.push(Edge { from: a.start, to, q_length: a.q_length, arc: a.id });
        }
    }
    edges
}

pub fn q_length(arc: &TrajectoryArc) -> f64 {
    arc.q_length
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedCandidate {
    pub seed: Complex64,
    pub closed: bool,
    /// Q-length travelled before returning (or before giving up).
    pub q_length: f64,
    pub miss_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedProbeReport {
    /// Always "probe": a returning orbit is a candidate, not a proof.
    pub verdict: &'static str,
    pub candidates: Vec<ClosedCandidate>,
    pub any_closed: bool,
}

/// Integrates from each non-critical seed and reports orbits that come back
/// to their starting point heading the same way.
pub fn closed_trajectory_probe(qd: &RationalQD, seeds: &[Complex64], budget: f64) -> Result<ClosedProbeReport> {
    let cfg = TraceConfig { budget, ..TraceConfig::default() };
    let tr = Tracer::new(qd, cfg)?;
    let mut candidates = Vec::new();
    for &z0 in seeds {
        let q = qd.q(z0);
        if !q.is_finite() || q.norm() == 0.0 {
            return Err(Error::CriticalPoint(z0));
        }
        let (run, miss) = tr.run(z0, q.sqrt(), None, true);
        candidates.push(ClosedCandidate { seed: z0, closed: miss.is_some(), q_length: run.q_length, miss_distance: miss });
    }
    let any_closed = candidates.iter().any(|c| c.closed);
    Ok(ClosedProbeReport { verdict: "probe", candidates, any_closed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceStats {
    pub n: usize,
    pub median: f64,
    pub p90: f64,
    pub p95: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx]
}

/// Distance from each root to the nearest traced critical trajectory.
pub fn support_distance(mu: &RootCountingMeasure, graph: &CriticalGraph) -> Result<DistanceStats> {
    let lines: Vec<&[Complex64]> = graph.arcs.iter().filter(|a| a.points.len() >= 2).map(|a| a.points.as_slice()).collect();
    if lines.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut d: Vec<f64> = mu
        .roots()
        .iter()
        .map(|&r| lines.iter().map(|l| polyline_dist(r, l)).fold(f64::INFINITY, f64::min))
        .collect();
    if d.is_empty() {
        return Err(Error::EmptyGraph);
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(DistanceStats {
        n: d.len(),
        median: quantile(&d, 0.5),
        p90: quantile(&d, 0.9),
        p95: quantile(&d, 0.95),
        max: d[d.len() - 1],
    })
}

/// Where a critical ray from a zero of a normalized differential ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RayEnd {
    #[serde(rename = "p1")]
    P1,
    #[serde(rename = "p2")]
    P2,
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
    #[serde(rename = "unresolved")]
    Unresolved,
}

impl From<ZeroLabel> for RayEnd {
    fn from(l: ZeroLabel) -> Self {
        match l {
            ZeroLabel::P1 => RayEnd::P1,
            ZeroLabel::P2 => RayEnd::P2,
        }
    }
}

impl From<Pole> for RayEnd {
    fn from(p: Pole) -> Self {
        match p {
            Pole::Plus => RayEnd::Plus,
            Pole::Minus => RayEnd::Minus,
        }
    }
}

fn zero_index(l: ZeroLabel) -> usize {
    match l {
        ZeroLabel::P1 => 0,
        ZeroLabel::P2 => 1,
    }
}

/// Sorted ends of the three rays leaving `p1` and `p2` that the domain
/// configuration predicts, or `None` for degenerate input.
pub fn predicted_ray_ends(t: &TopologicalType) -> Option<[Vec<RayEnd>; 2]> {
    use TopologicalType::*;
    use ZeroLabel::{P1, P2};
    let mut out: [Vec<RayEnd>; 2] = [Vec::new(), Vec::new()];
    let edge = |out: &mut [Vec<RayEnd>; 2], a: ZeroLabel, b: ZeroLabel| {
        out[zero_index(a)].push(b.into());
        out[zero_index(b)].push(a.into());
    };
    let ray = |out: &mut [Vec<RayEnd>; 2], a: ZeroLabel, p: Pole| out[zero_index(a)].push(p.into());
    match *t {
        ThreeCirclesA | ThreeCirclesB => {
            edge(&mut out, P1, P2);
            edge(&mut out, P1, P1);
            edge(&mut out, P2, P2);
        }
        ThreeCirclesC => {
            for _ in 0..3 {
                edge(&mut out, P1, P2);
            }
        }
        TwoCircles { second_pole, zero_on_dinf: z } => {
            edge(&mut out, z, z);
            edge(&mut out, z.other(), z.other());
            ray(&mut out, z, second_pole.other());
            ray(&mut out, z.other(), second_pole.other());
        }
        OneCircleOneStripA { p2_pole } => {
            edge(&mut out, P1, P2);
            edge(&mut out, P1, P2);
            ray(&mut out, P2, p2_pole);
            ray(&mut out, P1, p2_pole.other());
        }
        OneCircleOneStripB1 { zero_on_dinf: z } => {
            edge(&mut out, z, z);
            edge(&mut out, z, z.other());
            ray(&mut out, z.other(), Pole::Plus);
            ray(&mut out, z.other(), Pole::Minus);
        }
        OneCircleTwoStrips { zero_on_dinf: z, single_trajectory_pole_target: target, .. } => {
            let strip_pole = target.pole.other();
            edge(&mut out, z, z);
            ray(&mut out, z, strip_pole);
            ray(&mut out, target.zero, strip_pole);
            ray(&mut out, target.zero, strip_pole);
            ray(&mut out, target.zero, target.pole);
        }
        Degenerate { .. } => return None,
    }
    out[0].sort();
    out[1].sort();
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Concordance {
    pub predicted: [Vec<RayEnd>; 2],
    pub traced: [Vec<RayEnd>; 2],
    /// Traced ray ends equal the predicted ones.
    pub pattern_match: bool,
    /// Every ray ending at a pole ends the way the local behaviour there says:
    /// spiral capture (with the right sense) exactly at spiral poles.
    pub spiral_match: bool,
    pub mismatches: Vec<String>,
}

impl Concordance {
    pub fn agrees(&self) -> bool {
        self.pattern_match && self.spiral_match
    }
}

/// Compares the critical graph of the unrotated differential of `qd` with
/// the configuration `classify` predicts and with the pole behaviour of
/// `spiral_behavior`.
pub fn topology_concordance(qd: &NormalizedQD, graph: &CriticalGraph) -> Result<Concordance> {
    let cls = classify(qd);
    let predicted = predicted_ray_ends(&cls.topology)
        .ok_or_else(|| Error::NotApplicable("degenerate configuration has no generic ray pattern".into()))?;
    let (sp_plus, sp_minus) = spiral_behavior(qd)?;
    let find = |z: Complex64| graph.vertex_near(z).ok_or(Error::CriticalPoint(z));
    let ids = [find(qd.p1)?, find(qd.p2)?];
    let (plus, minus) = (find(Complex64::new(1.0, 0.0))?, find(Complex64::new(-1.0, 0.0))?);
    let label = |v: usize| {
        if v == ids[0] {
            RayEnd::P1
        } else if v == ids[1] {
            RayEnd::P2
        } else if v == plus {
            RayEnd::Plus
        } else if v == minus {
            RayEnd::Minus
        } else {
            RayEnd::Unresolved
        }
    };
    let mut traced: [Vec<RayEnd>; 2] = [Vec::new(), Vec::new()];
    let mut mismatches = Vec::new();
    let mut spiral_match = true;
    for (k, &id) in ids.iter().enumerate() {
        for a in graph.arcs.iter().filter(|a| a.start == id) {
            let end = a.end.vertex().map(label).unwrap_or(RayEnd::Unresolved);
            traced[k].push(end);
            let expected = match end {
                RayEnd::Plus => sp_plus,
                RayEnd::Minus => sp_minus,
                _ => continue,
            };
            let ok = match (a.end, expected) {
                (ArcEnd::PoleSpiral { direction, .. }, e) => direction == e,
                (ArcEnd::PoleRadial { .. }, Spiral::Radial) => true,
                _ => false,
            };
            if !ok {
                spiral_match = false;
                mismatches.push(format!("arc {} ends {:?}, local behaviour {:?}", a.id, a.end, expected));
            }
        }
        traced[k].sort();
    }
    let pattern_match = traced == predicted;
    if !pattern_match {
        mismatches.push(format!("ray ends {traced:?}, predicted {predicted:?}"));
    }
    Ok(Concordance { predicted, traced, pattern_match, spiral_match, mismatches })
}

/// Polylines as CSV rows `arc,re,im`.
pub fn graph_csv(graph: &CriticalGraph) -> String {
    let mut s = String::from("arc,re,im\n");
    for a in &graph.arcs {
        for p in &a.points {
            let _ = writeln!(s, "{},{},{}", a.id, fmt_f64(p.re), fmt_f64(p.im));
        }
    }
    s
}

/// SVG drawing of the critical graph: arcs as polylines, zeros as dots,
/// poles as crosses. The view box covers the critical points with margin.
pub fn graph_svg(graph: &CriticalGraph) -> String {
    let extent = graph.vertices.iter().map(|v| v.z.re.abs().max(v.z.im.abs())).fold(1.0, f64::max);
    let r = 1.6 * extent + 0.5;
    let size = 640.0;
    let k = size / (2.0 * r);
    let x = |z: Complex64| (z.re + r) * k;
    let y = |z: Complex64| (r - z.im) * k;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r##"<line x1="0" y1="{:.3}" x2="{size}" y2="{:.3}" stroke="#ccc"/>"##, y(Complex64::new(0.0, 0.0)), y(Complex64::new(0.0, 0.0)));
    for a in &graph.arcs {
        let color = match a.end {
            ArcEnd::CriticalPoint { .. } => "#1f4e9c",
            ArcEnd::PoleSpiral { .. } | ArcEnd::PoleRadial { .. } => "#b3261e",
            _ => "#888888",
        };
        let mut pts = String::new();
        for p in a.points.iter().filter(|p| p.re.abs() <= 4.0 * r && p.im.abs() <= 4.0 * r) {
            let _ = write!(pts, "{:.3},{:.3} ", x(*p), y(*p));
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.trim_end());
    }
    for v in &graph.vertices {
        let (cx, cy) = (x(v.z), y(v.z));
        match v.kind {
            VertexKind::Zero { .. } => {
                let _ = writeln!(s, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="4" fill="black"/>"#);
            }
            VertexKind::Pole { .. } => {
                let _ = writeln!(
                    s,
                    r#"<path d="M{:.3},{:.3}L{:.3},{:.3}M{:.3},{:.3}L{:.3},{:.3}" stroke="black" stroke-width="2"/>"#,
                    cx - 5.0,
                    cy - 5.0,
                    cx + 5.0,
                    cy + 5.0,
                    cx - 5.0,
                    cy + 5.0,
                    cx + 5.0,
                    cy - 5.0
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
