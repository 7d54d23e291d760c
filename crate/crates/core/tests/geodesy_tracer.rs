//! Every inventory entry is checked against the tracer: rotating the
//! differential by the entry's `s` must turn the arc into a finite critical
//! trajectory with the predicted endpoints, Q-length and enclosed pole.

use jacobiqd::geodesy::{geodesic_inventory, LoopPole};
use jacobiqd::qdclass::{classify, NormalizedQD, ZeroLabel};
use jacobiqd::tracer::{trace_critical, CriticalGraph, RationalQD};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn winding(points: &[Complex64], z: Complex64) -> f64 {
    let mut w = 0.0;
    for k in 0..points.len() {
        let a = points[k] - z;
        let b = points[(k + 1) % points.len()] - z;
        w += (b / a).arg();
    }
    w / TAU
}

fn find_edge(g: &CriticalGraph, u: usize, v: usize, len: f64) -> Option<usize> {
    g.edges
        .iter()
        .find(|e| ((e.from == u && e.to == v) || (e.from == v && e.to == u)) && (e.q_length - len).abs() <= 1e-3 * (1.0 + len))
        .map(|e| e.arc)
}

fn check(qd: NormalizedQD) {
    let inv = geodesic_inventory(&qd).unwrap();
    let base = RationalQD::from_normalized(&qd);
    let label = |l: ZeroLabel| qd.zero(l);
    for geo in &inv.geodesics {
        let len = TAU * geo.length;
        let g = trace_critical(&base.rotated(geo.s), len + 10.0).unwrap();
        let (u, v) = (g.vertex_near(qd.p1).unwrap(), g.vertex_near(qd.p2).unwrap());
        let found = find_edge(&g, u, v, len);
        assert!(
            found.is_some(),
            "{} {:?}: geodesic {} s={} len={} not traced; edges {:?}",
            inv.case,
            qd,
            geo.name,
            geo.s,
            len,
            g.edges
        );
    }
    for lp in &inv.loops {
        let len = TAU * lp.length;
        let g = trace_critical(&base.rotated(lp.s), len + 10.0).unwrap();
        let u = g.vertex_near(label(lp.base)).unwrap();
        let arc = find_edge(&g, u, u, len);
        let Some(arc) = arc else {
            panic!("{} {:?}: loop {} s={} len={} not traced; edges {:?}", inv.case, qd, lp.name, lp.s, len, g.edges);
        };
        let pts = &g.arcs[arc].points;
        let (wp, wm) = (winding(pts, c(1.0, 0.0)).abs(), winding(pts, c(-1.0, 0.0)).abs());
        match lp.pole {
            LoopPole::Plus => assert!(wp > 0.5 && wm < 0.5, "{} {:?}: loop {} winds ({wp}, {wm})", inv.case, qd, lp.name),
            LoopPole::Minus => assert!(wm > 0.5 && wp < 0.5, "{} {:?}: loop {} winds ({wp}, {wm})", inv.case, qd, lp.name),
            LoopPole::Infinity => {}
        }
    }
}

fn ellipse(a: f64, theta: f64) -> Complex64 {
    c(a * theta.cos(), (a * a - 1.0).sqrt() * theta.sin())
}

#[test]
fn three_circles() {
    check(NormalizedQD::new(c(0.5, 0.0), c(-0.5, 0.0)));
    check(NormalizedQD::new(c(0.2, 0.0), c(-0.7, 0.0)));
    check(NormalizedQD::new(c(2.0, 0.0), c(3.0, 0.0)));
    check(NormalizedQD::new(c(-2.5, 0.0), c(-1.5, 0.0)));
    check(NormalizedQD::new(c(0.3, 0.8), c(0.3, -0.8)));
}

#[test]
fn two_circles() {
    let e = |r: f64, t: f64| Complex64::from_polar(r, t);
    check(NormalizedQD::new(1.0 + e(2.0, 1.0), 1.0 + e(0.5, -1.0)));
    check(NormalizedQD::new(-1.0 + e(2.0, 1.0), -1.0 + e(0.7, -1.0)));
    check(NormalizedQD::new(-1.0 + e(0.6, 2.0), -1.0 + e(0.8, -2.0)));
}

#[test]
fn one_circle_one_strip() {
    for (t1, t2) in [(1.0, 2.5), (0.4, -2.0), (2.0, 0.7)] {
        let qd = NormalizedQD::new(ellipse(1.5, t1), ellipse(1.5, t2));
        assert_eq!(classify(&qd).topology.name(), "OneCircleOneStrip_a");
        check(qd);
    }
    let ch = |t: f64, phi: f64| c(t, phi).cosh();
    for (t1, t2, phi) in [(0.5, 1.2, 1.0), (1.5, 0.3, 2.2), (0.8, 1.1, -0.9)] {
        let qd = NormalizedQD::new(ch(t1, phi), ch(t2, phi));
        assert_eq!(classify(&qd).topology.name(), "OneCircleOneStrip_b1");
        check(qd);
    }
}

#[test]
fn one_circle_two_strips() {
    let anchor = NormalizedQD::new(c(0.0, 2.0), c(-0.5, 0.5));
    check(anchor);
    check(anchor.conj());
    check(anchor.mirror());
    check(anchor.swapped());
    check(NormalizedQD::new(c(3.0, 0.0), c(-2.0, 0.0)));
    check(NormalizedQD::new(c(0.4, 1.3), c(-2.0, -0.6)));
    check(NormalizedQD::new(c(PI / 3.0, 0.25), c(-0.3, 0.9)));
}

#[test]
fn every_generic_letter() {
    use jacobiqd::geodesy::{strip_diagram, Subcase};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut seen = std::collections::BTreeMap::new();
    for _ in 0..4000 {
        let qd = NormalizedQD::new(
            c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
        );
        let Ok(sd) = strip_diagram(&qd) else { continue };
        let n = seen.entry(sd.subcase).or_insert(0);
        if *n < 2 {
            check(qd);
        }
        *n += 1;
    }
    for l in [Subcase::A, Subcase::C, Subcase::E, Subcase::G, Subcase::I] {
        assert!(seen.contains_key(&l), "letter {l} never sampled: {seen:?}");
    }
}

#[test]
fn two_circles_equal_lengths() {
    // sqrt(Cm1) = 2: the loops at inf and -1 have equal Q-length
    let e = |r: f64, t: f64| Complex64::from_polar(r, t);
    let qd = NormalizedQD::new(-1.0 + e(4.0, 0.7), -1.0 + e(1.0, -0.7));
    let inv = geodesic_inventory(&qd).unwrap();
    assert_eq!(inv.counts, (4, 2));
    check(qd);
}
