use jacobiqd::jacobi::{jacobi_poly, ode_residual, JacobiParams};
use jacobiqd::limitfield::{limit_discriminant, LimitParams};
use jacobiqd::motherbody::{branch_points, expected_residue_sum, pole_residues, QuadraticCauchyEquation};
use jacobiqd::poly::ComplexPolynomial;
use jacobiqd::qdclass::{classify, NormalizedQD};
use num_complex::Complex64;
use proptest::prelude::*;

fn cplx(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

/// Each of `ws` within `tol` of `zs`, greedily matched.
fn same_multiset(zs: &[Complex64], ws: &[Complex64], tol: f64) -> bool {
    let mut left = ws.to_vec();
    zs.len() == ws.len()
        && zs.iter().all(|z| match left.iter().position(|w| (w - z).norm() <= tol) {
            Some(i) => {
                left.swap_remove(i);
                true
            }
            None => false,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // zeros of the derivative lie in the convex hull of the zeros: no
    // direction separates a critical point from all roots
    #[test]
    fn gauss_lucas(n in 2usize..16, a in cplx(4.0), b in cplx(4.0)) {
        let jp = jacobi_poly(&JacobiParams::new(n, a, b));
        prop_assume!(!jp.degree_drop);
        let roots = jp.poly().find_roots(1e-12).unwrap();
        let crit = jp.poly().derivative().find_roots(1e-12).unwrap();
        let spread = roots.roots().iter().map(|r| r.norm()).fold(1.0, f64::max);
        for &w in crit.roots() {
            for k in 0..64 {
                let u = Complex64::from_polar(1.0, k as f64 * std::f64::consts::TAU / 64.0);
                let reach = roots.roots().iter().map(|r| (u.conj() * r).re).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!((u.conj() * w).re <= reach + 1e-8 * spread);
            }
        }
    }

    #[test]
    fn jacobi_reflection(n in 0usize..30, a in cplx(5.0), b in cplx(5.0), z in cplx(1.5)) {
        let p = JacobiParams::new(n, a, b);
        let (jp, sw) = (jacobi_poly(&p), jacobi_poly(&p.swapped()));
        prop_assume!(!jp.degree_drop && !sw.degree_drop);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = jp.evaluate_stable(-z).0;
        let rhs = sw.evaluate_stable(z).0 * sign;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * jp.poly().abs_eval(-z).max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn jacobi_solves_its_equation(n in 1usize..25, a in cplx(3.0), b in cplx(3.0)) {
        let p = JacobiParams::new(n, a, b);
        let grid: Vec<Complex64> = (0..8).map(|k| Complex64::from_polar(0.5 + 0.2 * k as f64, 0.9 * k as f64)).collect();
        prop_assert!(ode_residual(&p, jacobi_poly(&p).poly(), &grid) <= 1e-10);
    }

    // z -> -z exchanges the poles, relabeling exchanges the zeros; neither
    // changes the picture
    #[test]
    fn classification_symmetries(p1 in cplx(3.0), p2 in cplx(3.0)) {
        let qd = NormalizedQD::new(p1, p2);
        prop_assume!(qd.is_generic());
        let c = classify(&qd);
        prop_assume!(!c.boundary_marker);
        let m = classify(&qd.mirror());
        let s = classify(&qd.swapped());
        prop_assume!(!m.boundary_marker && !s.boundary_marker);
        prop_assert_eq!(m.topology, c.topology.mirrored());
        prop_assert_eq!(s.topology, c.topology.relabeled());
    }

    #[test]
    fn residues_add_up(poles in prop::collection::vec(cplx(2.0), 2..6), q in prop::collection::vec(cplx(2.0), 1..7)) {
        for i in 0..poles.len() {
            for j in 0..i {
                prop_assume!((poles[i] - poles[j]).norm() > 0.2);
            }
        }
        let p = ComplexPolynomial::from_roots(&poles, Complex64::new(1.0, 0.0));
        let n = poles.len() - 2;
        let q = ComplexPolynomial::new(q.into_iter().take(n + 2).collect());
        let eq = QuadraticCauchyEquation::new(p, q, ComplexPolynomial::zero()).unwrap();
        let total: Complex64 = pole_residues(&eq, 1e-9).unwrap().iter().map(|r| r.residue).sum();
        let want = expected_residue_sum(&eq);
        prop_assert!((total - want).norm() <= 1e-8 * (1.0 + want.norm()), "{total} vs {want}");
    }

    #[test]
    fn branch_points_are_limit_discriminant_zeros(a in cplx(3.0), b in cplx(3.0)) {
        let lp = LimitParams::new(a, b);
        prop_assume!(lp.is_ok());
        let d = limit_discriminant(&lp.unwrap());
        prop_assume!(d.degree() == Some(2));
        let want = d.find_roots(1e-12).unwrap();
        let bp = branch_points(&QuadraticCauchyEquation::jacobi_limit(a, b), 1e-9).unwrap();
        prop_assert!(same_multiset(&bp.points, want.roots(), 1e-6), "{:?} vs {:?}", bp.points, want.roots());
    }
}
