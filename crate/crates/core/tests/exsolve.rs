use jacobiqd::exsolve::*;
use jacobiqd::jacobi::{jacobi_poly, JacobiParams};
use jacobiqd::limitfield::{circle_probes, eq12_residual, LimitParams};
use jacobiqd::poly::ComplexPolynomial;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cr(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random pencils with monic `Q2` and `Q0` near 1, kept when generic.
fn random_pencils(seed: u64, count: usize) -> Vec<OperatorPencil> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let t = OperatorPencil::new(
            ComplexPolynomial::new(vec![cr(&mut rng), cr(&mut rng), Complex64::new(1.0, 0.0)]),
            ComplexPolynomial::new(vec![cr(&mut rng), cr(&mut rng)]),
            ComplexPolynomial::new(vec![cr(&mut rng), cr(&mut rng)]),
            1.0 + 0.5 * cr(&mut rng),
            cr(&mut rng),
            cr(&mut rng),
        )
        .unwrap();
        if generic_type_check(&t, 1e-9).generic {
            out.push(t);
        }
    }
    out
}

#[test]
fn legendre_pencil_matches_limit_equation() {
    let zero = Complex64::new(0.0, 0.0);
    let t = OperatorPencil::jacobi(zero, zero).unwrap();
    let lp = LimitParams::new(zero, zero).unwrap();
    let probes = circle_probes(2.0, 64);
    let rep = gen_cauchy_residual(&t, 1, &[20, 40, 60], &probes, 1e-12).unwrap();
    assert!((rep.alpha - 1.0).norm() < 1e-15);
    for row in &rep.rows {
        let mu = jacobi_poly(&JacobiParams::new(row.n, zero, zero)).roots(1e-12).unwrap();
        let s = eq12_residual(&lp, &mu, &probes).unwrap();
        assert!((s.median - row.residual.median).abs() < 1e-6, "n={}", row.n);
        assert!((s.max - row.residual.max).abs() < 1e-6, "n={}", row.n);
    }
}

#[test]
fn residual_halves_when_degree_doubles() {
    let probes = circle_probes(4.0, 64);
    for t in random_pencils(11, 3) {
        for which in [1, 2] {
            let rep = gen_cauchy_residual(&t, which, &[10, 20, 40], &probes, 1e-12).unwrap();
            for w in rep.rows.windows(2) {
                let ratio = w[1].residual.median / w[0].residual.median;
                assert!(ratio <= 0.5, "family {which}: n {} -> {}: ratio {ratio}", w[0].n, w[1].n);
            }
        }
    }
}

#[test]
fn eigenvalue_ratios_converge() {
    for t in random_pencils(5, 3) {
        let alpha = characteristic_poly(&t).roots;
        let e = eigenvalues_for_degree(&t, 200).unwrap();
        for i in 0..2 {
            assert!((e.ratio[i] - alpha[i]).norm() <= 5.0 / 200.0);
        }
        let c0 = t.diagonal_coeffs(200)[0];
        assert!((e.lambda[0] * e.lambda[1] * t.q0 - c0).norm() <= 1e-10 * c0.norm());
    }
}

#[test]
fn eigenpolynomials_solve_the_equation() {
    for t in random_pencils(23, 4) {
        for n in [1, 2, 5, 8, 15, 30] {
            for which in [1, 2] {
                let ep = eigenpolynomial(&t, n, which, 1e-12).unwrap();
                assert_eq!(ep.poly.degree(), Some(n));
                assert!(ep.ode_residual <= 1e-8, "n={n}: {}", ep.ode_residual);
            }
        }
    }
}

#[test]
fn jacobi_specialization_matches_jacobi_poly() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..5 {
        let (a, b) = (2.0 * cr(&mut rng), 2.0 * cr(&mut rng));
        let t = OperatorPencil::jacobi(a, b).unwrap();
        for n in 1..=15 {
            let ep = eigenpolynomial(&t, n, 1, 1e-12).unwrap();
            let jp = jacobi_poly(&JacobiParams::new(n, a * n as f64, b * n as f64));
            let lead = jp.poly().leading();
            let err = (0..=n).map(|k| (ep.poly.coeff(k) - jp.poly().coeff(k) / lead).norm()).fold(0.0, f64::max);
            let scale = ep.poly.max_coeff_abs();
            assert!(err <= 1e-9 * scale, "A={a} B={b} n={n}: {err:e}");
        }
    }
}

#[test]
fn csv_has_one_row_per_degree() {
    let t = &random_pencils(1, 1)[0];
    let rep = gen_cauchy_residual(t, 1, &[5, 10], &circle_probes(4.0, 16), 1e-12).unwrap();
    let csv = gen_cauchy_csv(&rep);
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("n,lambda_re"));
}
