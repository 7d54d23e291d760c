//! The acceptance suite. Runs every criterion, prints one line per criterion
//! and exits nonzero if any fails. Tolerances are pinned here.

use jacobiqd::exsolve::{characteristic_poly, eigenpolynomial, eigenvalues_for_degree, generic_type_check, OperatorPencil};
use jacobiqd::geodesy::{f_numeric, f_p2_closed_form, geodesic_inventory, lattice_deviation, strip_diagram, subcase_by_inequalities, Subcase};
use jacobiqd::jacobi::{jacobi_poly, ode_residual, value_at_one, JacobiParams, ParamSequence};
use jacobiqd::limitfield::{circle_probes, eq12_residual, limit_discriminant, theorem2_differential, LimitParams, Theorem2Form};
use jacobiqd::poly::ComplexPolynomial;
use jacobiqd::qdclass::{classify, NormalizedQD, Orientation, TopologicalType};
use jacobiqd::tracer::{support_distance, topology_concordance, trace_critical, trace_critical_with, RationalQD, TraceConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

const DISCRIMINANT_TOL: f64 = 1e-12;
const EQ12_MAX_AT_60: f64 = 0.05;
const SUPPORT_RADIUS: f64 = 0.05;
const LATTICE_TOL: f64 = 1e-5;
const ANCHOR_TOL: f64 = 1e-3;
const S_TOL: f64 = 1e-9;
const CONCORDANCE_MIN: f64 = 0.99;
const CONCORDANCE_BUDGET: f64 = 500.0;
const JACOBI_VALUE_TOL: f64 = 1e-10;
const JACOBI_ODE_TOL: f64 = 1e-8;
const JACOBI_SYMMETRY_TOL: f64 = 1e-10;
const DEGENERATE_MAX_AT_40: f64 = 0.21;
const EIGENPOLY_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn random_pair(rng: &mut ChaCha8Rng, r: f64) -> NormalizedQD {
    NormalizedQD::new(
        c(rng.gen_range(-r..r), rng.gen_range(-r..r)),
        c(rng.gen_range(-r..r), rng.gen_range(-r..r)),
    )
}

fn discriminant_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let (a, b) = (c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)), c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)));
        let Ok(lp) = LimitParams::new(a, b) else { continue };
        let d = limit_discriminant(&lp);
        let want = [(a - b) * (a - b) - 4.0 * (a + b + 1.0), 2.0 * (a * a - b * b), (a + b + 2.0) * (a + b + 2.0)];
        for k in 0..3 {
            worst = worst.max(rel(d.coeff(k), want[k]));
        }
        done += 1;
    }
    let detail = format!("100 draws, worst relative coefficient error {worst:.2e}");
    if worst <= DISCRIMINANT_TOL { Ok(detail) } else { Err(detail) }
}

fn eq12_decay() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = vec![(0.0, 0.0)];
    for _ in 0..2 {
        cases.push((rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)));
    }
    let probes = circle_probes(2.0, 64);
    let mut lines = Vec::new();
    let mut ok = true;
    for (a, b) in cases {
        let lp = LimitParams::new(c(a, 0.0), c(b, 0.0)).map_err(|e| e.to_string())?;
        let seq = ParamSequence::new(c(a, 0.0), c(b, 0.0));
        let mut med = Vec::new();
        for n in [20, 40, 60] {
            let mu = jacobi_poly(&seq.params(n)).roots(1e-12).map_err(|e| e.to_string())?;
            med.push(eq12_residual(&lp, &mu, &probes).map_err(|e| e.to_string())?.median);
        }
        ok &= med[1] < med[0] && med[2] < med[1] && med[2] <= EQ12_MAX_AT_60;
        lines.push(format!("(A,B)=({a:.3},{b:.3}) medians {:.2e} {:.2e} {:.2e}", med[0], med[1], med[2]));
    }
    let detail = lines.join("; ");
    if ok { Ok(detail) } else { Err(detail) }
}

fn support_on_trajectories() -> Outcome {
    let lp = LimitParams::new(c(1.0, 0.0), c(1.0, 0.0)).map_err(|e| e.to_string())?;
    let Theorem2Form::Normalized { qd, scale } = theorem2_differential(&lp) else {
        return Err("differential is degenerate".into());
    };
    let graph = trace_critical(&RationalQD::from_normalized(&qd).scaled(scale), 50.0).map_err(|e| e.to_string())?;
    let mu = jacobi_poly(&ParamSequence::new(c(1.0, 0.0), c(1.0, 0.0)).params(60)).roots(1e-12).map_err(|e| e.to_string())?;
    let stats = support_distance(&mu, &graph).map_err(|e| e.to_string())?;
    let detail = format!("zeros {:.4}, {:.4}; p95 distance {:.2e}, max {:.2e}", qd.p1, qd.p2, stats.p95, stats.max);
    // p95 is the distance below which 95% of the roots lie
    if stats.p95 <= SUPPORT_RADIUS { Ok(detail) } else { Err(detail) }
}

/// A polyline from `p1` to `p2` that keeps clear of the poles.
fn clear_path(qd: &NormalizedQD) -> Vec<Complex64> {
    let (a, b) = (qd.p1, qd.p2);
    let d = b - a;
    let mid = a + 0.5 * d;
    for pole in [c(1.0, 0.0), c(-1.0, 0.0)] {
        let t = (((pole - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
        if (a + d * t - pole).norm() < 0.1 {
            let normal = c(0.0, 1.0) * d / d.norm();
            let side = if ((mid - pole) * normal.conj()).re >= 0.0 { 1.0 } else { -1.0 };
            return vec![a + d * t + normal * (0.5 * side)];
        }
    }
    Vec::new()
}

fn closed_form_vs_quadrature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 50 {
        let qd = random_pair(&mut rng, 3.0);
        if !matches!(classify(&qd).topology, TopologicalType::OneCircleTwoStrips { .. }) {
            continue;
        }
        let w = f_p2_closed_form(&qd).map_err(|e| e.to_string())?;
        let f = f_numeric(&qd, qd.p1, qd.p2, &clear_path(&qd)).map_err(|e| format!("{qd:?}: {e}"))?;
        worst = worst.max(lattice_deviation(&qd, f.value, w).map_err(|e| e.to_string())?);
        done += 1;
    }
    let detail = format!("50 configurations, worst lattice deviation {worst:.2e}");
    if worst <= LATTICE_TOL { Ok(detail) } else { Err(detail) }
}

fn dual_classification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut done, mut marked, mut agree) = (0, 0, 0);
    let mut first_miss = None;
    while done < 500 {
        let qd = random_pair(&mut rng, 3.0);
        let TopologicalType::OneCircleTwoStrips { orientation: Orientation::B2, .. } = classify(&qd).topology else { continue };
        done += 1;
        let sd = strip_diagram(&qd).map_err(|e| e.to_string())?;
        let ineq = subcase_by_inequalities(&qd).map_err(|e| e.to_string())?;
        if sd.boundary_marker || ineq.boundary_marker {
            marked += 1;
        } else if sd.subcase == ineq.subcase {
            agree += 1;
        } else if first_miss.is_none() {
            first_miss = Some(format!("{qd:?}: {} vs {}", sd.subcase, ineq.subcase));
        }
    }
    let detail = format!("{agree}/{} agree, {marked} boundary-marked", done - marked);
    match first_miss {
        None => Ok(detail),
        Some(m) => Err(format!("{detail}; first disagreement {m}")),
    }
}

fn worked_anchor() -> Outcome {
    let qd = NormalizedQD::new(c(0.0, 2.0), c(-0.5, 0.5));
    let sd = strip_diagram(&qd).map_err(|e| e.to_string())?;
    let inv = geodesic_inventory(&qd).map_err(|e| e.to_string())?;
    let mut s: Vec<f64> = inv.loops.iter().map(|l| l.s).collect();
    s.sort_by(f64::total_cmp);
    let want_s = [0.0, c(-0.5, 1.5).arg(), c(0.5, -3.5).arg().rem_euclid(TAU)];
    let numbers_ok = (sd.x2 + 0.0389).abs() <= ANCHOR_TOL
        && (sd.h1 - 0.0530).abs() <= ANCHOR_TOL
        && (sd.x2p - 0.3287).abs() <= ANCHOR_TOL
        && (sd.h - 0.5630).abs() <= ANCHOR_TOL;
    let s_ok = s.len() == 3 && s.iter().zip(want_s).all(|(x, y)| (x - y).abs() <= S_TOL);
    let detail = format!(
        "x2={:.4} h1={:.4} x2'={:.4} h={:.4} subcase {} counts {:?} loop s {:?}",
        sd.x2, sd.h1, sd.x2p, sd.h, sd.subcase, inv.counts, s
    );
    if numbers_ok && sd.subcase == Subcase::G && inv.counts == (4, 3) && s_ok { Ok(detail) } else { Err(detail) }
}

fn tracer_concordance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = TraceConfig { budget: CONCORDANCE_BUDGET, ..TraceConfig::default() };
    let (mut done, mut agree, mut marked) = (0, 0, 0);
    let mut misses = Vec::new();
    while done < 200 {
        let qd = random_pair(&mut rng, 3.0);
        if !qd.is_generic() {
            continue;
        }
        let cls = classify(&qd);
        if cls.boundary_marker {
            marked += 1;
            continue;
        }
        done += 1;
        let graph = trace_critical_with(&RationalQD::from_normalized(&qd), &cfg).map_err(|e| format!("{qd:?}: {e}"))?;
        let conc = topology_concordance(&qd, &graph).map_err(|e| e.to_string())?;
        if conc.agrees() {
            agree += 1;
        } else if misses.len() < 3 {
            misses.push(format!("{qd:?}: {}", conc.mismatches.join(", ")));
        }
    }
    let rate = agree as f64 / done as f64;
    let detail = format!("{agree}/{done} agree ({marked} boundary-marked skipped)");
    if rate >= CONCORDANCE_MIN { Ok(detail) } else { Err(format!("{detail}; {}", misses.join("; "))) }
}

fn jacobi_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid: Vec<Complex64> = (0..16).map(|k| Complex64::from_polar(0.3 + 0.15 * k as f64, 0.7 * k as f64 + 0.2)).collect();
    let (mut at_one, mut ode, mut sym): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..20 {
        let alpha = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let beta = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        for n in 0..=40 {
            let p = JacobiParams::new(n, alpha, beta);
            let jp = jacobi_poly(&p);
            if jp.degree_drop {
                continue;
            }
            ode = ode.max(ode_residual(&p, jp.poly(), &grid));
            if n > 20 {
                continue;
            }
            at_one = at_one.max(rel(jp.evaluate(c(1.0, 0.0)), value_at_one(&p)));
            let swapped = jacobi_poly(&p.swapped());
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            // the swapped side through the recurrence in n: the monomial
            // coefficients of the two are exact sign flips of each other
            for &z in &grid {
                let (a, b) = (jp.evaluate(-z), sign * swapped.evaluate_stable(z).0);
                sym = sym.max((a - b).norm() / jp.poly().abs_eval(z).max(f64::MIN_POSITIVE));
            }
        }
    }
    let detail = format!("P(1) {at_one:.2e}, ODE residual {ode:.2e}, symmetry {sym:.2e}");
    if at_one <= JACOBI_VALUE_TOL && ode <= JACOBI_ODE_TOL && sym <= JACOBI_SYMMETRY_TOL { Ok(detail) } else { Err(detail) }
}

fn degenerate_regime() -> Outcome {
    let mut moduli = Vec::new();
    for n in [10usize, 20, 30, 40, 50, 60] {
        let nf = n as f64;
        let p = JacobiParams::new(n, c(nf * nf, 0.0), c(nf * nf + nf, 0.0));
        let mu = jacobi_poly(&p).roots(1e-12).map_err(|e| format!("n={n}: {e}"))?;
        moduli.push((n, mu.max_modulus()));
    }
    let decreasing = moduli.windows(2).all(|w| w[1].1 < w[0].1);
    let at40 = moduli.iter().find(|m| m.0 == 40).map(|m| m.1).unwrap_or(f64::NAN);
    let detail = moduli.iter().map(|(n, m)| format!("n={n}: {m:.6}")).collect::<Vec<_>>().join(", ");
    if decreasing && at40 <= DEGENERATE_MAX_AT_40 { Ok(detail) } else { Err(detail) }
}

fn random_generic_pencils(seed: u64, count: usize) -> Vec<OperatorPencil> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cr = move || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let mut out = Vec::new();
    while out.len() < count {
        let t = OperatorPencil::new(
            ComplexPolynomial::new(vec![cr(), cr(), c(1.0, 0.0)]),
            ComplexPolynomial::new(vec![cr(), cr()]),
            ComplexPolynomial::new(vec![cr(), cr()]),
            1.0 + 0.5 * cr(),
            cr(),
            cr(),
        )
        .expect("valid pencil");
        if generic_type_check(&t, 1e-9).generic {
            out.push(t);
        }
    }
    out
}

fn exsolve_consistency() -> Outcome {
    let n = 200;
    let mut ratio_dev: f64 = 0.0;
    for t in random_generic_pencils(10, 3) {
        let alpha = characteristic_poly(&t).roots;
        let ev = eigenvalues_for_degree(&t, n).map_err(|e| e.to_string())?;
        for i in 0..2 {
            ratio_dev = ratio_dev.max((ev.ratio[i] - alpha[i]).norm());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut poly_dev: f64 = 0.0;
    for _ in 0..5 {
        let (a, b) = (c(rng.gen_range(0.0..2.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(0.0..2.0), rng.gen_range(-1.0..1.0)));
        let t = OperatorPencil::jacobi(a, b).map_err(|e| e.to_string())?;
        for m in 1..=15 {
            let ep = eigenpolynomial(&t, m, 1, 1e-14).map_err(|e| e.to_string())?;
            let jp = jacobi_poly(&ParamSequence::new(a, b).params(m));
            let lead = jp.poly().leading();
            let scale = jp.poly().max_coeff_abs() / lead.norm();
            for k in 0..=m {
                poly_dev = poly_dev.max((ep.poly.coeff(k) - jp.poly().coeff(k) / lead).norm() / scale);
            }
        }
    }
    let bound = 5.0 / n as f64;
    let detail = format!("max |lambda/n - alpha| {ratio_dev:.2e} (bound {bound:.2e}); eigenpolynomial deviation {poly_dev:.2e}");
    if ratio_dev <= bound && poly_dev <= EIGENPOLY_TOL { Ok(detail) } else { Err(detail) }
}

/// Every command with its flags; output files are named inside the run dir.
fn cli_runs() -> Vec<Vec<&'static str>> {
    vec![
        vec!["jacobi-roots", "--A", "1", "--B", "1", "--degrees", "20,40", "--json", "roots.json", "--csv", "roots.csv"],
        vec!["jacobi-roots", "--n", "10", "--alpha", "0", "--beta", "0", "--csv", "legendre.csv"],
        vec!["limit-check", "--A", "0.5", "--B", "1.5", "--degrees", "20,40", "--json", "limit.json", "--csv", "limit.csv"],
        vec!["classify", "--p1", "2i", "--p2", "-0.5+0.5i"],
        vec!["spiral", "--p1", "2i", "--p2", "-0.5+0.5i"],
        vec!["diagram", "--p1", "2i", "--p2", "-0.5+0.5i", "--svg", "diagram.svg", "--json", "diagram.json"],
        vec!["geodesics", "--p1", "2i", "--p2", "-0.5+0.5i"],
        vec!["short-s", "--p1", "2i", "--p2", "-0.5+0.5i"],
        vec!["trace", "--p1", "i", "--p2", "-i", "--svg", "trace.svg", "--csv", "trace.csv", "--json", "trace.json"],
        vec!["motherbody", "--A", "1", "--B", "1", "--json", "motherbody.json"],
        vec!["exsolve", "--seed", "3", "--degrees", "10,20", "--json", "exsolve.json", "--csv", "exsolve.csv"],
        vec!["sweep", "--p1", "2i", "--grid", "-3..3x-3..3", "--res", "24", "--workers", "3", "--svg", "sweep.svg", "--json", "sweep.json"],
    ]
}

fn run_all(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for args in cli_runs() {
        let res = Command::new(env!("CARGO_BIN_EXE_jacobiqd")).args(&args).current_dir(dir).output().map_err(|e| e.to_string())?;
        if !res.status.success() {
            return Err(format!("{args:?} exited {:?}: {}", res.status.code(), String::from_utf8_lossy(&res.stderr)));
        }
        out.push((format!("{} stdout", args.join(" ")), res.stdout));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir).map_err(|e| e.to_string())?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    files.sort();
    for f in files {
        out.push((f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&f).map_err(|e| e.to_string())?));
    }
    Ok(out)
}

fn cli_determinism() -> Outcome {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_cli");
    let _ = std::fs::remove_dir_all(&root);
    let first = run_all(&root.join("first"))?;
    let second = run_all(&root.join("second"))?;
    if first.len() != second.len() {
        return Err(format!("{} vs {} outputs", first.len(), second.len()));
    }
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        if a != b {
            return Err(format!("{name} differs between runs"));
        }
    }
    Ok(format!("{} commands, {} outputs byte-identical", cli_runs().len(), first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("discriminant identity", discriminant_identity),
        ("limit equation residual decay", eq12_decay),
        ("roots on critical trajectories", support_on_trajectories),
        ("closed form vs quadrature", closed_form_vs_quadrature),
        ("dual subcase classification", dual_classification),
        ("worked two-strip anchor", worked_anchor),
        ("tracer/classifier concordance", tracer_concordance),
        ("Jacobi correctness", jacobi_correctness),
        ("degenerate regime", degenerate_regime),
        ("exactly solvable consistency", exsolve_consistency),
        ("CLI determinism", cli_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = panic::catch_unwind(f).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS {name} [{secs:.1}s]: {d}", k + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} [{secs:.1}s]: {d}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
