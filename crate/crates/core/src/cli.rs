//! Command-line front end. Every command writes JSON with a top-level
//! `"schema": 1` (to `--json` or stdout) and optional CSV/SVG files. Floats are
//! printed with 17 significant digits, so identical invocations give identical
//! bytes. Exit codes: 0 ok, 1 numerical failure, 2 usage.

use crate::error::Error;
use crate::exsolve::{
    characteristic_poly, eigenvalues_for_degree, gen_cauchy_csv, gen_cauchy_residual, generic_type_check, OperatorPencil,
};
use crate::geodesy::{diagram_svg, geodesic_inventory, short_s_values, strip_diagram};
use crate::jacobi::{jacobi_poly, JacobiParams, ParamSequence};
use crate::limitfield::{circle_probes, eq12_residual, limit_discriminant, theorem2_differential, LimitParams, Theorem2Form};
use crate::motherbody::{
    branch_points, discriminant, dk0_connectivity, expected_residue_sum, pole_residues, sufficiency_report,
    QuadraticCauchyEquation,
};
use crate::output::{fmt_f64, to_json_pretty};
use crate::poly::ComplexPolynomial;
use crate::qdclass::{classify, heights, region_of, spiral_behavior, NormalizedQD, TopologicalType};
use crate::tracer::{graph_csv, graph_svg, trace_critical_with, RationalQD, TraceConfig};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

pub const SCHEMA: u32 = 1;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Module(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Module(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `a+bi`, `a`, `bi`, `i`, `-i` or the pair form `re,im`.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number '{s}' (use a+bi or re,im)");
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((re, im)) = t.split_once(',') {
        return Ok(Complex64::new(num(re)?, num(im)?));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(num(&t)?, 0.0));
    };
    // the sign that starts the imaginary part: not leading, not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (num(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => num(x)?,
    };
    Ok(Complex64::new(re, im))
}

/// Coefficients in ascending order, separated by `;`.
fn parse_coeffs(s: &str) -> std::result::Result<ComplexPolynomial, String> {
    let v = s.split(';').map(parse_complex).collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(ComplexPolynomial::new(v))
}

/// `re0..re1xim0..im1`.
fn parse_grid(s: &str) -> std::result::Result<[f64; 4], String> {
    let bad = || format!("cannot parse grid '{s}' (use re0..re1xim0..im1)");
    let (x, y) = s.split_once('x').ok_or_else(bad)?;
    let range = |r: &str| -> std::result::Result<(f64, f64), String> {
        let (a, b) = r.split_once("..").ok_or_else(bad)?;
        let (a, b) = (a.parse::<f64>().map_err(|_| bad())?, b.parse::<f64>().map_err(|_| bad())?);
        if a < b { Ok((a, b)) } else { Err(bad()) }
    };
    let ((x0, x1), (y0, y1)) = (range(x)?, range(y)?);
    Ok([x0, x1, y0, y1])
}

#[derive(Parser, Debug)]
#[command(name = "jacobiqd", version, about = "Jacobi zero asymptotics and their quadratic differentials")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Pair {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    p1: Complex64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    p2: Complex64,
}

#[derive(Args, Debug, Clone, Default)]
struct Out {
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Zeros of Jacobi polynomials.
    JacobiRoots {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        alpha: Option<Complex64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        beta: Option<Complex64>,
        /// alpha_n = A n.
        #[arg(long = "A", value_parser = parse_complex, allow_hyphen_values = true)]
        a: Option<Complex64>,
        /// beta_n = B n.
        #[arg(long = "B", value_parser = parse_complex, allow_hyphen_values = true)]
        b: Option<Complex64>,
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: Out,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Residual of the limiting quadratic for the empirical Cauchy transform.
    LimitCheck {
        #[arg(long = "A", value_parser = parse_complex, allow_hyphen_values = true)]
        a: Complex64,
        #[arg(long = "B", value_parser = parse_complex, allow_hyphen_values = true)]
        b: Complex64,
        #[arg(long, value_delimiter = ',', default_value = "20,40,60")]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: Out,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Topological type of the normalized differential.
    Classify {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        out: Out,
    },
    /// Local behaviour at the poles and the normalized heights.
    Spiral {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        out: Out,
    },
    /// Strip diagram of a two-strip configuration.
    Diagram {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        out: Out,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Short geodesics and geodesic loops.
    Geodesics {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        out: Out,
    },
    /// Rotation angles with short critical trajectories.
    ShortS {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        out: Out,
    },
    /// Traced critical graph of the normalized (or limiting Jacobi) differential.
    Trace {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        p1: Option<Complex64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        p2: Option<Complex64>,
        #[arg(long = "A", value_parser = parse_complex, allow_hyphen_values = true)]
        a: Option<Complex64>,
        #[arg(long = "B", value_parser = parse_complex, allow_hyphen_values = true)]
        b: Option<Complex64>,
        /// Rotation: trace e^{is} Q dz^2.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, default_value_t = 50.0)]
        budget: f64,
        #[command(flatten)]
        out: Out,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Branch points, residues and DK0 connectivity of a quadratic equation.
    Motherbody {
        #[arg(long = "A", value_parser = parse_complex, allow_hyphen_values = true)]
        a: Option<Complex64>,
        #[arg(long = "B", value_parser = parse_complex, allow_hyphen_values = true)]
        b: Option<Complex64>,
        /// Coefficients of P, ascending, separated by ';'.
        #[arg(long = "P", value_parser = parse_coeffs, allow_hyphen_values = true)]
        p: Option<ComplexPolynomial>,
        #[arg(long = "Q", value_parser = parse_coeffs, allow_hyphen_values = true)]
        q: Option<ComplexPolynomial>,
        #[arg(long = "R", value_parser = parse_coeffs, allow_hyphen_values = true)]
        r: Option<ComplexPolynomial>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 50.0)]
        budget: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Eigenvalues and eigenpolynomial zeros of a degenerate exactly solvable pencil.
    Exsolve {
        #[arg(long = "A", value_parser = parse_complex, allow_hyphen_values = true)]
        a: Option<Complex64>,
        #[arg(long = "B", value_parser = parse_complex, allow_hyphen_values = true)]
        b: Option<Complex64>,
        /// Random generic pencil from this seed (used when A, B are absent).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: Out,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Classify every p2 on a grid for fixed p1.
    Sweep {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        p1: Complex64,
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, default_value = "-3..3x-3..3")]
        grid: [f64; 4],
        #[arg(long, default_value_t = 100)]
        res: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        out: Out,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn write_file(path: &PathBuf, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
}

fn emit(out: &Out, mut doc: Value, stdout: &mut dyn Write) -> CliResult<()> {
    if let Value::Object(m) = &mut doc {
        m.insert("schema".into(), json!(SCHEMA));
    }
    let mut text = to_json_pretty(&doc);
    text.push('\n');
    match &out.json {
        Some(p) => write_file(p, &text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string()).into()),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn check_tol(tol: f64) -> CliResult<()> {
    if tol > 0.0 && tol.is_finite() { Ok(()) } else { Err(usage(format!("--tol must be positive, got {tol}"))) }
}

fn jacobi_roots(
    n: Option<usize>,
    alpha: Option<Complex64>,
    beta: Option<Complex64>,
    a: Option<Complex64>,
    b: Option<Complex64>,
    degrees: Option<Vec<usize>>,
    tol: f64,
    out: &Out,
    csv: &Option<PathBuf>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    check_tol(tol)?;
    let linear = a.is_some() || b.is_some();
    if linear && (alpha.is_some() || beta.is_some()) {
        return Err(usage("give either --alpha/--beta or --A/--B, not both"));
    }
    let degrees = match (n, degrees) {
        (Some(n), None) => vec![n],
        (None, Some(d)) if !d.is_empty() => d,
        (None, _) => return Err(usage("one of --n or --degrees is required")),
        (Some(_), Some(_)) => return Err(usage("give --n or --degrees, not both")),
    };
    if !linear && degrees.len() > 1 {
        return Err(usage("--degrees needs --A/--B; fixed --alpha/--beta take a single --n"));
    }
    let zero = Complex64::default();
    let seq = ParamSequence::new(a.unwrap_or(zero), b.unwrap_or(zero));
    let mut clouds = Vec::new();
    let mut text = String::from("n,re,im\n");
    for &d in &degrees {
        let p = if linear { seq.params(d) } else { JacobiParams::new(d, alpha.unwrap_or(zero), beta.unwrap_or(zero)) };
        let jp = jacobi_poly(&p);
        let mu = jp.roots(tol)?;
        for r in mu.roots() {
            let _ = writeln!(text, "{d},{},{}", fmt_f64(r.re), fmt_f64(r.im));
        }
        clouds.push(jp.roots_json(&mu));
    }
    if let Some(path) = csv {
        write_file(path, &text)?;
    }
    emit(out, json!({"command": "jacobi-roots", "clouds": clouds}), stdout)
}

fn limit_check(a: Complex64, b: Complex64, degrees: &[usize], tol: f64, out: &Out, csv: &Option<PathBuf>, stdout: &mut dyn Write) -> CliResult<()> {
    check_tol(tol)?;
    let lp = LimitParams::new(a, b)?;
    let d = limit_discriminant(&lp);
    let want = lp.discriminant_closed_form();
    let dev = (0..3).map(|k| (d.coeff(k) - want[k]).norm()).fold(0.0, f64::max);
    let form = theorem2_differential(&lp);
    let topology = match &form {
        Theorem2Form::Normalized { qd, .. } => Some(to_value(&classify(qd))),
        Theorem2Form::Degenerate { .. } => None,
    };
    let probes = circle_probes(2.0, 64);
    let seq = ParamSequence::new(a, b);
    let mut rows = Vec::new();
    let mut text = String::from("n,median_residual,max_residual\n");
    for &n in degrees {
        let mu = jacobi_poly(&seq.params(n)).roots(tol)?;
        let st = eq12_residual(&lp, &mu, &probes)?;
        let _ = writeln!(text, "{n},{},{}", fmt_f64(st.median), fmt_f64(st.max));
        rows.push(json!({"n": n, "residual": to_value(&st)}));
    }
    if let Some(path) = csv {
        write_file(path, &text)?;
    }
    let doc = json!({
        "command": "limit-check",
        "params": to_value(&lp),
        "discriminant": to_value(&d),
        "discriminant_closed_form": to_value(&want),
        "discriminant_deviation": dev,
        "differential": to_value(&form),
        "classification": topology,
        "probes": {"radius": 2.0, "count": probes.len()},
        "rows": rows,
    });
    emit(out, doc, stdout)
}

fn classify_cmd(pair: &Pair, out: &Out, stdout: &mut dyn Write) -> CliResult<()> {
    let qd = NormalizedQD::new(pair.p1, pair.p2);
    let cls = classify(&qd);
    let subcase = match cls.topology {
        TopologicalType::OneCircleTwoStrips { .. } => {
            let sd = strip_diagram(&qd)?;
            Some(json!({"subcase": sd.subcase, "boundary_marker": sd.boundary_marker}))
        }
        _ => None,
    };
    emit(out, json!({"command": "classify", "input": to_value(&qd), "classification": to_value(&cls), "strip_subcase": subcase}), stdout)
}

fn spiral_cmd(pair: &Pair, out: &Out, stdout: &mut dyn Write) -> CliResult<()> {
    let qd = NormalizedQD::new(pair.p1, pair.p2);
    let (plus, minus) = spiral_behavior(&qd)?;
    let h = heights(&qd)?;
    emit(out, json!({"command": "spiral", "input": to_value(&qd), "plus_one": plus, "minus_one": minus, "heights": to_value(&h)}), stdout)
}

fn diagram_cmd(pair: &Pair, out: &Out, svg: &Option<PathBuf>, stdout: &mut dyn Write) -> CliResult<()> {
    let qd = NormalizedQD::new(pair.p1, pair.p2);
    let sd = strip_diagram(&qd)?;
    if let Some(path) = svg {
        write_file(path, &diagram_svg(&sd))?;
    }
    emit(out, json!({"command": "diagram", "input": to_value(&qd), "diagram": to_value(&sd)}), stdout)
}

fn geodesics_cmd(pair: &Pair, out: &Out, stdout: &mut dyn Write) -> CliResult<()> {
    let qd = NormalizedQD::new(pair.p1, pair.p2);
    let inv = geodesic_inventory(&qd)?;
    emit(out, json!({"command": "geodesics", "input": to_value(&qd), "inventory": to_value(&inv)}), stdout)
}

fn short_s_cmd(pair: &Pair, out: &Out, stdout: &mut dyn Write) -> CliResult<()> {
    let qd = NormalizedQD::new(pair.p1, pair.p2);
    let sv = short_s_values(&qd)?;
    emit(out, json!({"command": "short-s", "input": to_value(&qd), "s_values": to_value(&sv)}), stdout)
}

#[allow(clippy::too_many_arguments)]
fn trace_cmd(
    p1: Option<Complex64>,
    p2: Option<Complex64>,
    a: Option<Complex64>,
    b: Option<Complex64>,
    s: f64,
    budget: f64,
    out: &Out,
    csv: &Option<PathBuf>,
    svg: &Option<PathBuf>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(usage(format!("--budget must be positive, got {budget}")));
    }
    if !s.is_finite() {
        return Err(usage("--s must be finite"));
    }
    let (base, source) = match (p1, p2, a, b) {
        (Some(p1), Some(p2), None, None) => {
            let qd = NormalizedQD::new(p1, p2);
            (RationalQD::from_normalized(&qd), json!({"normalized": to_value(&qd)}))
        }
        (None, None, Some(a), Some(b)) => {
            let lp = LimitParams::new(a, b)?;
            match theorem2_differential(&lp) {
                Theorem2Form::Normalized { qd, scale } => {
                    (RationalQD::from_normalized(&qd).scaled(scale), json!({"limit": to_value(&lp), "normalized": to_value(&qd), "scale": to_value(&scale)}))
                }
                Theorem2Form::Degenerate { .. } => {
                    return Err(Error::DegenerateParameters("A + B + 2 = 0: the limiting differential is degenerate".into()).into())
                }
            }
        }
        _ => return Err(usage("give --p1 and --p2, or --A and --B")),
    };
    let cfg = TraceConfig { budget, ..TraceConfig::default() };
    let graph = trace_critical_with(&base.rotated(s), &cfg)?;
    if let Some(path) = csv {
        write_file(path, &graph_csv(&graph))?;
    }
    if let Some(path) = svg {
        write_file(path, &graph_svg(&graph))?;
    }
    emit(out, json!({"command": "trace", "differential": source, "s": s, "budget": budget, "graph": to_value(&graph)}), stdout)
}

#[allow(clippy::too_many_arguments)]
fn motherbody_cmd(
    a: Option<Complex64>,
    b: Option<Complex64>,
    p: Option<ComplexPolynomial>,
    q: Option<ComplexPolynomial>,
    r: Option<ComplexPolynomial>,
    tol: f64,
    budget: f64,
    out: &Out,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    check_tol(tol)?;
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(usage(format!("--budget must be positive, got {budget}")));
    }
    let eq = match (a, b, p, q, r) {
        (Some(a), Some(b), None, None, None) => QuadraticCauchyEquation::jacobi_limit(a, b),
        (None, None, Some(p), Some(q), Some(r)) => QuadraticCauchyEquation::new(p, q, r)?,
        _ => return Err(usage("give --A and --B, or all of --P, --Q, --R")),
    };
    let bp = branch_points(&eq, tol)?;
    let residues = match pole_residues(&eq, tol) {
        Ok(v) => to_value(&v),
        Err(Error::HigherOrderPole(z)) => json!({"error": "HigherOrderPole", "at": to_value(&z)}),
        Err(e) => return Err(e.into()),
    };
    let suff = sufficiency_report(&eq, tol)?;
    let dk0 = dk0_connectivity(&eq, &TraceConfig { budget, ..TraceConfig::default() })?;
    let doc = json!({
        "command": "motherbody",
        "equation": to_value(&eq),
        "discriminant": to_value(&discriminant(&eq)),
        "branch_points": to_value(&bp),
        "residues": residues,
        "expected_residue_sum": to_value(&expected_residue_sum(&eq)),
        "sufficiency": to_value(&suff),
        "dk0": to_value(&dk0),
    });
    emit(out, doc, stdout)
}

/// Generic pencil with monic `Q2` and `Q0` near 1, drawn from `seed`.
pub fn random_pencil(seed: u64) -> OperatorPencil {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cr = move || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    loop {
        let t = OperatorPencil::new(
            ComplexPolynomial::new(vec![cr(), cr(), Complex64::new(1.0, 0.0)]),
            ComplexPolynomial::new(vec![cr(), cr()]),
            ComplexPolynomial::new(vec![cr(), cr()]),
            1.0 + 0.5 * cr(),
            cr(),
            cr(),
        )
        .expect("Q2 has degree 2 and Q0 is near 1");
        if generic_type_check(&t, 1e-9).generic {
            return t;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn exsolve_cmd(
    a: Option<Complex64>,
    b: Option<Complex64>,
    seed: u64,
    degrees: &[usize],
    tol: f64,
    out: &Out,
    csv: &Option<PathBuf>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    check_tol(tol)?;
    let (t, source) = match (a, b) {
        (Some(a), Some(b)) => (OperatorPencil::jacobi(a, b)?, json!({"jacobi": {"A": to_value(&a), "B": to_value(&b)}})),
        (None, None) => (random_pencil(seed), json!({"seed": seed})),
        _ => return Err(usage("give both --A and --B, or neither (random pencil from --seed)")),
    };
    if degrees.iter().any(|&n| n == 0) {
        return Err(usage("--degrees must be positive"));
    }
    let eig = degrees.iter().map(|&n| eigenvalues_for_degree(&t, n).map(|e| to_value(&e))).collect::<crate::Result<Vec<_>>>()?;
    let probes = circle_probes(4.0, 64);
    let mut families = Vec::new();
    let mut text = String::from("family,");
    for which in [1u8, 2] {
        let rep = gen_cauchy_residual(&t, which, degrees, &probes, tol)?;
        let body = gen_cauchy_csv(&rep);
        for (k, line) in body.lines().enumerate() {
            if k == 0 {
                if which == 1 {
                    let _ = writeln!(text, "{line}");
                }
            } else {
                let _ = writeln!(text, "{which},{line}");
            }
        }
        families.push(to_value(&rep));
    }
    if let Some(path) = csv {
        write_file(path, &text)?;
    }
    let doc = json!({
        "command": "exsolve",
        "pencil": to_value(&t),
        "source": source,
        "characteristic": to_value(&characteristic_poly(&t)),
        "generic": to_value(&generic_type_check(&t, 1e-12)),
        "eigenvalues": eig,
        "probes": {"radius": 4.0, "count": probes.len()},
        "families": families,
    });
    emit(out, doc, stdout)
}

struct Cell {
    p2: Complex64,
    region: Option<String>,
    region_boundary: bool,
    topology: String,
    subcase: Option<char>,
    boundary: bool,
    failure: Option<(String, String)>,
}

fn sweep_cell(p1: Complex64, p2: Complex64) -> Cell {
    let qd = NormalizedQD::new(p1, p2);
    let cls = classify(&qd);
    let mut cell = Cell {
        p2,
        region: None,
        region_boundary: false,
        topology: cls.topology.name().to_string(),
        subcase: None,
        boundary: cls.boundary_marker,
        failure: None,
    };
    if p1.im != 0.0 {
        match region_of(p1, p2) {
            Ok(r) => {
                cell.region = Some(to_value(&r.label).as_str().unwrap_or_default().to_string());
                cell.region_boundary = r.boundary_marker;
            }
            Err(e) => cell.failure = Some((e.name().into(), e.to_string())),
        }
    }
    if let TopologicalType::OneCircleTwoStrips { orientation, .. } = cls.topology {
        cell.topology = format!("{}_{}", cell.topology, to_value(&orientation).as_str().unwrap_or_default());
        match strip_diagram(&qd) {
            Ok(sd) => {
                cell.subcase = Some(sd.subcase.letter());
                cell.boundary |= sd.boundary_marker;
            }
            Err(e) => cell.failure = Some((e.name().into(), e.to_string())),
        }
    }
    cell
}

fn color(key: &str) -> &'static str {
    match key {
        "E1+" => "#4e79a7",
        "E1-" => "#f28e2b",
        "E-1+" => "#59a14f",
        "E-1-" => "#e15759",
        _ => {
            const PALETTE: [&str; 6] = ["#76b7b2", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];
            PALETTE[key.bytes().map(|b| b as usize).sum::<usize>() % PALETTE.len()]
        }
    }
}

fn sweep_svg(p1: Complex64, grid: [f64; 4], res: usize, cells: &[Cell]) -> String {
    let size = 600.0;
    let (dx, dy) = ((grid[1] - grid[0]) / res as f64, (grid[3] - grid[2]) / res as f64);
    let (kx, ky) = (size / (grid[1] - grid[0]), size / (grid[3] - grid[2]));
    let x = |re: f64| (re - grid[0]) * kx;
    let y = |im: f64| (grid[3] - im) * ky;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    for c in cells {
        let key = c.region.as_deref().unwrap_or(&c.topology);
        let fill = if c.boundary || c.region_boundary || c.failure.is_some() { "#000000" } else { color(key) };
        let _ = writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
            x(c.p2.re - 0.5 * dx),
            y(c.p2.im + 0.5 * dy),
            dx * kx,
            dy * ky
        );
    }
    for (z, mark) in [(p1, "p1"), (Complex64::new(1.0, 0.0), "+1"), (Complex64::new(-1.0, 0.0), "-1")] {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="white" stroke="black"/>"#, x(z.re), y(z.im));
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" font-size="12">{mark}</text>"#, x(z.re) + 6.0, y(z.im) - 6.0);
    }
    s.push_str("</svg>\n");
    s
}

#[allow(clippy::too_many_arguments)]
fn sweep_cmd(
    p1: Complex64,
    grid: [f64; 4],
    res: usize,
    workers: usize,
    out: &Out,
    csv: &Option<PathBuf>,
    svg: &Option<PathBuf>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    if res == 0 || workers == 0 {
        return Err(usage("--res and --workers must be positive"));
    }
    let points: Vec<Complex64> = (0..res * res)
        .map(|k| {
            let (i, j) = (k % res, k / res);
            Complex64::new(
                grid[0] + (i as f64 + 0.5) * (grid[1] - grid[0]) / res as f64,
                grid[2] + (j as f64 + 0.5) * (grid[3] - grid[2]) / res as f64,
            )
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| usage(e.to_string()))?;
    let cells: Vec<Cell> = pool.install(|| points.par_iter().map(|&p2| sweep_cell(p1, p2)).collect());
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut text = String::from("re,im,region,topology,subcase,boundary\n");
    let mut rows = Vec::with_capacity(cells.len());
    for c in &cells {
        let key = match c.subcase {
            Some(l) => format!("{}_{l}", c.topology),
            None => c.topology.clone(),
        };
        *counts.entry(key).or_default() += 1;
        if let Some((name, msg)) = &c.failure {
            failures.push(json!({"p2": to_value(&c.p2), "error": name, "message": msg}));
        }
        let sub = c.subcase.map(String::from).unwrap_or_default();
        let region = c.region.clone().unwrap_or_default();
        let _ = writeln!(text, "{},{},{region},{},{sub},{}", fmt_f64(c.p2.re), fmt_f64(c.p2.im), c.topology, c.boundary || c.region_boundary);
        rows.push(json!({
            "p2": to_value(&c.p2),
            "region": c.region,
            "topology": c.topology,
            "subcase": c.subcase.map(String::from),
            "boundary_marker": c.boundary || c.region_boundary,
        }));
    }
    if let Some(path) = csv {
        write_file(path, &text)?;
    }
    if let Some(path) = svg {
        write_file(path, &sweep_svg(p1, grid, res, &cells))?;
    }
    let n_fail = failures.len();
    let doc = json!({
        "command": "sweep",
        "p1": to_value(&p1),
        "grid": grid,
        "res": res,
        "counts": counts,
        "failures": failures,
        "cells": rows,
    });
    emit(out, doc, stdout)?;
    if n_fail > 0 {
        return Err(Error::NotApplicable(format!("{n_fail} sweep cells failed; see the failures list")).into());
    }
    Ok(())
}

fn dispatch(cmd: Cmd, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Cmd::JacobiRoots { n, alpha, beta, a, b, degrees, tol, out, csv } => {
            jacobi_roots(n, alpha, beta, a, b, degrees, tol, &out, &csv, stdout)
        }
        Cmd::LimitCheck { a, b, degrees, tol, out, csv } => limit_check(a, b, &degrees, tol, &out, &csv, stdout),
        Cmd::Classify { pair, out } => classify_cmd(&pair, &out, stdout),
        Cmd::Spiral { pair, out } => spiral_cmd(&pair, &out, stdout),
        Cmd::Diagram { pair, out, svg } => diagram_cmd(&pair, &out, &svg, stdout),
        Cmd::Geodesics { pair, out } => geodesics_cmd(&pair, &out, stdout),
        Cmd::ShortS { pair, out } => short_s_cmd(&pair, &out, stdout),
        Cmd::Trace { p1, p2, a, b, s, budget, out, csv, svg } => trace_cmd(p1, p2, a, b, s, budget, &out, &csv, &svg, stdout),
        Cmd::Motherbody { a, b, p, q, r, tol, budget, out } => motherbody_cmd(a, b, p, q, r, tol, budget, &out, stdout),
        Cmd::Exsolve { a, b, seed, degrees, tol, out, csv } => exsolve_cmd(a, b, seed, &degrees, tol, &out, &csv, stdout),
        Cmd::Sweep { p1, grid, res, workers, out, csv, svg } => sweep_cmd(p1, grid, res, workers, &out, &csv, &svg, stdout),
    }
}

/// Runs the command line `args` (program name first), writing results to
/// `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(CliError::Module(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
