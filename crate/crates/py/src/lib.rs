//! Python bindings. Structured results come back as plain dicts and lists,
//! built from the same serde representation the CLI writes.

use jacobiqd::exsolve::{self, OperatorPencil};
use jacobiqd::geodesy;
use jacobiqd::jacobi::{jacobi_poly, JacobiParams, ParamSequence};
use jacobiqd::limitfield::{self, LimitParams};
use jacobiqd::motherbody::{self, QuadraticCauchyEquation};
use jacobiqd::poly::ComplexPolynomial;
use jacobiqd::qdclass::{self, NormalizedQD};
use jacobiqd::tracer::{self, RationalQD, TraceConfig};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyModule;

create_exception!(jacobiqd_py, JacobiQDError, PyException, "Library error; the message starts with the error name.");

fn err(e: jacobiqd::Error) -> PyErr {
    JacobiQDError::new_err(e.to_string())
}

/// Converts any serializable value into Python objects through `json.loads`.
fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| JacobiQDError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// The normalized differential `-(z-p1)(z-p2)/(z^2-1)^2 dz^2`.
#[pyclass(name = "NormalizedQD", frozen)]
struct PyNormalizedQD {
    inner: NormalizedQD,
}

#[pymethods]
impl PyNormalizedQD {
    #[new]
    fn new(p1: Complex64, p2: Complex64) -> Self {
        PyNormalizedQD { inner: NormalizedQD::new(p1, p2) }
    }

    #[getter]
    fn p1(&self) -> Complex64 {
        self.inner.p1
    }

    #[getter]
    fn p2(&self) -> Complex64 {
        self.inner.p2
    }

    fn is_generic(&self) -> bool {
        self.inner.is_generic()
    }

    /// Topological type with heights, spiral behaviour and regions.
    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &qdclass::classify(&self.inner))
    }

    /// Local behaviour at `+1` and `-1`: "circle", "radial", "ccw" or "cw".
    fn spiral_behavior<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &qdclass::spiral_behavior(&self.inner).map_err(err)?)
    }

    fn strip_diagram<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &geodesy::strip_diagram(&self.inner).map_err(err)?)
    }

    fn subcase_by_inequalities<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &geodesy::subcase_by_inequalities(&self.inner).map_err(err)?)
    }

    fn geodesic_inventory<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &geodesy::geodesic_inventory(&self.inner).map_err(err)?)
    }

    fn short_s_values<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &geodesy::short_s_values(&self.inner).map_err(err)?)
    }

    fn f_p2_closed_form(&self) -> PyResult<Complex64> {
        geodesy::f_p2_closed_form(&self.inner).map_err(err)
    }

    /// `(1/2pi) int sqrt(Q) dz` along the polyline `z_from, waypoints.., z_to`.
    #[pyo3(signature = (z_from, z_to, waypoints = Vec::new()))]
    fn f_numeric(&self, z_from: Complex64, z_to: Complex64, waypoints: Vec<Complex64>) -> PyResult<Complex64> {
        geodesy::f_numeric(&self.inner, z_from, z_to, &waypoints).map(|f| f.value).map_err(err)
    }

    fn lattice_deviation(&self, v: Complex64, target: Complex64) -> PyResult<f64> {
        geodesy::lattice_deviation(&self.inner, v, target).map_err(err)
    }

    /// Critical graph of `e^{is} Q dz^2`; arcs carry their polylines as
    /// lists of complex numbers.
    #[pyo3(signature = (s = 0.0, budget = 50.0))]
    fn trace<'py>(&self, py: Python<'py>, s: f64, budget: f64) -> PyResult<Bound<'py, PyAny>> {
        let cfg = TraceConfig { budget, ..TraceConfig::default() };
        let g = tracer::trace_critical_with(&RationalQD::from_normalized(&self.inner).rotated(s), &cfg).map_err(err)?;
        let out = to_py(py, &g)?;
        let arcs = out.get_item("arcs")?;
        for (k, a) in g.arcs.iter().enumerate() {
            arcs.get_item(k)?.set_item("points", a.points.clone())?;
        }
        Ok(out)
    }

    /// Traced ray ends of the unrotated differential against the classifier.
    #[pyo3(signature = (budget = 500.0))]
    fn concordance<'py>(&self, py: Python<'py>, budget: f64) -> PyResult<Bound<'py, PyAny>> {
        let cfg = TraceConfig { budget, ..TraceConfig::default() };
        let g = tracer::trace_critical_with(&RationalQD::from_normalized(&self.inner), &cfg).map_err(err)?;
        to_py(py, &tracer::topology_concordance(&self.inner, &g).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("NormalizedQD(p1={}, p2={})", self.inner.p1, self.inner.p2)
    }
}

/// `T_lambda = Q2 D^2 + (Q1 lambda + P1) D + Q0 (lambda^2 + p lambda + q)`.
#[pyclass(name = "OperatorPencil", frozen)]
struct PyOperatorPencil {
    inner: OperatorPencil,
}

fn poly(coeffs: Vec<Complex64>) -> ComplexPolynomial {
    ComplexPolynomial::new(coeffs)
}

#[pymethods]
impl PyOperatorPencil {
    /// Polynomials are ascending coefficient lists.
    #[new]
    fn new(q2: Vec<Complex64>, q1: Vec<Complex64>, p1: Vec<Complex64>, q0: Complex64, p: Complex64, q: Complex64) -> PyResult<Self> {
        Ok(PyOperatorPencil { inner: OperatorPencil::new(poly(q2), poly(q1), poly(p1), q0, p, q).map_err(err)? })
    }

    /// The embedding whose degree-n eigenpolynomial at `lambda = n` is `P_n^{(An, Bn)}`.
    #[staticmethod]
    #[pyo3(name = "jacobi")]
    fn jacobi_pencil(a: Complex64, b: Complex64) -> PyResult<Self> {
        Ok(PyOperatorPencil { inner: OperatorPencil::jacobi(a, b).map_err(err)? })
    }

    /// Characteristic roots, `alpha_1` first.
    fn characteristic_roots(&self) -> (Complex64, Complex64) {
        let r = exsolve::characteristic_poly(&self.inner).roots;
        (r[0], r[1])
    }

    fn is_generic(&self) -> bool {
        exsolve::generic_type_check(&self.inner, 1e-12).generic
    }

    fn eigenvalues(&self, n: usize) -> PyResult<(Complex64, Complex64)> {
        let e = exsolve::eigenvalues_for_degree(&self.inner, n).map_err(err)?;
        Ok((e.lambda[0], e.lambda[1]))
    }

    /// Monic eigenpolynomial coefficients, ascending.
    #[pyo3(signature = (n, which = 1, tol = 1e-12))]
    fn eigenpolynomial(&self, n: usize, which: u8, tol: f64) -> PyResult<Vec<Complex64>> {
        Ok(exsolve::eigenpolynomial(&self.inner, n, which, tol).map_err(err)?.poly.coeffs().to_vec())
    }

    #[pyo3(signature = (n, which = 1, tol = 1e-12))]
    fn eigenpolynomial_roots(&self, n: usize, which: u8, tol: f64) -> PyResult<Vec<Complex64>> {
        let ep = exsolve::eigenpolynomial(&self.inner, n, which, tol).map_err(err)?;
        Ok(exsolve::eigenpolynomial_roots(&self.inner, &ep).map_err(err)?.0.roots().to_vec())
    }

    #[pyo3(signature = (which, degrees, radius = 4.0, probes = 64, tol = 1e-12))]
    fn gen_cauchy_residual<'py>(&self, py: Python<'py>, which: u8, degrees: Vec<usize>, radius: f64, probes: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let pr = limitfield::circle_probes(radius, probes);
        to_py(py, &exsolve::gen_cauchy_residual(&self.inner, which, &degrees, &pr, tol).map_err(err)?)
    }
}

/// Zeros of `P_n^{(alpha, beta)}`.
#[pyfunction]
#[pyo3(signature = (n, alpha, beta, tol = 1e-12))]
fn jacobi_roots(n: usize, alpha: Complex64, beta: Complex64, tol: f64) -> PyResult<Vec<Complex64>> {
    Ok(jacobi_poly(&JacobiParams::new(n, alpha, beta)).roots(tol).map_err(err)?.roots().to_vec())
}

/// `P_n^{(alpha, beta)}(z)`.
#[pyfunction]
fn jacobi_eval(n: usize, alpha: Complex64, beta: Complex64, z: Complex64) -> Complex64 {
    jacobi_poly(&JacobiParams::new(n, alpha, beta)).evaluate(z)
}

/// Monomial coefficients of `P_n^{(alpha, beta)}`, ascending.
#[pyfunction]
fn jacobi_coeffs(n: usize, alpha: Complex64, beta: Complex64) -> Vec<Complex64> {
    jacobi_poly(&JacobiParams::new(n, alpha, beta)).poly().coeffs().to_vec()
}

/// Coefficients of `D(z)` for the limit quadratic, ascending.
#[pyfunction]
fn limit_discriminant(a: Complex64, b: Complex64) -> PyResult<Vec<Complex64>> {
    let lp = LimitParams::new(a, b).map_err(err)?;
    Ok(limitfield::limit_discriminant(&lp).coeffs().to_vec())
}

/// Statistics of `|residual|` of the limit quadratic for the zeros of
/// `P_n^{(An, Bn)}` at `probes` points on `|z| = radius`.
#[pyfunction]
#[pyo3(signature = (a, b, n, radius = 2.0, probes = 64))]
fn eq12_residual<'py>(py: Python<'py>, a: Complex64, b: Complex64, n: usize, radius: f64, probes: usize) -> PyResult<Bound<'py, PyAny>> {
    let lp = LimitParams::new(a, b).map_err(err)?;
    let mu = jacobi_poly(&ParamSequence::new(a, b).params(n)).roots(1e-12).map_err(err)?;
    to_py(py, &limitfield::eq12_residual(&lp, &mu, &limitfield::circle_probes(radius, probes)).map_err(err)?)
}

/// The limiting differential in normalized form, as a dict.
#[pyfunction]
fn theorem2_differential<'py>(py: Python<'py>, a: Complex64, b: Complex64) -> PyResult<Bound<'py, PyAny>> {
    let lp = LimitParams::new(a, b).map_err(err)?;
    to_py(py, &limitfield::theorem2_differential(&lp))
}

/// Branch points, residues, sufficiency and DK0 connectivity for
/// `P C^2 + Q C + R = 0` (coefficient lists ascending).
#[pyfunction]
#[pyo3(signature = (p, q, r, tol = 1e-9, budget = 50.0))]
fn motherbody_report<'py>(py: Python<'py>, p: Vec<Complex64>, q: Vec<Complex64>, r: Vec<Complex64>, tol: f64, budget: f64) -> PyResult<Bound<'py, PyAny>> {
    let eq = QuadraticCauchyEquation::new(poly(p), poly(q), poly(r)).map_err(err)?;
    let report = serde_json::json!({
        "branch_points": motherbody::branch_points(&eq, tol).map_err(err)?,
        "sufficiency": motherbody::sufficiency_report(&eq, tol).map_err(err)?,
        "dk0": motherbody::dk0_connectivity(&eq, &TraceConfig { budget, ..TraceConfig::default() }).map_err(err)?,
    });
    to_py(py, &report)
}

#[pymodule]
fn jacobiqd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("JacobiQDError", m.py().get_type::<JacobiQDError>())?;
    m.add_class::<PyNormalizedQD>()?;
    m.add_class::<PyOperatorPencil>()?;
    m.add_function(wrap_pyfunction!(jacobi_roots, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_eval, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(limit_discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(eq12_residual, m)?)?;
    m.add_function(wrap_pyfunction!(theorem2_differential, m)?)?;
    m.add_function(wrap_pyfunction!(motherbody_report, m)?)?;
    Ok(())
}
