"""Smoke test for the jacobiqd_py extension.

Build and place the module next to this file first:

    cargo build -p jacobiqd-py --features extension-module --release
    cp target/release/libjacobiqd_py.so python/jacobiqd_py.so
    python3 python/smoke_test.py
"""

import cmath
import math

import numpy as np
from scipy.special import eval_jacobi

import jacobiqd_py as jq


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def jacobi_against_scipy():
    for n, a, b in [(5, 0.0, 0.0), (9, 1.5, -0.5), (14, 3.0, 2.0)]:
        for x in np.linspace(-0.95, 0.95, 7):
            want = eval_jacobi(n, a, b, x)
            close(jq.jacobi_eval(n, a, b, complex(x)), want, 1e-11 * max(1.0, abs(want)))
    nodes, _ = np.polynomial.legendre.leggauss(12)
    roots = sorted(jq.jacobi_roots(12, 0, 0), key=lambda z: z.real)
    for r, x in zip(roots, nodes):
        close(r, x, 1e-12)
    coeffs = jq.jacobi_coeffs(2, 0, 0)
    for c, w in zip(coeffs, [-0.5, 0.0, 1.5]):
        close(c, w, 1e-15)


def limit_field():
    # D(z) vanishes at the normalized zeros
    form = jq.theorem2_differential(1, 1)
    assert form["form"] == "normalized"
    p1 = complex(*form["qd"]["p1"])
    dz = jq.limit_discriminant(1, 1)
    close(sum(c * p1 ** k for k, c in enumerate(dz)), 0, 1e-10)
    close(abs(p1.real), math.sqrt(3) / 2, 1e-12)
    meds = [jq.eq12_residual(0.5, 0.8, n)["median"] for n in (20, 40)]
    assert meds[1] < meds[0], meds


def classification():
    qd = jq.NormalizedQD(0.5, -0.5)
    assert qd.is_generic()
    assert qd.classify()["variant"] == "ThreeCircles_a"
    two = jq.NormalizedQD(2j, -0.5 + 0.5j)
    assert two.classify()["orientation"] == "b2"
    assert two.subcase_by_inequalities()["subcase"] == "g"
    assert two.geodesic_inventory()["counts"] == [4, 3]
    close(two.strip_diagram()["x2"], -0.0389, 1e-3)
    f = two.f_p2_closed_form()
    g = two.f_numeric(two.p1, two.p2)
    assert two.lattice_deviation(g, f) < 1e-8
    graph = two.trace()
    assert all(isinstance(p, complex) for arc in graph["arcs"] for p in arc["points"])
    conc = jq.NormalizedQD(0.4 + 1.3j, -2 - 0.6j).concordance()
    assert conc["pattern_match"] and conc["spiral_match"]
    assert "NormalizedQD" in repr(qd)


def pencils():
    pen = jq.OperatorPencil.jacobi(0, 0)
    assert pen.is_generic()
    lam = pen.eigenvalues(10)
    assert any(abs(l - 10) < 1e-9 for l in lam), lam
    want = sorted(np.polynomial.legendre.leggauss(6)[0])
    got = sorted(pen.eigenpolynomial_roots(6), key=lambda z: z.real)
    for r, x in zip(got, want):
        close(r, x, 1e-12)
    rows = pen.gen_cauchy_residual(1, [10, 20])["rows"]
    assert rows[1]["residual"]["median"] < rows[0]["residual"]["median"]


def motherbody():
    rep = jq.motherbody_report([1, 0, -1], [0, -2], [3])
    assert rep["sufficiency"]["simple_poles"]
    assert len(rep["branch_points"]["points"]) == 2


def errors():
    try:
        jq.limit_discriminant(-0.5, -0.5)
    except jq.JacobiQDError as e:
        assert "DegenerateParameters" in str(e)
    else:
        raise AssertionError("expected JacobiQDError")


if __name__ == "__main__":
    for t in (jacobi_against_scipy, limit_field, classification, pencils, motherbody, errors):
        t()
        print("ok", t.__name__)
