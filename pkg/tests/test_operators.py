import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import SPHERE, annulus_complex, bands_complex, circle_complex
from schiffer import bases as bs
from schiffer import operators as O
from schiffer.analysis import disk_automorphism
from schiffer.geometry import CurveSpec, GeometryError, build_complex, mobius_transform


@pytest.fixture(scope="module")
def circle_ops():
    cx = circle_complex()
    return {name: O.assemble_T(cx, j, k, N=16) for name, (j, k) in
            {"T11": (1, 1), "T12": (1, 2), "T21": (2, 1), "T22": (2, 2)}.items()}


@pytest.fixture(scope="module")
def band_ops():
    cx = bands_complex()
    return {"S1": O.assemble_S(cx, 1, N=4), "S2": O.assemble_S(cx, 2, N=4),
            "R1": O.assemble_R(cx, 1, N=4), "R2": O.assemble_R(cx, 2, N=4),
            "T12": O.assemble_T(cx, 1, 2, N=4)}


# ---------------------------------------------------------------- T on the circle

def test_circle_T12_graded_bijection(circle_ops):
    # polar-series oracle: conj(w^n dw) maps to z^-(n+2) dz with unit coefficient
    T12 = circle_ops["T12"]
    assert T12.domain.labels() == [("power", n) for n in range(16)]
    assert T12.codomain.labels() == [("power", -n - 2) for n in range(16)]
    assert np.max(np.abs(T12.entries - np.eye(16))) < 1e-8


def test_circle_T11_vanishes(circle_ops):
    assert np.max(np.abs(circle_ops["T11"].entries)) < 1e-8
    assert np.max(np.abs(circle_ops["T22"].entries)) < 1e-8


def test_circle_singular_values_are_one(circle_ops):
    assert np.allclose(circle_ops["T12"].singular_values(), 1, atol=1e-10)


def test_quadrature_route_cross_check():
    cx = circle_complex()
    ref = O.assemble_T(cx, 1, 2, N=4)
    quad = O.assemble_T(cx, 1, 2, N=4, route="quadrature")
    assert np.max(np.abs(quad.entries - ref.entries)) < 1e-4


@pytest.mark.slow
def test_pv_schemes_agree_on_disk():
    cx = circle_complex()
    des = O.assemble_T(cx, 1, 1, N=3, route="quadrature", pv="desingularize")
    exc = O.assemble_T(cx, 1, 1, N=3, route="quadrature", pv="exclusion")
    assert np.max(np.abs(des.entries - exc.entries)) < 1e-5


def test_assemble_T_rejects_wrong_chirality():
    cx = circle_complex()
    hol = bs.make_basis(cx, 1, "holomorphic", 3)
    with pytest.raises(ValueError):
        O.assemble_T(cx, 1, 2, dom=hol)
    with pytest.raises(ValueError):
        O.assemble_T(cx, 1, 2, N=3, route="nonsense")


def test_boundary_route_needs_sphere(bands_cx):
    with pytest.raises(GeometryError):
        O.assemble_T(bands_cx, 1, 2, N=2, route="boundary")


# ---------------------------------------------------------------- S and R

def test_sphere_S_and_R_empty(circle_cx):
    S = O.assemble_S(circle_cx, 1, N=3)
    R = O.assemble_R(circle_cx, 1, N=3)
    assert S.shape == (0, 3) and R.shape == (3, 0)


def test_band_S_area_ratio(band_ops):
    S1 = band_ops["S1"]
    zero = S1.domain.labels().index(("fourier", 0))
    assert abs(S1.entries[0, zero] - 0.5) < 1e-12
    others = np.delete(S1.entries[0], zero)
    assert np.max(np.abs(others)) < 1e-12


def test_band_R_restricts_dz(band_ops):
    R1 = band_ops["R1"]
    zero = R1.codomain.labels().index(("fourier", 0))
    expected = np.zeros(len(R1.codomain))
    expected[zero] = 1
    assert np.allclose(R1.entries[:, 0], expected, atol=1e-12)
    assert R1.singular_values()[0] > 0


def test_reproducing_sum(band_ops):
    total = (band_ops["S1"] @ band_ops["R1"]).entries + (band_ops["S2"] @ band_ops["R2"]).entries
    assert abs(total[0, 0] - 1) < 1e-8


def test_S1R1_applied_to_dz(band_ops):
    dz = bs.FormVector(band_ops["R1"].domain, [1.0])
    out = O.apply(band_ops["S1"] @ band_ops["R1"], dz)
    assert abs(out.coefficients[0] - 0.5) < 1e-12


def test_band_T12_on_harmonic_measure(band_ops):
    # omega = y on the band 0 < y < 1: dbar omega = (i/2) dz-bar and
    # R2 S1 d omega = (-i / (2 Im tau)) dz
    T12 = band_ops["T12"]
    dom = T12.domain
    v = np.zeros(len(dom), dtype=complex)
    v[dom.labels().index(("fourier", 0))] = 0.5j
    out = O.apply(T12, bs.FormVector(dom, v))
    expected = np.zeros(len(T12.codomain), dtype=complex)
    expected[T12.codomain.labels().index(("fourier", 0))] = -1j / 4
    assert np.allclose(out.coefficients, expected, atol=1e-10)


# ---------------------------------------------------------------- adjoints

def test_adjoint_T12_is_conj_T21(circle_ops):
    A = O.adjoint(circle_ops["T12"])
    C = O.conjugate(circle_ops["T21"])
    assert O.weighted_norm(A.entries - C.entries, A.gram_dom, A.gram_cod) < 1e-6


def test_adjoint_R_is_S(band_ops):
    A = O.adjoint(band_ops["R1"])
    S1 = band_ops["S1"]
    assert O.weighted_norm(A.entries - S1.entries, S1.gram_dom, S1.gram_cod) < 1e-6


def test_adjoint_needs_grams(circle_cx):
    b = bs.make_basis(circle_cx, 1, N=2)
    with pytest.raises(ValueError):
        O.adjoint(O.OperatorMatrix("X", b, b, np.eye(2)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_adjoint_is_involution(seed):
    rng = np.random.default_rng(seed)
    cx = annulus_complex()
    dom = bs.make_basis(cx, 1, "antiholomorphic", 2)
    cod = bs.make_basis(cx, 1, "holomorphic", 1)
    gd, gc = bs.gram(dom), bs.gram(cod)
    M = rng.normal(size=(len(cod), len(dom))) + 1j * rng.normal(size=(len(cod), len(dom)))
    op = O.OperatorMatrix("X", dom, cod, M, gd, gc)
    back = O.adjoint(O.adjoint(op))
    assert np.allclose(back.entries, M, atol=1e-10 * np.abs(M).max())


def test_identity_and_apply(circle_cx):
    b = bs.make_basis(circle_cx, 1, N=3)
    v = bs.FormVector(b, [1, 2j, -3])
    assert np.array_equal(O.apply(O.identity(b), v).coefficients, v.coefficients)
    with pytest.raises(ValueError):
        O.apply(O.identity(b), bs.FormVector(b.conjugate(), [1, 0, 0]))


def test_operator_shape_checked(circle_cx):
    b = bs.make_basis(circle_cx, 1, N=3)
    with pytest.raises(ValueError):
        O.OperatorMatrix("X", b, b, np.eye(2))


# ---------------------------------------------------------------- conformal invariance

def test_disk_automorphism_preserves_singular_values():
    cx = circle_complex()
    m = disk_automorphism(0.3 + 0.2j, rotation=0.4)
    s0 = O.assemble_T(cx, 1, 2, N=12).singular_values()
    s1 = O.assemble_T(mobius_transform(cx, m), 1, 2, N=12).singular_values()
    assert np.max(np.abs(s0 - s1)) < 1e-6


def test_mobius_preserves_singular_values_on_ellipse():
    cx = build_complex(SPHERE, [CurveSpec("ellipse", semi_axes=(1.5, 1.0))])
    m = disk_automorphism(0.2 - 0.1j)
    s0 = O.assemble_T(cx, 1, 2, N=8).singular_values()
    s1 = O.assemble_T(mobius_transform(cx, m), 1, 2, N=8).singular_values()
    assert np.max(np.abs(s0 - s1)) < 1e-6


# ---------------------------------------------------------------- dumps

def test_matrix_json_round_trip(circle_ops):
    T = circle_ops["T12"]
    text = O.matrix_to_json(T)
    d = json.loads(text)
    assert d["shape"] == [16, 16] and d["name"] == "T(1,2)"
    assert np.array_equal(O.matrix_from_json(text), T.entries)


def test_matrix_csv_header(circle_ops):
    lines = O.matrix_to_csv(circle_ops["T12"]).splitlines()
    assert lines[0] == "row,col,re,im"
    assert len(lines) == 1 + 16 * 16
    r, c, re, im = lines[1].split(",")
    assert (int(r), int(c)) == (0, 0) and abs(float(re) - 1) < 1e-8
