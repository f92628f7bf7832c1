import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import annulus_complex, bands_complex, circle_complex
from schiffer import analysis as an
from schiffer import bases as bs
from schiffer import jump as J
from schiffer import operators as O
from schiffer.geometry import GeometryError

Z_IN = np.array([0.3 + 0.2j, -0.5j, 0.1 - 0.6j])
Z_OUT = np.array([1.5 + 0.5j, -2j, 3.0])


# ---------------------------------------------------------------- Cauchy-Royden examples

def test_holomorphic_data_reproduced_inside(circle_cx):
    h = J.harmonic_from_spec(circle_cx, 1, {"hol": {"3": 1}})
    assert np.max(np.abs(J.cauchy_royden(h, Z_IN, side=1).values - Z_IN ** 3)) < 1e-13
    assert np.max(np.abs(J.cauchy_royden(h, Z_OUT, side=2).values)) < 1e-13


def test_constant_with_pole_inside(circle_cx):
    one = J.harmonic_from_spec(circle_cx, 1, {"const": 1})
    assert np.max(np.abs(J.cauchy_royden(one, Z_IN, q=0.1, side=1).values)) < 1e-13


@pytest.mark.parametrize("method", ["series", "contour", "levels"])
def test_conjugate_coordinate_jump(circle_cx, method):
    # h = conj(z) on the disk: J12 h = -1/z outside, J11 h = 0 inside (q at infinity)
    zb = J.harmonic_from_spec(circle_cx, 1, {"anti": {"1": 1}})
    out = J.cauchy_royden(zb, Z_OUT, side=2, method=method).values
    inside = J.cauchy_royden(zb, Z_IN, side=1, method=method).values
    assert np.max(np.abs(out + 1 / Z_OUT)) < 1e-10
    assert np.max(np.abs(inside)) < 1e-10


def test_kernel_sign_convention(circle_cx):
    # d(J12 conj z) = + T12(d conj z); the opposite sign misses by the full norm
    zb = J.harmonic_from_spec(circle_cx, 1, {"anti": {"1": 1}})
    Jf = J.cauchy_royden(zb, Z_OUT, side=2)
    dJ = Jf.derivatives(Z_OUT)[0]
    T12 = O.assemble_T(circle_cx, 1, 2, N=4)
    img = O.apply(T12, bs.FormVector(T12.domain, [1, 0, 0, 0]))
    Tz = img.sample(Z_OUT, 0)[0]
    assert np.max(np.abs(dJ - Tz)) < 1e-8
    assert np.max(np.abs(dJ + Tz)) > 0.1


def test_unknown_method_rejected(circle_cx):
    h = J.harmonic_from_spec(circle_cx, 1, {"hol": {"1": 1}})
    with pytest.raises(ValueError):
        J.cauchy_royden(h, Z_IN, method="nope")


def test_default_q():
    assert np.isinf(J.default_q(circle_complex()))
    assert J.default_q(bands_complex()) == 0.5 + 1.5j


@pytest.mark.parametrize("cx_fn, pts", [(circle_complex, Z_OUT), (bands_complex, np.array([0.3 + 1.4j, 0.7 + 1.6j]))])
def test_jump_field_harmonic(cx_fn, pts):
    cx = cx_fn()
    f = J.fourier_test_function(cx, 1, 8)
    Jf = J.cauchy_royden(f, pts, side=2)
    assert np.max(np.abs(Jf.laplacian(pts))) < 1e-5


# ---------------------------------------------------------------- overfare

def test_overfare_disk_to_exterior(circle_cx):
    g = J.overfare_circle(J.harmonic_from_spec(circle_cx, 1, {"hol": {"2": 1}}))
    assert g.piece_id == 2
    assert np.max(np.abs(g.value(Z_OUT, 0) - np.conj(Z_OUT) ** -2)) < 1e-13


def test_overfare_constants(circle_cx):
    g = J.overfare_circle(J.harmonic_from_spec(circle_cx, 1, {"const": 1}))
    assert np.allclose(g.value(Z_OUT, 0), 1, atol=1e-14)


def test_overfare_band_measure(bands_cx):
    hms = bs.harmonic_measures(bands_cx, 1)
    idx = [i for i, m in enumerate(hms.measures) if abs(m.value(0.2 + 1j) - 1) < 1e-12][0]
    g = J.overfare_circle(J.measure_function(hms, idx))
    y = np.array([1.2, 1.5, 1.9])
    # two-point boundary solve on the complementary band 1 < y < 2
    assert np.allclose(g.value(0.3 + 1j * y, 0), 2 - y, atol=1e-13)


def test_overfare_rejects_unresolved_data(circle_cx):
    h = J.harmonic_from_spec(circle_cx, 1, {"hol": {"200": 1}})
    with pytest.raises(Exception):
        J.overfare_circle(h, n=128)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 6), st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_overfare_round_trip(n, c):
    cx = annulus_complex()
    h = J.harmonic_from_spec(cx, 1, {"hol": {str(n): c}, "anti": {str(-n): 0.5}, "log": 0.3})
    back = J.overfare_circle(J.overfare_circle(h))
    z = np.array([0.6 + 0.2j, -0.8j])
    assert np.max(np.abs(back.value(z, 0) - h.value(z, 0))) < 1e-11 * max(1.0, abs(c))


def test_modal_part_rejects_non_round():
    from conftest import SPHERE
    from schiffer.geometry import CurveSpec, build_complex
    cx = build_complex(SPHERE, [CurveSpec("ellipse", semi_axes=(1.5, 1.0))])
    with pytest.raises(GeometryError):
        J.harmonic_from_spec(cx, 1, {"hol": {"1": 1}})


# ---------------------------------------------------------------- suites

@pytest.mark.parametrize("cx_fn", [circle_complex, bands_complex, annulus_complex])
def test_jump_suite_passes(cx_fn):
    rep = an.run_jump_suite(cx_fn(), N=8)
    names = [r.identity for r in rep.records]
    for tag in ("(a)", "(b)", "(c)", "(d)", "(e)"):
        assert sum(n.startswith(tag) for n in names) == 2  # default q and a second q in piece 1
    assert rep.passed, [(r.identity, r.residual) for r in rep.records if not r.passed]
    for r in rep.records:
        assert r.residual >= 0 and r.passed == (r.residual < r.tolerance)


def test_dirichlet_seminorm_of_z(circle_cx):
    from schiffer.geometry import piece_quadrature
    grids = piece_quadrature(circle_cx, 1, 48)
    z = grids[0].nodes
    # h = z on the unit disk: 2 * integral |1|^2 dA = 2 pi
    assert abs(J.dirichlet_seminorm([np.ones_like(z)], [0 * z], grids) ** 2 - 2 * np.pi) < 1e-10
