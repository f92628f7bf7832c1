import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import SPHERE, annulus_complex, bands_complex, capped_complex, circle_complex
from schiffer import bases as bs
from schiffer.geometry import CurveSpec, GeometryError, build_complex, piece_quadrature
from schiffer.kernels import wirtinger


@pytest.fixture(scope="module")
def disk_grids(circle_cx):
    return piece_quadrature(circle_cx, 1, 48)


# ---------------------------------------------------------------- make_basis

def test_disk_basis_is_monomials(circle_cx):
    b = bs.make_basis(circle_cx, 1, N=3)
    assert b.kind == "monomial"
    assert b.labels() == [("power", 0), ("power", 1), ("power", 2)]
    z = 0.3 + 0.2j
    assert np.allclose(b.values(z, 0), [1, z, z ** 2])


def test_exterior_basis_has_finite_norms(circle_cx):
    b = bs.make_basis(circle_cx, 2, N=2)
    assert b.labels() == [("power", -2), ("power", -3)]
    # 2 * integral over |z| > 1 of |z|^(-2m) dA = 4 pi / (2m - 2)
    G = bs.gram(b).entries
    assert np.allclose(np.diag(G).real, [2 * np.pi, np.pi], atol=1e-12)


def test_band_basis_is_fourier(bands_cx):
    b = bs.make_basis(bands_cx, 1, N=1)
    assert b.kind == "fourier_band"
    assert [l[1] for l in b.labels()] == [-1, 0, 1]
    z = 0.23 + 0.4j
    assert np.allclose(b.values(z, 0), b.values(z + 1, 0), atol=1e-12)


def test_antiholomorphic_family_is_conjugate(circle_cx):
    hol = bs.make_basis(circle_cx, 1, "holomorphic", N=3)
    anti = bs.make_basis(circle_cx, 1, "antiholomorphic", N=3)
    z = np.array([0.1 + 0.2j, -0.4j])
    assert np.allclose(anti.values(z, 0), np.conj(hol.values(z, 0)))


def test_make_basis_rejects_bad_input(circle_cx):
    with pytest.raises(ValueError):
        bs.make_basis(circle_cx, 1, N=0)
    with pytest.raises(ValueError):
        bs.make_basis(circle_cx, 1, "mixed", N=2)


def test_global_basis():
    assert bs.global_basis(circle_complex()).size == 0
    b = bs.global_basis(bands_complex())
    assert b.size == 1 and abs(bs.gram(b).entries[0, 0] - 4.0) < 1e-15


# ---------------------------------------------------------------- inner products and Gram

def test_disk_monomial_norms(circle_cx, disk_grids):
    b = bs.make_basis(circle_cx, 1, N=4)
    v0 = bs.FormVector(b, [1, 0, 0, 0])
    v1 = bs.FormVector(b, [0, 1, 0, 0])
    assert abs(bs.inner_product(v0, v0, disk_grids) - 2 * np.pi) < 1e-10
    assert abs(bs.inner_product(v0, v1, disk_grids)) < 1e-12


def test_holomorphic_antiholomorphic_orthogonal(circle_cx, disk_grids):
    hol = bs.make_basis(circle_cx, 1, "holomorphic", N=6)
    anti = hol.conjugate()
    for i in range(6):
        for j in range(6):
            f = bs.FormVector(hol, np.eye(6)[i])
            g = bs.FormVector(anti, np.eye(6)[j])
            assert abs(bs.inner_product(f, g, disk_grids)) < 1e-10


def test_inner_product_rejects_mismatched_pieces(circle_cx, disk_grids):
    f = bs.FormVector(bs.make_basis(circle_cx, 1, N=2), [1, 0])
    g = bs.FormVector(bs.make_basis(circle_cx, 2, N=2), [1, 0])
    with pytest.raises(ValueError):
        bs.inner_product(f, g, disk_grids)


def test_disk_gram_diagonal(circle_cx, disk_grids):
    G = bs.gram(bs.make_basis(circle_cx, 1, N=4), disk_grids).entries
    assert np.allclose(G, np.diag([2 * np.pi, np.pi, 2 * np.pi / 3, np.pi / 2]), atol=1e-10)


def test_annulus_and_band_grams_diagonal(annulus_cx, bands_cx):
    for cx in (annulus_cx, bands_cx):
        G = bs.gram(bs.make_basis(cx, 1, N=2)).entries
        assert np.allclose(G, np.diag(np.diag(G)), atol=1e-10)


def test_gram_routes_agree(annulus_cx):
    b = bs.make_basis(annulus_cx, 1, N=3)
    area = bs.gram(b, route="area").entries
    bound = bs.gram(b, route="boundary").entries
    assert np.max(np.abs(area - bound)) < 1e-8 * np.max(np.abs(bound))


def test_singular_gram_refused(circle_cx):
    grids = piece_quadrature(circle_cx, 1, 4)  # fewer nodes than elements
    with pytest.raises(bs.GramError):
        bs.gram(bs.make_basis(circle_cx, 1, N=300), grids)


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 12), st.sampled_from(["disk", "annulus", "band", "capped"]))
def test_gram_hermitian_positive_definite(N, which):
    cx = {"disk": circle_complex, "annulus": annulus_complex,
          "band": bands_complex, "capped": capped_complex}[which]()
    k = 2 if which == "capped" else 1
    G = bs.gram(bs.make_basis(cx, k, N=min(N, 6) if which == "capped" else N))
    assert np.allclose(G.entries, G.entries.conj().T)
    assert np.linalg.eigvalsh(G.entries)[0] > 0
    assert np.isfinite(G.condition)


# ---------------------------------------------------------------- projection

def test_project_monomial_and_conjugate(circle_cx, disk_grids):
    hol = bs.make_basis(circle_cx, 1, N=4)
    z = disk_grids[0].nodes
    v = bs.project([(z ** 2, 0 * z)], hol, disk_grids)
    assert np.allclose(v.coefficients, [0, 0, 1, 0], atol=1e-12)
    v = bs.project([(0 * z, np.ones_like(z))], hol, disk_grids)
    assert np.allclose(v.coefficients, 0, atol=1e-12)


# ---------------------------------------------------------------- dbar potentials

def test_solve_dbar_examples(circle_cx, annulus_cx):
    z = 0.7 + 0.2j
    d = bs.make_basis(circle_cx, 1, "antiholomorphic", N=3)
    assert abs(bs.solve_dbar(bs.FormVector(d, [1, 0, 0]))(z) - np.conj(z)) < 1e-15
    assert abs(bs.solve_dbar(bs.FormVector(d, [0, 0, 1]))(z) - np.conj(z) ** 3 / 3) < 1e-15
    a = bs.make_basis(annulus_cx, 1, "antiholomorphic", N=2)
    i = a.labels().index(("power", -1))
    h = bs.solve_dbar(bs.FormVector(a, np.eye(len(a))[i]))
    assert abs(h(z) - 2 * np.log(abs(z))) < 1e-15


@pytest.mark.parametrize("which", ["disk", "annulus", "band"])
def test_solve_dbar_round_trip(which):
    cx = {"disk": circle_complex, "annulus": annulus_complex, "band": bands_complex}[which]()
    b = bs.make_basis(cx, 1, "antiholomorphic", N=3)
    z = 0.45 + 0.6j if which == "band" else 0.55 + 0.35j
    for i in range(len(b)):
        form = bs.FormVector(b, np.eye(len(b))[i])
        h = bs.solve_dbar(form)
        dh, dbh = wirtinger(lambda x: h(x), z, h=1e-3)
        assert abs(dbh - form.sample(z, 0)[1]) < 1e-9 * max(1.0, abs(dbh))
        # harmonic: d h is holomorphic, so its dbar vanishes
        assert abs(wirtinger(lambda x: h.d(x), z, h=1e-3)[1]) < 1e-8


def test_solve_dbar_rejects_holomorphic(circle_cx):
    with pytest.raises(ValueError):
        bs.solve_dbar(bs.FormVector(bs.make_basis(circle_cx, 1, N=2), [1, 0]))


# ---------------------------------------------------------------- harmonic measures

def test_annulus_harmonic_measure_value(annulus_cx):
    hms = bs.harmonic_measures(annulus_cx, 1)
    outer = hms.measures[[m.curve for m in hms.measures].index(1)]
    # frozen from a 4001-point finite-difference radial Laplace solve
    assert abs(outer.value(0.75 * np.exp(0.3j)) - 0.5849625002798368) < 1e-8


def test_harmonic_measures_boundary_pattern(annulus_cx):
    hms = bs.harmonic_measures(annulus_cx, 1)
    th = np.linspace(0, 2 * np.pi, 32)
    for m in hms.measures:
        r = annulus_cx.curves[m.curve].radius
        other = 1.5 - r
        assert np.max(np.abs(m.value(r * np.exp(1j * th)) - 1)) < 1e-8
        assert np.max(np.abs(m.value(other * np.exp(1j * th)))) < 1e-8
    z = 0.6 + 0.3j
    assert abs(sum(m.a(z) for m in hms.measures)) < 1e-15


def test_disk_has_no_harmonic_measures(circle_cx):
    assert len(bs.harmonic_measures(circle_cx, 1)) == 0


def test_band_measure_differential(bands_cx):
    hms = bs.harmonic_measures(bands_cx, 1)
    upper = [m for m in hms.measures if abs(m.value(0.2 + 1j) - 1) < 1e-12][0]
    assert abs(upper.a(0.3 + 0.5j) - 1 / 2j) < 1e-15


def test_period_matrix_annulus_unit():
    cx = build_complex(SPHERE, [CurveSpec("circle", radius=np.exp(-2 * np.pi)), CurveSpec("circle", radius=1.0)])
    P = bs.harmonic_measures(cx, 1).period
    assert abs(abs(P[0, 0]) - 1.0) < 1e-10
    assert np.allclose(P.sum(axis=1), 0, atol=1e-12)


def test_period_matrix_reduced_positive_definite(annulus_cx):
    hms = bs.harmonic_measures(annulus_cx, 1)
    keep = bs.reduced_indices(hms)
    P = hms.period[np.ix_(keep, keep)]
    assert np.allclose(hms.period, hms.period.T)
    assert np.all(np.linalg.eigvalsh(P) > 0)
    assert abs(P[0, 0] - 2 * np.pi / np.log(2)) < 1e-10


@pytest.mark.parametrize("lam", [(1.0, -1.0), (0.0, 0.0), (-2.5, 2.5)])
def test_prescribe_boundary_periods_round_trip(annulus_cx, lam):
    hms = bs.harmonic_measures(annulus_cx, 1)
    alpha = bs.prescribe_boundary_periods(hms, lam)
    assert np.allclose(bs.star_form_periods(alpha), lam, atol=1e-8)
    if lam == (1.0, -1.0):
        assert abs(alpha.coefficients[0] - 1 / hms.period[0, 0]) < 1e-15
    if lam == (0.0, 0.0):
        assert np.all(alpha.coefficients == 0)


def test_prescribe_boundary_periods_rejects_nonzero_sum(annulus_cx):
    hms = bs.harmonic_measures(annulus_cx, 1)
    with pytest.raises(ValueError):
        bs.prescribe_boundary_periods(hms, [1.0, 0.0])


def test_simply_connected_and_global_edge_cases():
    cx = build_complex(SPHERE, [CurveSpec("ellipse", semi_axes=(1.5, 1.0))])
    assert len(bs.harmonic_measures(cx, 1)) == 0
    with pytest.raises(GeometryError):
        bs.solve_dbar(bs.FormVector(bs.make_basis(bands_complex(), 0, "antiholomorphic"), [1.0]))
