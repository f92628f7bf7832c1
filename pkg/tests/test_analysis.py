import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import annulus_complex, bands_complex, capped_complex, circle_complex
from schiffer import analysis as an
from schiffer import bases as bs
from schiffer.geometry import CurveSpec, GeometryError


# ---------------------------------------------------------------- identity suites

@pytest.mark.parametrize("suite", an.SUITES)
def test_identity_suites_on_circle(circle_cx, suite):
    rep = an.run_identity_suite(circle_cx, suite, N=8, config_id="circle")
    assert rep.records and rep.passed
    assert json.loads(json.dumps(rep.to_dict()))["suite"] == suite


@pytest.mark.parametrize("suite", [s for s in an.SUITES if s != "conformal_invariance"])
def test_identity_suites_on_bands(bands_cx, suite):
    rep = an.run_identity_suite(bands_cx, suite, N=8)
    assert rep.passed, [(r.identity, r.residual) for r in rep.records]


def test_conformal_suite_needs_sphere(bands_cx):
    with pytest.raises(GeometryError):
        an.run_identity_suite(bands_cx, "conformal_invariance", N=4)


def test_unknown_suite(circle_cx):
    with pytest.raises(ValueError):
        an.run_identity_suite(circle_cx, "quadratic_IV")


def test_genus_zero_quadratic_three_is_exact_zero(circle_cx):
    rep = an.run_identity_suite(circle_cx, "quadratic_III", N=4)
    assert all(r.residual == 0.0 for r in rep.records)


def test_record_pass_flag_matches_tolerance():
    r = an._record("x", "c", 4, -2e-3, 1e-3)
    assert r.residual == 2e-3 and not r.passed


@pytest.mark.parametrize("method", ["boundary", "exclusion"])
def test_schiffer_vanishing_on_disk(circle_cx, method):
    assert an.verify_schiffer_vanishing(circle_cx, 1, N=8, method=method) < 1e-6


def test_schiffer_vanishing_exclusion_needs_disk(circle_cx):
    with pytest.raises(GeometryError):
        an.verify_schiffer_vanishing(circle_cx, 2, N=4, method="exclusion")


def test_default_sample_points_inside(circle_cx, annulus_cx):
    z = an.default_sample_points(circle_cx.piece(1).components[0])
    assert len(z) == 10 and np.all(np.abs(z) < 1)
    z = an.default_sample_points(annulus_cx.piece(1).components[0])
    assert np.all((np.abs(z) > 0.5) & (np.abs(z) < 1))


# ---------------------------------------------------------------- harmonic measures

@pytest.mark.parametrize("cx_fn", [annulus_complex, bands_complex])
def test_harmonic_measure_suite(cx_fn):
    rep = an.run_harmonic_measure_suite(cx_fn(), N=12)
    assert rep.passed, [(r.identity, r.residual) for r in rep.records if not r.passed]
    assert any("bridgeworthy" in r.identity for r in rep.records)


def test_harmonic_measure_suite_needs_measures(circle_cx):
    with pytest.raises(GeometryError):
        an.run_harmonic_measure_suite(circle_cx)


def test_bridgeworthy_predicate(bands_cx):
    # equal constants on both boundary curves of the connected opposite piece
    assert an.bridgeworthy(bands_cx, {0: 1.0, 1: 1.0})
    assert not an.bridgeworthy(bands_cx, {0: 1.0, 1: 0.0})


# ---------------------------------------------------------------- index

def test_index_bands_zero(bands_cx):
    r = an.index_experiment(bands_cx, N=8)
    assert r.index == 0 and r.diagnostics["stable"] and r.diagnostics["coker_cross_check"]
    assert r.restricted_sigma_min > an.RANK_TOL


def test_index_circle_zero(circle_cx):
    r = an.index_experiment(circle_cx, N=8)
    assert r.index == 0 and r.diagnostics["stable"]


def test_index_capped_minus_one(capped_cx):
    r = an.index_experiment(capped_cx, N=8)
    assert (r.dim_ker, r.dim_coker, r.index) == (0, 1, -1)
    assert r.diagnostics["index_by_size"] == {"8": -1, "16": -1}
    assert r.diagnostics["coker_cross_check"]


def test_index_rejects_unsupported():
    from conftest import SPHERE
    from schiffer.geometry import build_complex
    cx = build_complex(SPHERE, [CurveSpec("circle", radius=0.5), CurveSpec("circle", radius=1.0)])
    with pytest.raises(GeometryError):
        an.index_experiment(cx, N=4)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 5), st.integers(0, 2 ** 31 - 1))
def test_kernel_cokernel_rank_counts(m, n, r, seed):
    # random operator of known rank in orthonormal coordinates
    rng = np.random.default_rng(seed)
    cx = annulus_complex()
    dom = bs.make_basis(cx, 1, "antiholomorphic", 1)
    cod = bs.make_basis(cx, 1, "holomorphic", 1)
    dom = bs.BasisFamily(cx, 1, dom.chirality, dom.kind, 1, dom.elements[:n])
    cod = bs.BasisFamily(cx, 1, cod.chirality, cod.kind, 1, cod.elements[:m]) if m <= 3 else cod
    m = len(cod)
    n = len(dom)
    r = min(r, m, n)
    A = rng.normal(size=(m, r)) @ rng.normal(size=(r, n)) + 0j
    eye = lambda b: bs.GramMatrix(b, np.eye(len(b), dtype=complex))
    from schiffer.operators import OperatorMatrix
    rep = an.estimate_kernel_cokernel(OperatorMatrix("X", dom, cod, A, eye(dom), eye(cod)))
    assert rep.dim_ker == n - r and rep.dim_coker == m - r and rep.index == n - m


# ---------------------------------------------------------------- quasicircle probe

def test_circle_sigma_min_is_one():
    s_min, s_max = an.rayleigh_ritz_sigma(CurveSpec("circle"), 12)
    assert abs(s_min - 1) < 1e-6 and abs(s_max - 1) < 1e-6


@pytest.mark.parametrize("aspect", [1.5, 2.0, 3.0])
def test_ellipse_sigma_min_closed_form(aspect):
    # Grunsky closed form for an ellipse with semi-axes a, b: sqrt(1 - kappa^2)
    kappa = (aspect - 1) / (aspect + 1)
    s_min, _ = an.rayleigh_ritz_sigma(CurveSpec("ellipse", semi_axes=(aspect, 1.0)), 12)
    assert abs(s_min - np.sqrt(1 - kappa ** 2)) < 1e-10


def test_cusp_family_decreasing_and_stable():
    curves, params = an.cusp_family()
    rep = an.quasicircle_probe(curves, params, family="cusp")
    assert rep.trend_stable and all(rep.decreasing.values())
    assert rep.sigma_min[16][-1] < rep.sigma_min[12][-1]


def test_probe_galerkin_on_circle():
    rep = an.quasicircle_probe([CurveSpec("circle")], [1.0], basis_sizes=(8,), method="galerkin")
    assert abs(rep.sigma_min[8][0] - 1) < 1e-8
    with pytest.raises(ValueError):
        an.quasicircle_probe([CurveSpec("circle")], [1.0], basis_sizes=(4,), method="other")


# ---------------------------------------------------------------- V2

def test_V2_diagonal():
    r = an.riemann_matrix_V2(np.diag([1.0, 2.0]))
    assert r.dimension == 1 and r.realizable is False


def test_V2_off_diagonal():
    r = an.riemann_matrix_V2(np.array([[1.0, 0.3], [0.3, 1.0]]))
    assert r.dimension == 0 and r.realizable is None


def test_V2_rejects_bad_input():
    with pytest.raises(ValueError):
        an.riemann_matrix_V2(np.array([[1.0, 0.3], [0.2, 1.0]]))
    with pytest.raises(ValueError):
        an.riemann_matrix_V2(np.eye(3))


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_V2_dimension_iff_zero_coupling(a, b, c):
    r = an.riemann_matrix_V2(np.array([[a, c], [c, b]]))
    assert (r.dimension == 1) == (abs(c) <= 1e-12)


# ---------------------------------------------------------------- H_C and periods

def test_HC_pairings_bands(bands_cx):
    p = an.hc_boundary_pairings(bands_cx, 1)
    assert all(v[0] in (-1, 0, 1) and abs(v[1] - v[0]) < 1e-10 for v in p.values())
    assert {p["H_B on boundary 0"][0], p["H_B on boundary 1"][0]} == {1, -1}


def test_HC_needs_torus(circle_cx):
    with pytest.raises(GeometryError):
        an.build_HC(circle_cx, None)


def test_HC_reproduces_intersection(bands_cx):
    A, Bc = an.surface_cycles(bands_cx)
    H = an.build_HC(bands_cx, A)
    # pairing with the dual cycle is the intersection number, and H_C is real
    assert abs(abs(H.integrate(Bc)) - 1) < 1e-12
    assert abs(H.integrate(A)) < 1e-12
    assert abs(H.a - np.conj(H.b)) < 1e-15


@pytest.mark.parametrize("cx_fn", [bands_complex, capped_complex, circle_complex])
def test_cohomology_periods_vanish(cx_fn):
    cx = cx_fn()
    forms, names = an.default_test_forms(cx, N=8)
    assert len(forms) == 5
    rep = an.cohomology_periods(cx, forms, N=8, names=names)
    assert rep.passed and np.max(np.abs(rep.periods)) < 1e-5


def test_cohomology_periods_piece_one(bands_cx):
    forms, names = an.default_test_forms(bands_cx, N=8)
    rep = an.cohomology_periods(bands_cx, forms, piece=1, N=8, names=names)
    assert rep.passed


# ---------------------------------------------------------------- capped decomposition

def test_capped_decomposition_round_trip(capped_cx):
    ops = an.OperatorCache(capped_cx)
    cod = ops.T(1, 2, 8).codomain
    rng = np.random.default_rng(3)
    alpha = bs.FormVector(cod, rng.normal(size=len(cod)) + 1j * rng.normal(size=len(cod)))
    rep = an.capped_decomposition_check(capped_cx, alpha, ops=ops)
    assert rep.residual < 1e-10 * np.linalg.norm(alpha.coefficients)
    assert rep.inverse_check is not None and rep.inverse_check < 1e-8
    assert np.isfinite(rep.condition)


def test_capped_decomposition_needs_capped(bands_cx):
    b = bs.make_basis(bands_cx, 2, N=2)
    with pytest.raises(GeometryError):
        an.capped_decomposition_check(bands_cx, bs.FormVector(b, np.zeros(len(b))))
