"""Truncated bases for Bergman spaces of one-forms on pieces.

Every element carries its coefficient function h (the form is h dz, or
conj(h) dz-bar for the antiholomorphic family), a single-valued potential
P with dbar P = conj(h), and the holomorphic derivative of P.  The
potentials feed Stokes-type boundary integrals for Gram entries and
dbar-antiderivatives.

Conventions: (a, b) = 2 * integral of (p conj(r) + q conj(s)) dA for
a = p dz + q dz-bar, b = r dz + s dz-bar.  The Gram matrix stores
G[m, k] = (e_k, e_m), so <u, v> = v^H G u for coefficient vectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Sequence

import numpy as np

from .geometry import (ComponentDescriptor, GeometryError, SeparatingComplex,
                       homology_cycles, piece_quadrature)
from .kernels import dlog_theta1, elliptic_F

CHIRALITIES = ("holomorphic", "antiholomorphic")


class GramError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True, eq=False)
class BasisElement:
    comp: int
    label: tuple
    h: Callable
    pot: Callable | None = None
    dpot: Callable | None = None


@dataclass(frozen=True, eq=False)
class BasisFamily:
    complex: SeparatingComplex
    piece_id: int  # 0 denotes the whole surface
    chirality: str
    kind: str
    N: int
    elements: tuple
    cache: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.elements)

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def holomorphic(self) -> bool:
        return self.chirality == "holomorphic"

    @property
    def components(self) -> tuple:
        if self.piece_id == 0:
            return ()
        return self.complex.piece(self.piece_id).components

    def labels(self):
        return [e.label for e in self.elements]

    def values(self, z, comp: int | None = None):
        """Coefficient values, shape (size, *z.shape): the dz coefficient for
        the holomorphic family, the dz-bar coefficient otherwise.  Elements
        supported on other components give zero; global elements (comp < 0)
        are supported everywhere."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros((self.size,) + z.shape, dtype=complex)
        for i, e in enumerate(self.elements):
            if comp is None or e.comp == comp or e.comp < 0:
                out[i] = e.h(z)
        return out if self.holomorphic else np.conj(out)

    def conjugate(self) -> "BasisFamily":
        other = CHIRALITIES[1 - CHIRALITIES.index(self.chirality)]
        return BasisFamily(self.complex, self.piece_id, other, self.kind, self.N, self.elements)


@dataclass(frozen=True, eq=False)
class FormVector:
    basis: object
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (len(self.basis),):
            raise ValueError(f"expected {len(self.basis)} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coefficients", c)

    def sample(self, z, comp: int):
        """(dz, dz-bar) coefficients at z inside component comp."""
        if len(self.basis) == 0:
            v = np.zeros(np.shape(z), dtype=complex)
        else:
            v = self.coefficients @ self.basis.values(np.asarray(z, dtype=complex), comp).reshape(len(self.basis), -1)
            v = v.reshape(np.shape(z))
        zero = np.zeros_like(v)
        return (v, zero) if self.basis.holomorphic else (zero, v)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    basis: BasisFamily
    entries: np.ndarray
    route: str = "area"

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.entries))

    def solve(self, b):
        return np.linalg.solve(self.entries, b)

    def cholesky(self):
        return np.linalg.cholesky(self.entries)


# ---------------------------------------------------------------- elements

def _const(v):
    return lambda z: np.full(np.shape(z), v, dtype=complex)


def _scaled_power(c, R, n):
    """zeta^n / R with zeta = (w - c) / R, i.e. the form zeta^n dzeta."""
    return lambda z: ((np.asarray(z, dtype=complex) - c) / R) ** n / R


def _power_elements(comp_idx, c, R, powers):
    out = []
    for n in powers:
        h = _scaled_power(c, R, n)
        if n == -1:
            pot = lambda z, c=c, R=R: 2 * np.log(np.abs((np.asarray(z) - c) / R)) + 0j
            dpot = lambda z, c=c: 1 / (np.asarray(z, dtype=complex) - c)
        else:
            pot = lambda z, c=c, R=R, n=n: np.conj(((np.asarray(z, dtype=complex) - c) / R) ** (n + 1)) / (n + 1)
            dpot = _const(0.0)
        out.append(BasisElement(comp_idx, ("power", n), h, pot, dpot))
    return out


def _band_elements(comp_idx, y0, y1, N):
    out = []
    for n in range(-N, N + 1):
        if n == 0:
            # -2i Im w is single valued on the band, unlike conj(w)
            out.append(BasisElement(comp_idx, ("fourier", 0), _const(1.0),
                                    lambda z: -2j * np.imag(z) + 0j, _const(-1.0)))
            continue
        s = y0 if n > 0 else y1
        h = lambda z, n=n, s=s: np.exp(2j * np.pi * n * (np.asarray(z, dtype=complex) - 1j * s))
        pot = lambda z, h=h, n=n: np.conj(h(z) / (2j * np.pi * n))
        out.append(BasisElement(comp_idx, ("fourier", n), h, pot, _const(0.0)))
    return out


def _complement_scale(k, rho):
    # s_k F^(k)(u) ~ zeta^(-k-2) / rho near u = 0, zeta = u / rho
    return (-1) ** (k + 1) * rho ** (k + 1) / factorial(k + 1)


def _torus_complement_elements(comp_idx, c, rho, tau, N):
    H = complex(tau).imag
    out = [BasisElement(
        comp_idx, ("dz", 0), _const(1.0),
        lambda z: np.conj(z) - z - (H / np.pi) * dlog_theta1(np.asarray(z) - c, tau),
        lambda z: -1 - (H / np.pi) * elliptic_F(np.asarray(z) - c, tau))]
    for k in range(N):
        s = _complement_scale(k, rho)
        h = lambda z, k=k, s=s: s * elliptic_F(np.asarray(z, dtype=complex) - c, tau, k)
        if k == 0:
            pot = lambda z, s=s: s * 2 * np.real(dlog_theta1(np.asarray(z) - c, tau)) + 0j
            dpot = lambda z, s=s: s * dlog_theta1(np.asarray(z) - c, tau)
        else:
            pot = lambda z, k=k, s=s: np.conj(s * elliptic_F(np.asarray(z, dtype=complex) - c, tau, k - 1))
            dpot = _const(0.0)
        out.append(BasisElement(comp_idx, ("elliptic", k), h, pot, dpot))
    return out


def _push(e: BasisElement, chart) -> BasisElement:
    """Push an element forward along a Mobius chart."""
    inv = chart.inverse()

    def h(z):
        return e.h(inv(z)) * inv.deriv(z)

    def pot(z):
        return e.pot(inv(z))

    def dpot(z):
        return e.dpot(inv(z)) * inv.deriv(z)

    return BasisElement(e.comp, e.label, h, pot, dpot)


_KIND = {"interior": "monomial", "exterior": "laurent", "annulus": "laurent",
         "band": "fourier_band", "cap": "cap_monomial", "torus_complement": "torus_complement"}


def component_elements(comp: ComponentDescriptor, comp_idx: int, N: int, surface=None):
    c = complex(comp.center)
    kind = comp.kind
    if kind in ("interior", "cap"):
        els = _power_elements(comp_idx, c, comp.radii[0], range(N))
    elif kind == "exterior":
        els = _power_elements(comp_idx, c, comp.radii[0], range(-2, -N - 2, -1))
    elif kind == "annulus":
        els = _power_elements(comp_idx, c, comp.radii[1], range(-N, N + 1))
    elif kind == "band":
        els = _band_elements(comp_idx, *comp.heights, N)
    elif kind == "torus_complement":
        els = _torus_complement_elements(comp_idx, c, comp.radii[0], surface.tau, N)
    else:
        raise GeometryError(f"unsupported piece shape {kind!r}")
    if not comp.chart.is_identity():
        els = [_push(e, comp.chart) for e in els]
    return els


def make_basis(cx: SeparatingComplex, k: int, chirality: str = "holomorphic", N: int = 16) -> BasisFamily:
    """Truncated basis of the Bergman space of piece k (k = 0: the surface)."""
    if chirality not in CHIRALITIES:
        raise ValueError(f"chirality must be one of {CHIRALITIES}")
    if N < 1:
        raise ValueError("truncation order N must be at least 1")
    if k == 0:
        return global_basis(cx, chirality)
    comps = cx.piece(k).components
    els = []
    for i, comp in enumerate(comps):
        els.extend(component_elements(comp, i, N, cx.surface))
    kinds = {_KIND[c.kind] for c in comps}
    kind = kinds.pop() if len(kinds) == 1 else "mixed"
    return BasisFamily(cx, k, chirality, kind, N, tuple(els))


def global_basis(cx: SeparatingComplex, chirality: str = "holomorphic") -> BasisFamily:
    """Basis of holomorphic one-forms on the whole surface: empty on the
    sphere, dz on the torus."""
    if cx.surface.kind == "sphere":
        return BasisFamily(cx, 0, chirality, "empty", 0, ())
    return BasisFamily(cx, 0, chirality, "torus_global", 1, (BasisElement(-1, ("dz", 0), _const(1.0)),))


# ---------------------------------------------------------------- inner products

def _as_pairs(f, grids):
    if isinstance(f, FormVector):
        return [f.sample(g.nodes, i) for i, g in enumerate(grids)]
    return list(f)


def inner_product(f, g, grids: Sequence) -> complex:
    """(f, g) over the components of a piece.

    f and g are FormVectors on the same piece or lists (one per grid) of
    sampled (dz, dz-bar) coefficient pairs.
    """
    if isinstance(f, FormVector) and isinstance(g, FormVector):
        if f.basis.complex is not g.basis.complex or f.basis.piece_id != g.basis.piece_id:
            raise ValueError("forms live on different pieces")
    fs, gs = _as_pairs(f, grids), _as_pairs(g, grids)
    if not (len(fs) == len(gs) == len(grids)):
        raise ValueError("need one sample pair per grid")
    tot = 0j
    for grid, (p, q), (r, s) in zip(grids, fs, gs):
        tot += 2 * np.sum(grid.weights * (p * np.conj(r) + q * np.conj(s)))
    return complex(tot)


def _gram_area(basis: BasisFamily, grids):
    n = basis.size
    G = np.zeros((n, n), dtype=complex)
    for i, grid in enumerate(grids):
        V = basis.values(grid.nodes, i)
        G += 2 * (np.conj(V) * grid.weights) @ V.T
    return G


def _gram_boundary(basis: BasisFamily, n_contour: int):
    """Gram entries by Stokes: (e_k, e_m) = -i * sum over boundary of
    side * contour integral of h_k P_m dz."""
    cx = basis.complex
    n = basis.size
    G = np.zeros((n, n), dtype=complex)
    for i, comp in enumerate(basis.components):
        idx = [j for j, e in enumerate(basis.elements) if e.comp == i]
        for ci, side in comp.boundary:
            cv = cx.curves[ci]
            if cv.kind == "horizontal_torus_circle":
                t = np.arange(n_contour) / n_contour
                w = t + 1j * (comp.heights[0] if side > 0 else comp.heights[1])
                dw = np.full(n_contour, 1.0 / n_contour, dtype=complex)
            else:
                t, hstep = cv.nodes(n_contour)
                w, dw = cv.point_and_tangent(t)
                dw = dw * hstep
            H = np.array([basis.elements[j].h(w) for j in idx])
            P = np.array([basis.elements[j].pot(w) for j in idx])
            G[np.ix_(idx, idx)] += side * (-1j) * (P * dw) @ H.T
    return G if basis.holomorphic else np.conj(G)


def _gram_closed(basis: BasisFamily):
    """Closed forms for Fourier band bases and the torus global basis."""
    if basis.kind == "torus_global":
        return np.array([[2 * complex(basis.complex.surface.tau).imag]], dtype=complex)
    d = np.zeros(basis.size)
    for i, e in enumerate(basis.elements):
        y0, y1 = basis.components[e.comp].heights
        n = e.label[1]
        H = y1 - y0
        d[i] = 2 * H if n == 0 else 2 * (-np.expm1(-4 * np.pi * abs(n) * H)) / (4 * np.pi * abs(n))
    return np.diag(d).astype(complex)


def gram(basis: BasisFamily, grids=None, route: str | None = None,
         resolution: int = 48, n_contour: int = 512, check: bool = True) -> GramMatrix:
    """Gram matrix of a basis by area quadrature, boundary integrals or
    closed forms.  Raises GramError if it is not numerically positive
    definite."""
    if basis.size == 0:
        return GramMatrix(basis, np.zeros((0, 0), dtype=complex), "closed")
    if route is None:
        if grids is not None:
            route = "area"
        elif basis.kind in ("fourier_band", "torus_global"):
            route = "closed"
        else:
            route = "boundary"
    key = (route, resolution, n_contour) if grids is None else None
    if key is not None and key in basis.cache:
        G = basis.cache[key]
    else:
        if route == "area":
            grids = grids if grids is not None else piece_quadrature(basis.complex, basis.piece_id, resolution)
            G = _gram_area(basis, grids)
        elif route == "boundary":
            G = _gram_boundary(basis, n_contour)
        elif route == "closed":
            if basis.kind not in ("fourier_band", "torus_global"):
                raise ValueError(f"no closed-form Gram for basis kind {basis.kind!r}")
            G = _gram_closed(basis)
            G = G if basis.holomorphic else np.conj(G)
        else:
            raise ValueError(f"unknown Gram route {route!r}")
        G = 0.5 * (G + G.conj().T)
        if key is not None:
            basis.cache[key] = G
    if check:
        ev = np.linalg.eigvalsh(G)
        if not ev[0] > 1e-13 * ev[-1]:
            raise GramError(f"Gram matrix not positive definite (eigenvalues {ev[0]:.3e} .. {ev[-1]:.3e}); "
                            f"basis of size {basis.size} too large for the working resolution")
    return GramMatrix(basis, G, route)


def project(samples, basis: BasisFamily, grids) -> FormVector:
    """Orthogonal projection of a sampled form onto span(basis).

    samples: list of (dz, dz-bar) coefficient pairs, one per grid.
    """
    G = gram(basis, grids)
    b = np.zeros(basis.size, dtype=complex)
    for i, (grid, (p, q)) in enumerate(zip(grids, samples)):
        V = basis.values(grid.nodes, i)
        r, s = (V, 0 * V) if basis.holomorphic else (0 * V, V)
        b += 2 * (np.conj(r) * grid.weights) @ p + 2 * (np.conj(s) * grid.weights) @ q
    return FormVector(basis, np.linalg.solve(G.entries, b))


# ---------------------------------------------------------------- dbar

@dataclass(frozen=True, eq=False)
class HarmonicFunction:
    """h = sum_n c_n P_n with dbar h equal to the antiholomorphic form."""
    form: FormVector

    def __call__(self, z, comp: int = 0):
        b = self.form.basis
        return sum(c * e.pot(np.asarray(z, dtype=complex))
                   for c, e in zip(self.form.coefficients, b.elements) if e.comp == comp)

    def d(self, z, comp: int = 0):
        """Coefficient of dz in dh."""
        b = self.form.basis
        return sum(c * e.dpot(np.asarray(z, dtype=complex))
                   for c, e in zip(self.form.coefficients, b.elements) if e.comp == comp)

    def dbar(self, z, comp: int = 0):
        """Coefficient of dz-bar in dh."""
        return self.form.sample(z, comp)[1]


def solve_dbar(alpha: FormVector) -> HarmonicFunction:
    """Harmonic h with dbar h = alpha for an antiholomorphic form alpha."""
    b = alpha.basis
    if not isinstance(b, BasisFamily) or b.holomorphic:
        raise ValueError("solve_dbar needs an antiholomorphic form")
    if b.piece_id == 0 or any(e.pot is None for e in b.elements):
        raise GeometryError("no dbar potentials for this basis")
    return HarmonicFunction(alpha)


# ---------------------------------------------------------------- harmonic measures

@dataclass(frozen=True, eq=False)
class HarmonicMeasure:
    curve: int
    comp: int
    value: Callable
    a: Callable  # coefficient of dz in d(omega); d(omega) = a dz + conj(a) dz-bar

    def d_coeffs(self, z):
        a = self.a(np.asarray(z, dtype=complex))
        return a, np.conj(a)

    def star_d_coeffs(self, z):
        """*d(omega) = -i a dz + i conj(a) dz-bar."""
        a = self.a(np.asarray(z, dtype=complex))
        return -1j * a, 1j * np.conj(a)


@dataclass(frozen=True, eq=False)
class HarmonicMeasureSet:
    complex: SeparatingComplex
    piece_id: int
    measures: tuple
    period: np.ndarray | None = None
    holomorphic: bool = True  # FormVector plumbing: these span *A_hm

    def __len__(self):
        return len(self.measures)

    @property
    def curves(self):
        return [m.curve for m in self.measures]


def _measure_pair(comp, comp_idx):
    """Measures attached to (first, second) boundary curve of a two-curve component."""
    c = complex(comp.center)
    if comp.kind == "annulus":
        r0, r1 = comp.radii
        L = np.log(r1 / r0)
        outer_v = lambda z: np.log(np.abs(np.asarray(z) - c) / r0) / L
        outer_a = lambda z: 1 / (2 * (np.asarray(z, dtype=complex) - c) * L)
    else:
        y0, y1 = comp.heights
        H = y1 - y0
        outer_v = lambda z: (np.imag(z) - y0) / H
        outer_a = lambda z: np.full(np.shape(z), 1 / (2j * H), dtype=complex)
    first_v = lambda z: 1 - outer_v(z)
    first_a = lambda z: -outer_a(z)
    vals = [(first_v, first_a), (outer_v, outer_a)]
    if not comp.chart.is_identity():
        inv = comp.chart.inverse()
        vals = [((lambda z, v=v: v(inv(z))), (lambda z, a=a: a(inv(z)) * inv.deriv(z))) for v, a in vals]
    return [HarmonicMeasure(ci, comp_idx, v, a) for (ci, _), (v, a) in zip(comp.boundary, vals)]


def harmonic_measures(cx: SeparatingComplex, k: int, n_contour: int = 256) -> HarmonicMeasureSet:
    """Harmonic measures of piece k, one per boundary curve, with the
    boundary period matrix."""
    comps = cx.piece(k).components
    if len(comps) == 1 and comps[0].n_boundary == 1:
        # simply connected: the only measure is the constant 1 and A_hm is trivial
        return HarmonicMeasureSet(cx, k, (), np.zeros((0, 0)))
    out = []
    for i, comp in enumerate(comps):
        if comp.n_boundary == 1:
            ci = comp.boundary[0][0]
            out.append(HarmonicMeasure(ci, i, lambda z: np.ones(np.shape(z)), _const(0.0)))
        elif comp.n_boundary == 2 and comp.kind in ("annulus", "band"):
            out.extend(_measure_pair(comp, i))
        else:
            raise GeometryError(f"no closed-form harmonic measures on {comp.kind!r}")
    hms = HarmonicMeasureSet(cx, k, tuple(out))
    return HarmonicMeasureSet(cx, k, tuple(out), period_matrix(hms, n_contour))


def boundary_comp_order(cx: SeparatingComplex, k: int):
    return [(i, ci) for i, comp in enumerate(cx.piece(k).components) for ci, _ in comp.boundary]


def period_matrix(hms: HarmonicMeasureSet, n_contour: int = 256) -> np.ndarray:
    """Pi[j, k] = integral over the j-th boundary curve of *d(omega_k), along
    curves isotopic to the boundary and oriented as boundary of the piece."""
    cycles = homology_cycles(hms.complex, hms.piece_id, n_contour).boundary()
    order = boundary_comp_order(hms.complex, hms.piece_id)
    n = len(hms.measures)
    P = np.zeros((n, n))
    for j, (cyc, (comp_j, _)) in enumerate(zip(cycles, order)):
        for l, m in enumerate(hms.measures):
            if m.comp != comp_j:
                continue
            p, q = m.star_d_coeffs(cyc.nodes)
            P[j, l] = np.real(np.sum(p * cyc.dz + q * np.conj(cyc.dz)))
    return P


def reduced_indices(hms: HarmonicMeasureSet):
    """Indices kept after omitting the last measure of each component."""
    keep = []
    comps = [m.comp for m in hms.measures]
    for i, c in enumerate(comps):
        if i + 1 < len(comps) and comps[i + 1] == c:
            keep.append(i)
    return keep


def prescribe_boundary_periods(hms: HarmonicMeasureSet, lambdas, tol: float = 1e-12) -> FormVector:
    """alpha = sum a_l *d(omega_l) with prescribed boundary periods.

    Periods around the boundary curves of each connected component must
    sum to zero.
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (len(hms),):
        raise ValueError(f"need {len(hms)} periods")
    comps = np.array([m.comp for m in hms.measures])
    for c in np.unique(comps):
        if abs(lam[comps == c].sum()) > tol:
            raise ValueError("boundary periods must sum to zero on each component")
    keep = reduced_indices(hms)
    a = np.zeros(len(hms))
    if keep:
        a[keep] = np.linalg.solve(hms.period[np.ix_(keep, keep)], lam[keep])
    return FormVector(hms, a.astype(complex))


def star_form_periods(alpha: FormVector, n_contour: int = 256) -> np.ndarray:
    """Recompute boundary periods of a combination of *d(omega_l) by quadrature."""
    hms = alpha.basis
    P = period_matrix(hms, n_contour)
    return np.real(P @ alpha.coefficients)
