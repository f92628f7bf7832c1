"""Galerkin matrices of the comparison operators T, S and R.

T(j, k) maps antiholomorphic forms on piece j to holomorphic forms on
piece k.  Columns are computed with one of several routes:

boundary   sphere pieces: Cauchy-Pompeiu reduction of the area integral to
           Cauchy integrals of the dbar-potential, Galerkin by Stokes.
fourier    torus bands: termwise integration of the Fourier series of the
           Weierstrass-type kernel.
taylor     torus cap into its complement: Taylor expansion of the kernel
           at the cap centre.
quadrature any piece with area grids: desingularized kernel where the
           piece kernel is known, symmetric epsilon-exclusion otherwise.

Matrices map coefficient vectors of the domain basis to coefficient vectors
of the codomain basis.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .bases import BasisFamily, FormVector, GramMatrix, global_basis, gram, make_basis
from .geometry import GeometryError, SeparatingComplex, area_quadrature, piece_quadrature
from .kernels import (elliptic_F, kernel_K_global, kernel_L, kernel_L_desing, log_elliptic_fourier)

EPS_LADDER = (1e-2, 5e-3, 2.5e-3)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    name: str
    domain: BasisFamily
    codomain: BasisFamily
    entries: np.ndarray
    gram_dom: GramMatrix | None = None
    gram_cod: GramMatrix | None = None
    route: str = ""

    def __post_init__(self):
        M = np.asarray(self.entries, dtype=complex)
        if M.shape != (len(self.codomain), len(self.domain)):
            raise ValueError(f"{self.name}: shape {M.shape} does not match bases "
                             f"({len(self.codomain)}, {len(self.domain)})")
        object.__setattr__(self, "entries", M)

    @property
    def shape(self):
        return self.entries.shape

    def weighted(self) -> np.ndarray:
        """Matrix in orthonormal coordinates: L_cod^H M L_dom^-H, G = L L^H."""
        if self.gram_dom is None or self.gram_cod is None:
            raise ValueError(f"{self.name}: Gram matrices missing")
        Ld = _chol(self.gram_dom.entries)
        Lc = _chol(self.gram_cod.entries)
        X = Lc.conj().T @ self.entries
        return np.linalg.solve(Ld.conj(), X.T).T if Ld.size else X

    def singular_values(self) -> np.ndarray:
        W = self.weighted()
        if W.size == 0:
            return np.zeros(0)
        return np.linalg.svd(W, compute_uv=False)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return compose(self, other)


def _chol(G):
    if G.size == 0:
        return G
    return np.linalg.cholesky(G)


def weighted_norm(X: np.ndarray, gram_dom: GramMatrix, gram_cod: GramMatrix) -> float:
    """Frobenius norm of X in orthonormal coordinates."""
    if X.size == 0:
        return 0.0
    Ld, Lc = _chol(gram_dom.entries), _chol(gram_cod.entries)
    Y = Lc.conj().T @ X
    Y = np.linalg.solve(Ld.conj(), Y.T).T
    return float(np.linalg.norm(Y))


def adjoint(op: OperatorMatrix) -> OperatorMatrix:
    """Gram-weighted adjoint G_dom^-1 M^H G_cod."""
    if op.gram_dom is None or op.gram_cod is None:
        raise ValueError(f"{op.name}: adjoint needs both Gram matrices")
    Gd, Gc = op.gram_dom.entries, op.gram_cod.entries
    if op.entries.size == 0:
        A = np.zeros(op.entries.T.shape, dtype=complex)
    else:
        A = np.linalg.solve(Gd, op.entries.conj().T @ Gc)
    return OperatorMatrix(f"adj({op.name})", op.codomain, op.domain, A, op.gram_cod, op.gram_dom, "adjoint")


def conjugate(op: OperatorMatrix) -> OperatorMatrix:
    """conj X: alpha -> conj(X conj(alpha)), acting between conjugate bases."""
    gd = None if op.gram_dom is None else GramMatrix(op.domain.conjugate(), op.gram_dom.entries.conj(), op.gram_dom.route)
    gc = None if op.gram_cod is None else GramMatrix(op.codomain.conjugate(), op.gram_cod.entries.conj(), op.gram_cod.route)
    return OperatorMatrix(f"conj({op.name})", op.domain.conjugate(), op.codomain.conjugate(),
                          op.entries.conj(), gd, gc, op.route)


def compose(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """a o b."""
    if len(a.domain) != len(b.codomain):
        raise ValueError(f"cannot compose {a.name} after {b.name}")
    return OperatorMatrix(f"{a.name}*{b.name}", b.domain, a.codomain, a.entries @ b.entries,
                          b.gram_dom, a.gram_cod, "composite")


def identity(basis: BasisFamily, g: GramMatrix | None = None) -> OperatorMatrix:
    return OperatorMatrix("I", basis, basis, np.eye(len(basis)), g, g, "identity")


def apply(op: OperatorMatrix, v: FormVector) -> FormVector:
    if len(v.basis) != len(op.domain) or v.basis.chirality != op.domain.chirality:
        raise ValueError(f"{op.name}: form does not live in the domain basis")
    return FormVector(op.codomain, op.entries @ v.coefficients)


# ---------------------------------------------------------------- boundary route

def _fft_derivative(values, h):
    n = values.shape[-1]
    k = np.fft.fftfreq(n, d=h / (2 * np.pi))
    if n % 2 == 0:
        k[n // 2] = 0
    return np.fft.ifft(1j * k * np.fft.fft(values, axis=-1), axis=-1)


def _curve_samples(cx, ci, n):
    cv = cx.curves[ci]
    t, h = cv.nodes(n)
    w, dw = cv.point_and_tangent(t)
    return w, dw, h


def _density(elements, w, dw, h):
    """phi = dP/dw along the curve and its derivative, one row per element."""
    ratio = np.conj(dw) / dw
    phi = np.array([e.dpot(w) + np.conj(e.h(w)) * ratio for e in elements])
    dphi = _fft_derivative(phi, h) / dw
    return phi, dphi


def boundary_columns(dom: BasisFamily, cod_comp, cod_piece_id: int, cod_comp_idx: int, n_contour: int):
    """Values of T e-bar_n on each boundary curve of a codomain component,
    taken from the codomain side.  Returns {curve index: array (n_dom, n)}."""
    cx = dom.complex
    samples = {}
    for di, dcomp in enumerate(dom.components):
        els = [e for e in dom.elements if e.comp == di]
        for ci, sd in dcomp.boundary:
            w, dw, h = _curve_samples(cx, ci, n_contour)
            phi, dphi = _density(els, w, dw, h)
            samples[(di, ci)] = (sd, w, dw * h, phi, dphi)
    out = {}
    idx_by_comp = {}
    for j, e in enumerate(dom.elements):
        idx_by_comp.setdefault(e.comp, []).append(j)
    for ci, side in cod_comp.boundary:
        p, dp, hp = _curve_samples(cx, ci, n_contour)
        vals = np.zeros((len(dom), n_contour), dtype=complex)
        for di, dcomp in enumerate(dom.components):
            rows = idx_by_comp[di]
            acc = np.zeros((len(rows), n_contour), dtype=complex)
            for cj, sd in dcomp.boundary:
                _, w, dwh, phi, dphi = samples[(di, cj)]
                if cj == ci:
                    diff = w[None, :] - p[:, None]
                    np.fill_diagonal(diff, 1.0)
                    num = phi[:, None, :] - phi[:, :, None]  # (el, p, w)
                    quot = num / diff[None]
                    ii = np.arange(n_contour)
                    quot[:, ii, ii] = dphi
                    reg = np.einsum("epw,w->ep", quot, dwh) / (2j * np.pi)
                    acc += sd * (reg + (phi if side > 0 else 0))
                else:
                    acc += sd * (phi / 1.0) @ (dwh[:, None] / (w[:, None] - p[None, :])) / (2j * np.pi)
            if dom.piece_id == cod_piece_id and di == cod_comp_idx:
                acc -= np.array([dom.elements[j].dpot(p) for j in rows])
            vals[rows] = acc
        out[ci] = (side, p, dp * hp, vals)
    return out


def column_values(dom: BasisFamily, z, comp_idx: int | None = None, n_contour: int = 512):
    """T e-bar_n at points z off every curve (sphere pieces).

    comp_idx names the domain component containing z, or None when z lies
    outside the domain piece.  Returns an array (len(dom), len(z)).
    """
    cx = dom.complex
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros((len(dom), len(z)), dtype=complex)
    for di, dcomp in enumerate(dom.components):
        rows = [j for j, e in enumerate(dom.elements) if e.comp == di]
        els = [dom.elements[j] for j in rows]
        acc = np.zeros((len(rows), len(z)), dtype=complex)
        for ci, sd in dcomp.boundary:
            w, dw, h = _curve_samples(cx, ci, n_contour)
            phi, _ = _density(els, w, dw, h)
            acc += sd * phi @ ((dw * h)[:, None] / (w[:, None] - z[None, :])) / (2j * np.pi)
        if comp_idx == di:
            acc -= np.array([e.dpot(z) for e in els])
        out[rows] = acc
    return out


def _assemble_boundary(dom, cod, n_contour):
    cx = dom.complex
    B = np.zeros((len(cod), len(dom)), dtype=complex)
    for ci_comp, comp in enumerate(cod.components):
        rows = [m for m, e in enumerate(cod.elements) if e.comp == ci_comp]
        cols = boundary_columns(dom, comp, cod.piece_id, ci_comp, n_contour)
        for ci, (side, p, dph, vals) in cols.items():
            P = np.array([cod.elements[m].pot(p) for m in rows])
            B[rows] += side * (-1j) * (P * dph) @ vals.T
    return B


# ---------------------------------------------------------------- fourier route

def _log_Y(n, a, b):
    """log of integral_a^b exp(-4 pi n y) dy."""
    if n == 0:
        return np.log(b - a)
    k = 4 * np.pi * abs(n)
    lead = -k * a if n > 0 else k * b
    return lead + np.log(-np.expm1(-k * (b - a)) / k)


def _s(n, heights):
    return heights[0] if n > 0 else heights[1]


def _assemble_fourier(dom, cod):
    cx = dom.complex
    tau = complex(cx.surface.tau)
    H = tau.imag
    M = np.zeros((len(cod), len(dom)), dtype=complex)
    cod_index = {(e.comp, e.label[1]): m for m, e in enumerate(cod.elements)}
    for col, e in enumerate(dom.elements):
        a, b = dom.components[e.comp].heights
        n = e.label[1]
        for ci, ccomp in enumerate(cod.components):
            row = cod_index.get((ci, -n))
            if row is None:
                continue
            same = dom.piece_id == cod.piece_id and ci == e.comp
            if n == 0:
                M[row, col] = (1.0 if same else 0.0) - (b - a) / H
                continue
            norm = 2 * np.pi * n * _s(n, (a, b)) + 2 * np.pi * n * _s(-n, ccomp.heights)
            if same:
                lB = log_elliptic_fourier(np.array([abs(n)]), tau, False)[0]
                t1 = -np.exp(lB + _log_Y(n, a, b) + norm) / np.pi
                edge = -4 * np.pi * n * b if n > 0 else -4 * np.pi * n * a
                M[row, col] = t1 + np.exp(edge + norm)
            else:
                c, d = ccomp.heights
                target = 0.5 * (a + b - H)
                m = np.round((0.5 * (c + d) - target) / H)
                lf = log_elliptic_fourier(np.array([n]), tau, True)[0]
                lg = lf + _log_Y(n, a, b) + 2j * np.pi * n * m * tau + norm
                M[row, col] = -np.exp(lg) / np.pi
    return M


# ---------------------------------------------------------------- taylor route

def _assemble_taylor(dom, cod):
    (cap,) = dom.components
    rho = cap.radii[0]
    H = complex(dom.complex.surface.tau).imag
    M = np.zeros((len(cod), len(dom)), dtype=complex)
    index = {e.label: m for m, e in enumerate(cod.elements)}
    for col, e in enumerate(dom.elements):
        n = e.label[1]
        key = ("elliptic", n)
        if key not in index:
            raise ValueError("codomain truncation smaller than the domain truncation")
        M[index[key], col] = 1.0
        if n == 0:
            M[index[("dz", 0)], col] = -np.pi * rho / H
    return M


# ---------------------------------------------------------------- quadrature route

def _column_values_quadrature(dom, dgrids, cod_comp, z, same_comp_idx, chunk=200_000):
    """T e-bar_n at points z of a codomain component by area quadrature."""
    cx = dom.complex
    out = np.zeros((len(dom), len(z)), dtype=complex)
    for di, g in enumerate(dgrids):
        V = dom.values(g.nodes, di)  # conj(h) values
        Vw = V * g.weights
        dcomp = dom.components[di]
        step = max(1, chunk // len(g.nodes))
        for s in range(0, len(z), step):
            zz = z[s:s + step, None]
            if same_comp_idx == di:
                Lm = kernel_L_desing(cx.surface, dcomp, zz, g.nodes[None, :])
            else:
                Lm = kernel_L(cx.surface, zz, g.nodes[None, :])
            out[:, s:s + step] += -2j * Vw @ Lm.T
    return out


def _epsilon_exclusion_point(surface, comp, curve, z, elements, eps, nr, nt):
    """symmetric PV integral over a convex component about z, excluding |w - z| < eps."""
    th = 2 * np.pi * (np.arange(nt) + 0.5) / nt
    rmax = _ray_exit(curve, z, th)
    s, ws = np.polynomial.legendre.leggauss(nr)
    s = 0.5 * (s + 1)
    ws = 0.5 * ws
    # logarithmic radius absorbs the 1/r behaviour of the kernel times r dr
    span = np.log(rmax / eps)[None, :]
    r = eps * np.exp(s[:, None] * span)
    wts = ws[:, None] * span * r ** 2 * (2 * np.pi / nt)
    w = z + r * np.exp(1j * th)[None, :]
    L = kernel_L(surface, z, w)
    return np.array([-2j * np.sum(wts * L * np.conj(e.h(w))) for e in elements])


def _ray_exit(curve, z, th):
    """Distance from z to the boundary along directions th (circle, ellipse)."""
    d = np.exp(1j * th)
    c = complex(curve.center)
    if curve.kind == "circle":
        u = z - c
        bq = np.real(np.conj(u) * d)
        return -bq + np.sqrt(bq ** 2 - (abs(u) ** 2 - curve.radius ** 2))
    if curve.kind == "ellipse":
        A, B = curve.semi_axes
        u = z - c
        qa = (d.real / A) ** 2 + (d.imag / B) ** 2
        qb = 2 * (u.real * d.real / A ** 2 + u.imag * d.imag / B ** 2)
        qc = (u.real / A) ** 2 + (u.imag / B) ** 2 - 1
        return (-qb + np.sqrt(qb ** 2 - 4 * qa * qc)) / (2 * qa)
    raise GeometryError("epsilon exclusion needs a circle or ellipse boundary")


def epsilon_exclusion_values(surface, comp, curve, z, elements, eps_ladder=EPS_LADDER, nr=32, nt=128):
    """Richardson-extrapolated PV values at points z (error O(eps^2))."""
    vals = []
    for eps in eps_ladder:
        vals.append(np.array([_epsilon_exclusion_point(surface, comp, curve, zz, elements, eps, nr, nt)
                              for zz in np.atleast_1d(z)]).T)
    e = np.asarray(eps_ladder)
    # fit v(eps) = v0 + c1 eps^2 + c2 eps^4
    A = np.vander(e ** 2, 3, increasing=True)
    coef = np.linalg.solve(A, np.array(vals).reshape(3, -1))
    return coef[0].reshape(vals[0].shape)


def _assemble_quadrature(dom, cod, resolution, pv, eps_ladder):
    cx = dom.complex
    dgrids = piece_quadrature(cx, dom.piece_id, resolution)
    # offset codomain resolution keeps evaluation points off the domain nodes
    cgrids = piece_quadrature(cx, cod.piece_id, resolution + 3)
    B = np.zeros((len(cod), len(dom)), dtype=complex)
    for ci, g in enumerate(cgrids):
        same = ci if dom.piece_id == cod.piece_id else -1
        ccomp = cod.components[ci]
        if same >= 0 and pv == "exclusion":
            curve = cx.curves[ccomp.boundary[0][0]]
            els = [e for e in dom.elements if e.comp == ci]
            rows = [j for j, e in enumerate(dom.elements) if e.comp == ci]
            vals = np.zeros((len(dom), len(g.nodes)), dtype=complex)
            vals[rows] = epsilon_exclusion_values(cx.surface, ccomp, curve, g.nodes, els, eps_ladder)
            others = [j for j, e in enumerate(dom.elements) if e.comp != ci]
            if others:
                vals[others] = _column_values_quadrature(dom, dgrids, ccomp, g.nodes, -1)[others]
        else:
            vals = _column_values_quadrature(dom, dgrids, ccomp, g.nodes, same)
        V = cod.values(g.nodes, ci)
        B += 2 * (np.conj(V) * g.weights) @ vals.T
    return B


# ---------------------------------------------------------------- assembly entry points

def default_route(cx: SeparatingComplex, j: int, k: int) -> str:
    if cx.surface.kind == "sphere":
        return "boundary"
    kinds_j = {c.kind for c in cx.piece(j).components}
    kinds_k = {c.kind for c in cx.piece(k).components}
    if kinds_j == kinds_k == {"band"}:
        return "fourier"
    if kinds_j == {"cap"} and kinds_k == {"torus_complement"}:
        return "taylor"
    return "quadrature"


def assemble_T(cx: SeparatingComplex, j: int, k: int, dom: BasisFamily | None = None,
               cod: BasisFamily | None = None, N: int = 16, route: str | None = None,
               n_contour: int = 512, resolution: int = 32, pv: str = "desingularize",
               eps_ladder=EPS_LADDER) -> OperatorMatrix:
    """Galerkin matrix of T(j, k): conj A(piece j) -> A(piece k)."""
    dom = dom if dom is not None else make_basis(cx, j, "antiholomorphic", N)
    cod = cod if cod is not None else make_basis(cx, k, "holomorphic", N)
    if dom.holomorphic or not cod.holomorphic:
        raise ValueError("T maps an antiholomorphic basis to a holomorphic one")
    route = route or default_route(cx, j, k)
    if route == "boundary":
        if cx.surface.kind != "sphere":
            raise GeometryError("the boundary route needs a sphere configuration")
        gd = gram(dom, route="boundary", n_contour=n_contour)
        gc = gram(cod, route="boundary", n_contour=n_contour)
        M = np.linalg.solve(gc.entries, _assemble_boundary(dom, cod, n_contour))
    elif route == "fourier":
        gd, gc = gram(dom, route="closed"), gram(cod, route="closed")
        M = _assemble_fourier(dom, cod)
    elif route == "taylor":
        gd = gram(dom, route="boundary", n_contour=n_contour)
        gc = gram(cod, route="boundary", n_contour=n_contour)
        M = _assemble_taylor(dom, cod)
    elif route == "quadrature":
        if j == k and pv == "desingularize":
            for comp in cx.piece(j).components:
                try:
                    kernel_L_desing(cx.surface, comp, np.array([comp.center]), np.array([comp.center + 1e-3]))
                except GeometryError:
                    pv = "exclusion"
        gd = gram(dom, route="area", resolution=resolution)
        gc = gram(cod, route="area", resolution=resolution)
        M = np.linalg.solve(gc.entries, _assemble_quadrature(dom, cod, resolution, pv, eps_ladder))
    else:
        raise ValueError(f"unknown assembly route {route!r}")
    return OperatorMatrix(f"T({j},{k})", dom, cod, M, gd, gc, route)


def assemble_S(cx: SeparatingComplex, k: int, dom: BasisFamily | None = None, N: int = 16,
               resolution: int = 48) -> OperatorMatrix:
    """Galerkin matrix of S_k: A(piece k) -> A(surface)."""
    dom = dom if dom is not None else make_basis(cx, k, "holomorphic", N)
    cod = global_basis(cx)
    gd = gram(dom)
    gc = gram(cod)
    if len(cod) == 0:
        return OperatorMatrix(f"S({k})", dom, cod, np.zeros((0, len(dom))), gd, gc, "quadrature")
    grids = piece_quadrature(cx, k, resolution)
    row = np.zeros(len(dom), dtype=complex)
    z0 = np.array([0.0j])
    for i, g in enumerate(grids):
        K = kernel_K_global(cx.surface, z0, g.nodes)
        row += (2j * K * dom.values(g.nodes, i) * g.weights).sum(axis=-1)
    return OperatorMatrix(f"S({k})", dom, cod, row[None, :], gd, gc, "quadrature")


def assemble_R(cx: SeparatingComplex, k: int, cod: BasisFamily | None = None, N: int = 16,
               resolution: int = 48) -> OperatorMatrix:
    """Galerkin matrix of the restriction R_k: A(surface) -> A(piece k)."""
    cod = cod if cod is not None else make_basis(cx, k, "holomorphic", N)
    dom = global_basis(cx)
    gd, gc = gram(dom), gram(cod)
    if len(dom) == 0:
        return OperatorMatrix(f"R({k})", dom, cod, np.zeros((len(cod), 0)), gd, gc, "restriction")
    grids = piece_quadrature(cx, k, resolution)
    b = np.zeros(len(cod), dtype=complex)
    for i, g in enumerate(grids):
        V = cod.values(g.nodes, i)
        b += 2 * (np.conj(V) * g.weights).sum(axis=-1)
    ga = gram(cod, grids)
    col = np.linalg.solve(ga.entries, b)
    return OperatorMatrix(f"R({k})", dom, cod, col[:, None], gd, gc, "restriction")


# ---------------------------------------------------------------- dumps

def _basis_label(b: BasisFamily):
    return {"piece": b.piece_id, "chirality": b.chirality, "kind": b.kind, "size": len(b)}


def matrix_to_json(op: OperatorMatrix) -> str:
    ent = [[[float(v.real), float(v.imag)] for v in row] for row in op.entries]
    return json.dumps({"name": op.name, "domain": _basis_label(op.domain), "codomain": _basis_label(op.codomain),
                       "shape": list(op.shape), "entries": ent}, sort_keys=True)


def matrix_from_json(text: str) -> np.ndarray:
    d = json.loads(text)
    E = np.array(d["entries"], dtype=float).reshape(d["shape"] + [2]) if d["entries"] else np.zeros(d["shape"] + [2])
    return E[..., 0] + 1j * E[..., 1]


def matrix_to_csv(op: OperatorMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "re", "im"])
    for (r, c), v in np.ndenumerate(op.entries):
        w.writerow([r, c, repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()
