"""Surfaces, separating curves, pieces, quadrature grids and homology cycles.

Supported configurations form a closed list:

* sphere cut by one closed curve (circle, ellipse, polygon, cusp);
* sphere cut by two concentric circles (annulus versus its complement);
* torus cut by an even number of horizontal circles (bands);
* torus cut by one contractible circle (a cap and its complement).

Sphere configurations may additionally be pushed forward by a Mobius map.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .mobius import IDENTITY, Mobius

DISJOINT_TOL = 1e-6


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceDescriptor:
    kind: str = "sphere"
    tau: complex = 1j

    def __post_init__(self):
        if self.kind not in ("sphere", "torus"):
            raise GeometryError(f"unknown surface kind {self.kind!r}")
        if self.kind == "torus" and not complex(self.tau).imag > 0:
            raise GeometryError("torus modulus needs Im tau > 0")

    @property
    def genus(self) -> int:
        return 0 if self.kind == "sphere" else 1

    @property
    def area(self) -> float:
        """Area of the flat fundamental domain (torus only)."""
        return float(complex(self.tau).imag) if self.kind == "torus" else np.inf


# ---------------------------------------------------------------- curves

def kress_grading(s, p: int = 6):
    """Sigmoidal change of variable on [0, 2pi] flattening both ends.

    Returns (t, dt/ds). Derivatives of order < p vanish at s = 0 and 2pi.
    """
    s = np.asarray(s, dtype=float)

    def v(x):
        return (1 / p - 0.5) * ((np.pi - x) / np.pi) ** 3 + (x - np.pi) / (p * np.pi) + 0.5

    def dv(x):
        return -3 * (1 / p - 0.5) * (np.pi - x) ** 2 / np.pi ** 3 + 1 / (p * np.pi)

    a, b = v(s) ** p, v(2 * np.pi - s) ** p
    da = p * v(s) ** (p - 1) * dv(s)
    db = -p * v(2 * np.pi - s) ** (p - 1) * dv(2 * np.pi - s)
    t = 2 * np.pi * a / (a + b)
    dt = 2 * np.pi * (da * b - a * db) / (a + b) ** 2
    return t, dt


@dataclass(frozen=True)
class CurveSpec:
    """A parametrized simple closed curve, t in [0, 2pi).

    Planar curves run counterclockwise around their bounded side.  Horizontal
    torus circles run in the direction of increasing Re z.
    """
    kind: str
    center: complex = 0.0
    radius: float = 1.0
    semi_axes: tuple = (1.0, 1.0)
    vertices: tuple = ()
    alpha: float = 1.5
    height: float = 0.0
    samples: int = 256
    chart: Mobius = IDENTITY

    def __post_init__(self):
        k = self.kind
        if k not in ("circle", "ellipse", "polygon", "cusp", "horizontal_torus_circle"):
            raise GeometryError(f"unknown curve kind {k!r}")
        if k == "circle" and not self.radius > 0:
            raise GeometryError("circle radius must be positive")
        if k == "ellipse":
            a, b = self.semi_axes
            if not (a >= b > 0):
                raise GeometryError("ellipse needs semi-axes a >= b > 0")
        if k == "cusp" and not self.alpha > 1:
            raise GeometryError("cusp sharpness exponent must exceed 1")
        if k == "polygon" and len(self.vertices) < 3:
            raise GeometryError("polygon needs at least three vertices")

    # graded curves have corners or cusps; nodes then avoid t = 0
    @property
    def graded(self) -> bool:
        return self.kind in ("polygon", "cusp")

    @property
    def planar(self) -> bool:
        return self.kind != "horizontal_torus_circle"

    def _raw(self, t):
        t = np.asarray(t, dtype=float)
        c = complex(self.center)
        if self.kind == "circle":
            e = np.exp(1j * t)
            return c + self.radius * e, 1j * self.radius * e
        if self.kind == "ellipse":
            a, b = self.semi_axes
            return c + a * np.cos(t) + 1j * b * np.sin(t), -a * np.sin(t) + 1j * b * np.cos(t)
        if self.kind == "horizontal_torus_circle":
            return t / (2 * np.pi) + 1j * self.height + 0 * c, np.full(t.shape, 1 / (2 * np.pi), dtype=complex)
        if self.kind == "cusp":
            # tip at c + 1, |y| ~ (distance to tip)^alpha near it
            p = 2 * self.alpha - 1
            sh = np.abs(np.sin(t / 2))
            x, dx = np.cos(t), -np.sin(t)
            y = np.sin(t) * sh ** p
            dy = np.cos(t) * sh ** p + np.sin(t) * p * sh ** (p - 1) * np.cos(t / 2) / 2 * np.sign(np.sin(t / 2))
            return c + self.radius * (x + 1j * y), self.radius * (dx + 1j * dy)
        # polygon: side k occupies t in [2pi k/m, 2pi (k+1)/m]
        v = np.asarray(self.vertices, dtype=complex)
        m = len(v)
        u = (t % (2 * np.pi)) * m / (2 * np.pi)
        k = np.minimum(np.floor(u).astype(int), m - 1)
        f = u - k
        g = f - np.sin(2 * np.pi * f) / (2 * np.pi)
        dg = (1 - np.cos(2 * np.pi * f)) * m / (2 * np.pi)
        a, b = v[k], v[(k + 1) % m]
        return a + (b - a) * g, (b - a) * dg

    def point_and_tangent(self, t):
        """Curve point and d/dt, including the Mobius chart if any."""
        t = np.asarray(t, dtype=float)
        if self.kind == "cusp":
            tt, dtt = kress_grading(t % (2 * np.pi))
            w, dw = self._raw(tt)
            dw = dw * dtt
        else:
            w, dw = self._raw(t)
        if not self.chart.is_identity():
            dw = dw * self.chart.deriv(w)
            w = self.chart(w)
        return w, dw

    def point(self, t):
        return self.point_and_tangent(t)[0]

    def nodes(self, n: int):
        """Equispaced parameter nodes (offset by half a step for graded curves)."""
        h = 2 * np.pi / n
        t = h * np.arange(n) + (0.5 * h if self.graded else 0.0)
        return t, h

    def pushed(self, m: Mobius) -> "CurveSpec":
        return replace(self, chart=m.compose(self.chart))


def winding_number(curve: CurveSpec, z, n: int = 2048):
    t, h = curve.nodes(n)
    w, dw = curve.point_and_tangent(t)
    z = np.asarray(z, dtype=complex)
    val = np.sum(dw / (w - z[..., None]), axis=-1) * h / (2j * np.pi)
    return np.rint(val.real).astype(int)


def _segments_cross(p, q):
    """Any proper crossing between non-adjacent segments of polyline p and q."""
    a, b = p[:-1], p[1:]
    c, d = q[:-1], q[1:]

    o1 = np.sign(np.imag(np.conj(b - a)[:, None] * (c[None, :] - a[:, None])))
    o2 = np.sign(np.imag(np.conj(b - a)[:, None] * (d[None, :] - a[:, None])))
    o3 = np.sign(np.imag(np.conj(d - c)[None, :] * (a[:, None] - c[None, :])))
    o4 = np.sign(np.imag(np.conj(d - c)[None, :] * (b[:, None] - c[None, :])))
    return (o1 * o2 < 0) & (o3 * o4 < 0)


def check_simple(curve: CurveSpec) -> None:
    if not curve.planar:
        return
    n = curve.samples
    w = curve.point(curve.nodes(n)[0])
    p = np.append(w, w[0])
    cross = _segments_cross(p, p)
    i, j = np.nonzero(cross)
    bad = np.abs(i - j) > 1
    bad &= ~(((i == 0) & (j == n - 1)) | ((j == 0) & (i == n - 1)))
    if np.any(bad):
        raise GeometryError(f"curve {curve.kind} self-intersects at sample resolution")


def _torus_distance(z, w, tau):
    """Distance on the flat torus C / (Z + tau Z)."""
    d = np.asarray(z)[:, None] - np.asarray(w)[None, :]
    t = complex(tau)
    k = np.round(d.imag / t.imag)
    d = d - k * t
    d = d - np.round(d.real)
    best = np.abs(d)
    for s in (-1, 1):
        best = np.minimum(best, np.abs(d + s * t - np.round((d + s * t).real)))
        best = np.minimum(best, np.abs(d + s))
    return best


# ---------------------------------------------------------------- pieces

@dataclass(frozen=True)
class ComponentDescriptor:
    """One connected component of a piece.

    boundary: tuple of (curve index, side) with side = +1 when the
    component lies to the left of the curve's parametrization.
    """
    kind: str  # interior, exterior, annulus, band, cap, torus_complement
    boundary: tuple
    genus: int = 0
    center: complex = 0.0
    radii: tuple = ()
    heights: tuple = ()
    chart: Mobius = IDENTITY
    round: bool = True  # every boundary curve is a circle, so model maps are explicit

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)


@dataclass(frozen=True)
class PieceDescriptor:
    id: int
    components: tuple

    @property
    def genus(self) -> int:
        return sum(c.genus for c in self.components)

    @property
    def n_boundary(self) -> int:
        return sum(c.n_boundary for c in self.components)

    @property
    def connected(self) -> bool:
        return len(self.components) == 1

    @property
    def is_capped_by_disks(self) -> bool:
        return all(c.kind in ("interior", "cap") for c in self.components)


@dataclass(frozen=True)
class SeparatingComplex:
    surface: SurfaceDescriptor
    curves: tuple
    sides: dict
    pieces: tuple = field(default=())
    chart: Mobius = IDENTITY

    @property
    def sigma1(self) -> PieceDescriptor:
        return self.pieces[0]

    @property
    def sigma2(self) -> PieceDescriptor:
        return self.pieces[1]

    def piece(self, k: int) -> PieceDescriptor:
        return self.pieces[k - 1]

    @property
    def genus(self) -> int:
        return self.surface.genus

    @property
    def n_curves(self) -> int:
        return len(self.curves)

    def euler_check(self) -> bool:
        """2 - 2g equals the sum of component Euler characteristics."""
        chi = sum(2 - 2 * c.genus - c.n_boundary for p in self.pieces for c in p.components)
        return chi == 2 - 2 * self.genus

    def topological_relation(self) -> bool:
        """g = g1 + g2 + n - 1 (both pieces connected)."""
        g1, g2 = self.sigma1.genus, self.sigma2.genus
        return self.genus == g1 + g2 + self.n_curves - 1


def _sphere_pieces(curves, sides, chart=IDENTITY):
    if len(curves) == 1:
        cv = curves[0]
        if not cv.planar:
            raise GeometryError("sphere curves must be planar")
        which = sides.get("sigma1", "interior")
        c = complex(cv.center)
        rd = cv.kind == "circle"
        inner = ComponentDescriptor("interior", ((0, +1),), center=c, radii=(cv.radius,), chart=chart, round=rd)
        outer = ComponentDescriptor("exterior", ((0, -1),), center=c, radii=(cv.radius,), chart=chart, round=rd)
        if which == "interior":
            return (PieceDescriptor(1, (inner,)), PieceDescriptor(2, (outer,)))
        if which == "exterior":
            return (PieceDescriptor(1, (outer,)), PieceDescriptor(2, (inner,)))
        raise GeometryError(f"bad side assignment {which!r}")
    if len(curves) == 2:
        a, b = curves
        if a.kind != "circle" or b.kind != "circle" or abs(complex(a.center) - complex(b.center)) > 1e-12:
            raise GeometryError("two-curve sphere configurations need concentric circles")
        if a.radius > b.radius:
            raise GeometryError("list the inner circle first")
        c = complex(a.center)
        which = sides.get("sigma1", "annulus")
        ann = ComponentDescriptor("annulus", ((0, -1), (1, +1)), center=c, radii=(a.radius, b.radius), chart=chart)
        disk = ComponentDescriptor("interior", ((0, +1),), center=c, radii=(a.radius,), chart=chart)
        ext = ComponentDescriptor("exterior", ((1, -1),), center=c, radii=(b.radius,), chart=chart)
        if which == "annulus":
            return (PieceDescriptor(1, (ann,)), PieceDescriptor(2, (disk, ext)))
        if which == "complement":
            return (PieceDescriptor(1, (disk, ext)), PieceDescriptor(2, (ann,)))
        raise GeometryError(f"bad side assignment {which!r}")
    raise GeometryError("sphere configurations take one curve or two concentric circles")


def _torus_pieces(surface, curves, sides):
    tau = complex(surface.tau)
    if all(c.kind == "horizontal_torus_circle" for c in curves):
        k = len(curves)
        if k < 2 or k % 2:
            raise GeometryError("horizontal torus circles separate only in even numbers")
        hs = [c.height % tau.imag for c in curves]
        order = np.argsort(hs)
        hs_sorted = [hs[i] for i in order]
        if np.min(np.diff(hs_sorted + [hs_sorted[0] + tau.imag])) < DISJOINT_TOL:
            raise GeometryError("torus circles intersect")
        parity = sides.get("sigma1", "even")
        if parity not in ("even", "odd"):
            raise GeometryError(f"bad side assignment {parity!r}")
        bands = ([], [])
        for j in range(k):
            lo, hi = order[j], order[(j + 1) % k]
            y0 = hs_sorted[j]
            y1 = hs_sorted[(j + 1) % k] + (tau.imag if j == k - 1 else 0.0)
            # band lies left of its lower curve and right of its upper one
            comp = ComponentDescriptor("band", ((int(lo), +1), (int(hi), -1)), heights=(y0, y1))
            first = (j % 2 == 0) == (parity == "even")
            bands[0 if first else 1].append(comp)
        return (PieceDescriptor(1, tuple(bands[0])), PieceDescriptor(2, tuple(bands[1])))
    if len(curves) == 1 and curves[0].kind == "circle":
        cv = curves[0]
        r = cv.radius
        if 2 * r >= min(1.0, tau.imag, abs(tau), abs(tau - 1), abs(tau + 1)):
            raise GeometryError("contractible circle too large for the fundamental domain")
        c = complex(cv.center)
        cap = ComponentDescriptor("cap", ((0, +1),), center=c, radii=(r,))
        rest = ComponentDescriptor("torus_complement", ((0, -1),), genus=1, center=c, radii=(r,))
        which = sides.get("sigma1", "cap")
        if which == "cap":
            return (PieceDescriptor(1, (cap,)), PieceDescriptor(2, (rest,)))
        if which == "complement":
            return (PieceDescriptor(1, (rest,)), PieceDescriptor(2, (cap,)))
        raise GeometryError(f"bad side assignment {which!r}")
    if len(curves) == 1 and curves[0].kind == "horizontal_torus_circle":
        raise GeometryError("a single non-contractible circle does not separate the torus")
    raise GeometryError("unsupported torus configuration")


def build_complex(surface: SurfaceDescriptor, curves: Sequence[CurveSpec], sides: dict | None = None) -> SeparatingComplex:
    """Validate curves and side assignment; return the complex with its pieces."""
    sides = dict(sides or {})
    curves = tuple(curves)
    if not curves:
        raise GeometryError("need at least one curve")
    for cv in curves:
        check_simple(cv)
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            a = curves[i].point(curves[i].nodes(curves[i].samples)[0])
            b = curves[j].point(curves[j].nodes(curves[j].samples)[0])
            if surface.kind == "torus":
                d = _torus_distance(a, b, surface.tau)
            else:
                d = np.abs(a[:, None] - b[None, :])
            if np.min(d) < DISJOINT_TOL:
                raise GeometryError(f"curves {i} and {j} intersect")
    if surface.kind == "sphere":
        if any(not c.planar for c in curves):
            raise GeometryError("horizontal torus circles need a torus surface")
        pieces = _sphere_pieces(curves, sides)
    else:
        pieces = _torus_pieces(surface, curves, sides)
    cx = SeparatingComplex(surface, curves, sides, pieces)
    if not cx.euler_check():
        raise GeometryError("Euler characteristic mismatch")
    return cx


def mobius_transform(cx: SeparatingComplex, m) -> SeparatingComplex:
    """Push a sphere configuration forward by a Mobius map."""
    if cx.surface.kind != "sphere":
        raise GeometryError("Mobius transforms apply to sphere configurations only")
    if not isinstance(m, Mobius):
        m = Mobius.normalized(*m)
    chart = m.compose(cx.chart)
    curves = tuple(c.pushed(m) for c in cx.curves)
    base = tuple(replace(c, chart=IDENTITY) for c in cx.curves)
    pieces = tuple(PieceDescriptor(p.id, tuple(replace(c, chart=chart) for c in p.components))
                   for p in _sphere_pieces(base, cx.sides))
    return SeparatingComplex(cx.surface, curves, cx.sides, pieces, chart=chart)


# ---------------------------------------------------------------- quadrature

@dataclass(frozen=True)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    target: object = None
    tangents: np.ndarray | None = None  # dz/dt at contour nodes

    @property
    def dz(self):
        """Complex line elements for contour grids."""
        return self.weights * self.tangents

    def integrate(self, values):
        values = np.asarray(values)
        if self.kind == "contour":
            return np.sum(values * self.dz, axis=-1)
        return np.sum(values * self.weights, axis=-1)


def _gl(n, a, b):
    x, w = leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def contour_quadrature(curve: CurveSpec, n: int) -> QuadratureGrid:
    if n < 8:
        raise GeometryError("contour quadrature needs n >= 8")
    t, h = curve.nodes(n)
    w, dw = curve.point_and_tangent(t)
    return QuadratureGrid(w, np.full(n, h), "contour", curve, dw)


def _star_grid(curve, center, resolution, exterior):
    nt = max(4 * resolution, 64)
    t, h = curve.nodes(nt)
    g, dg = curve.point_and_tangent(t)
    jac = np.imag(np.conj(g - center) * dg)
    if np.any(jac <= 0):
        raise GeometryError("piece is not star-shaped about its center")
    s, ws = _gl(resolution, 0.0, 1.0)
    S, T = np.meshgrid(s, np.arange(nt), indexing="ij")
    G, J = (g - center)[None, :], jac[None, :]
    if exterior:
        nodes = center + G / s[:, None]
        weights = (ws / s ** 3)[:, None] * J * h
    else:
        nodes = center + s[:, None] * G
        weights = (ws * s)[:, None] * J * h
    return nodes.ravel(), weights.ravel()


def _polar(center, r0, r1, nr, nt, theta=None):
    r, wr = _gl(nr, r0, r1)
    if theta is None:
        th = 2 * np.pi * np.arange(nt) / nt
        wt = np.full(nt, 2 * np.pi / nt)
    else:
        th, wt = theta
    nodes = center + r[:, None] * np.exp(1j * th)[None, :]
    weights = (wr * r)[:, None] * wt[None, :]
    return nodes.ravel(), weights.ravel()


def _torus_complement_grid(surface, comp, resolution):
    """Fundamental rectangle minus a square patch, plus a polar patch
    covering square-minus-disk split into eight angular sectors."""
    tau = complex(surface.tau)
    if abs(tau.real) > 1e-14:
        raise GeometryError("torus-minus-disk quadrature supports rectangular tori only")
    H = tau.imag
    c, rho = complex(comp.center), comp.radii[0]
    half = min(0.5, H / 2) * 0.8
    half = max(half, 1.5 * rho)
    cx, cy = c.real, c.imag
    x0, x1, y0, y1 = cx - 0.5, cx + 0.5, cy - H / 2, cy + H / 2
    nodes, weights = [], []

    def rect(a, b, cc, d):
        if b - a <= 0 or d - cc <= 0:
            return
        nx = max(8, int(np.ceil(resolution * (b - a) / (2 * half))) + 4)
        ny = max(8, int(np.ceil(resolution * (d - cc) / (2 * half))) + 4)
        x, wx = _gl(nx, a, b)
        y, wy = _gl(ny, cc, d)
        nodes.append((x[:, None] + 1j * y[None, :]).ravel())
        weights.append((wx[:, None] * wy[None, :]).ravel())

    sx0, sx1, sy0, sy1 = cx - half, cx + half, cy - half, cy + half
    rect(x0, x1, y0, sy0)
    rect(x0, x1, sy1, y1)
    rect(x0, sx0, sy0, sy1)
    rect(sx1, x1, sy0, sy1)
    # square minus disk: sectors between consecutive corner/axis directions
    edges = np.pi / 4 * np.arange(9)
    for k in range(8):
        th, wt = _gl(resolution, edges[k], edges[k + 1])
        rmax = half / np.maximum(np.abs(np.cos(th)), np.abs(np.sin(th)))
        s, ws = _gl(resolution, 0.0, 1.0)
        r = rho + s[:, None] * (rmax - rho)[None, :]
        jac = (rmax - rho)[None, :] * r
        nodes.append((c + r * np.exp(1j * th)[None, :]).ravel())
        weights.append((ws[:, None] * wt[None, :] * jac).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def area_quadrature(comp: ComponentDescriptor, resolution: int = 32,
                    surface: SurfaceDescriptor | None = None,
                    curves: Sequence[CurveSpec] | None = None) -> QuadratureGrid:
    """Tensor-product area grid for one component of a piece."""
    kind = comp.kind
    if comp.chart is not None and not comp.chart.is_identity():
        model = replace(comp, chart=IDENTITY)
        base_curves = None if curves is None else [replace(c, chart=IDENTITY) for c in curves]
        g = area_quadrature(model, resolution, surface, base_curves)
        m = comp.chart
        return QuadratureGrid(m(g.nodes), g.weights * np.abs(m.deriv(g.nodes)) ** 2, "area", comp)
    nt = max(4 * resolution, 64)
    c = complex(comp.center)
    if kind in ("interior", "exterior"):
        curve = curves[comp.boundary[0][0]] if curves is not None else None
        if curve is None or curve.kind == "circle":
            R = comp.radii[0]
            if kind == "interior":
                nodes, w = _polar(c, 0.0, R, resolution, nt)
            else:
                # r = R / s
                s, ws = _gl(resolution, 0.0, 1.0)
                th = 2 * np.pi * np.arange(nt) / nt
                nodes = (c + (R / s)[:, None] * np.exp(1j * th)[None, :]).ravel()
                w = ((ws * R ** 2 / s ** 3)[:, None] * np.full(nt, 2 * np.pi / nt)[None, :]).ravel()
        else:
            nodes, w = _star_grid(curve, c, resolution, kind == "exterior")
    elif kind == "cap":
        nodes, w = _polar(c, 0.0, comp.radii[0], resolution, nt)
    elif kind == "annulus":
        nodes, w = _polar(c, comp.radii[0], comp.radii[1], resolution, nt)
    elif kind == "band":
        y0, y1 = comp.heights
        y, wy = _gl(resolution, y0, y1)
        nx = max(2 * resolution, 32)
        x = np.arange(nx) / nx
        nodes = (x[None, :] + 1j * y[:, None]).ravel()
        w = (wy[:, None] * np.full(nx, 1.0 / nx)[None, :]).ravel()
    elif kind == "torus_complement":
        if surface is None:
            raise GeometryError("torus-minus-disk quadrature needs the surface")
        nodes, w = _torus_complement_grid(surface, comp, resolution)
    else:
        raise GeometryError(f"unsupported piece shape {kind!r}")
    return QuadratureGrid(np.asarray(nodes), np.asarray(w), "area", comp)


def piece_quadrature(cx: SeparatingComplex, k: int, resolution: int = 32):
    """Area grids, one per component of piece k."""
    return [area_quadrature(c, resolution, cx.surface, cx.curves) for c in cx.piece(k).components]


# ---------------------------------------------------------------- cycles

@dataclass(frozen=True)
class Cycle:
    label: str  # 'boundary' or 'A' / 'B'
    ref: object  # curve index or internal index
    nodes: np.ndarray
    dz: np.ndarray

    def integrate(self, values):
        return np.sum(np.asarray(values) * self.dz, axis=-1)


@dataclass(frozen=True)
class CycleSet:
    cycles: tuple

    def boundary(self):
        return [c for c in self.cycles if c.label == "boundary"]

    def internal(self):
        return [c for c in self.cycles if c.label != "boundary"]

    @property
    def rank(self) -> int:
        """Rank of first homology of the piece these cycles live in."""
        nb = len(self.boundary())
        return len(self.internal()) + max(nb - 1, 0) if nb else len(self.internal())


def _line(z0, z1, n):
    t = (np.arange(n) + 0.5) / n
    return z0 + t * (z1 - z0), np.full(n, (z1 - z0) / n)


def homology_cycles(cx: SeparatingComplex, k: int, n: int = 256, offset: float = 0.05) -> CycleSet:
    """Boundary-isotopic cycles (pushed slightly into the piece) and internal
    torus cycles contained in piece k, oriented as boundary of the piece."""
    out = []
    for comp in cx.piece(k).components:
        for ci, side in comp.boundary:
            cv = cx.curves[ci]
            t, h = np.arange(n) * 2 * np.pi / n, 2 * np.pi / n
            if cv.kind == "horizontal_torus_circle":
                y = cv.height % complex(cx.surface.tau).imag
                lo, hi = comp.heights
                yy = lo + offset * (hi - lo) if side > 0 else hi - offset * (hi - lo)
                x = np.arange(n) / n
                nodes = x + 1j * yy
                dz = np.full(n, 1.0 / n) * side
                out.append(Cycle("boundary", ci, nodes, dz))
                continue
            base = replace(cv, chart=IDENTITY)
            w, dw = base.point_and_tangent(base.nodes(n)[0])
            c = complex(comp.center)
            # inside the component: shrink toward center if the component is on the left
            inward = (comp.kind in ("interior", "cap")) or (comp.kind == "annulus" and side > 0)
            f = 1 - offset if inward else 1 + offset
            wm, dwm = c + f * (w - c), f * dw
            if not comp.chart.is_identity():
                dwm = dwm * comp.chart.deriv(wm)
                wm = comp.chart(wm)
            out.append(Cycle("boundary", ci, wm, dwm * h * side))
    if cx.surface.kind == "torus" and any(c.genus for c in cx.piece(k).components):
        comp = [c for c in cx.piece(k).components if c.genus][0]
        tau = complex(cx.surface.tau)
        c = complex(comp.center)
        ya = c.imag + tau.imag / 2
        za = 1j * ya + tau.real * (ya / tau.imag)
        nodes, dz = _line(za, za + 1, n)
        out.append(Cycle("A", 0, nodes, dz))
        xb = c.real + 0.5 - tau.real * (c.imag / tau.imag)
        nodes, dz = _line(xb, xb + tau, n)
        out.append(Cycle("B", 1, nodes, dz))
    return CycleSet(tuple(out))


def intersection_number(a: Cycle, b: Cycle) -> int:
    """Signed intersection number of two straight torus cycles."""
    da, db = np.sum(a.dz), np.sum(b.dz)
    return int(np.sign(np.imag(np.conj(da) * db)))
