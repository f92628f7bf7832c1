"""Harmonic functions on circle-bounded pieces, overfare across circles, and
the Cauchy-Royden operator.

A harmonic function on a component is stored in modal form

    h = const + sum_k A_k u_k + sum_k B_k conj(u_k) + C * ell

with u_k = zeta^k, zeta = (z - c) / R, on sphere components and
u_k = exp(2 pi i k (z - i s_k)) on torus bands (s_k the lower height for
k > 0 and the upper one for k < 0, so every mode is bounded by one on the
band).  ell is log|zeta| or Im z - y0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import GeometryError, SeparatingComplex
from .kernels import dlog_theta1, laplacian_fd, wirtinger

LEVELS = (0.9, 0.95, 0.975)
TAIL_TOL = 1e-11


@dataclass(frozen=True, eq=False)
class ModalFunction:
    kind: str  # 'sphere' or 'band'
    center: complex = 0.0
    scale: float = 1.0
    heights: tuple = (0.0, 1.0)
    hol: dict = field(default_factory=dict)
    anti: dict = field(default_factory=dict)
    log: complex = 0.0
    const: complex = 0.0

    def _u(self, k, z):
        if self.kind == "sphere":
            return ((z - self.center) / self.scale) ** k
        if k == 0:
            return np.ones_like(z)
        s = self.heights[0] if k > 0 else self.heights[1]
        return np.exp(2j * np.pi * k * (z - 1j * s))

    def _du(self, k, z):
        if self.kind == "sphere":
            return k * ((z - self.center) / self.scale) ** (k - 1) / self.scale if k else np.zeros_like(z)
        return 2j * np.pi * k * self._u(k, z)

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        v = np.full(z.shape, self.const, dtype=complex)
        for k, a in self.hol.items():
            v = v + a * self._u(k, z)
        for k, b in self.anti.items():
            v = v + b * np.conj(self._u(k, z))
        if self.log:
            ell = np.log(np.abs((z - self.center) / self.scale)) if self.kind == "sphere" else np.imag(z) - self.heights[0]
            v = v + self.log * ell
        return v

    def d(self, z):
        """dz coefficient of dh."""
        z = np.asarray(z, dtype=complex)
        v = np.zeros(z.shape, dtype=complex)
        for k, a in self.hol.items():
            v = v + a * self._du(k, z)
        if self.log:
            v = v + self.log * (1 / (2 * (z - self.center)) if self.kind == "sphere" else -0.5j)
        return v

    def dbar(self, z):
        """dz-bar coefficient of dh."""
        z = np.asarray(z, dtype=complex)
        v = np.zeros(z.shape, dtype=complex)
        for k, b in self.anti.items():
            v = v + b * np.conj(self._du(k, z))
        if self.log:
            v = v + self.log * (1 / (2 * np.conj(z - self.center)) if self.kind == "sphere" else 0.5j)
        return v


@dataclass(frozen=True, eq=False)
class PieceFunction:
    """A function on a piece, one callable triple per component."""
    complex: SeparatingComplex
    piece_id: int
    parts: tuple  # ModalFunction or any object with value/d/dbar

    def value(self, z, comp: int = 0):
        return self.parts[comp].value(z)

    def d(self, z, comp: int = 0):
        return self.parts[comp].d(z)

    def dbar(self, z, comp: int = 0):
        return self.parts[comp].dbar(z)

    def __add__(self, other):
        return _combine(self, other, 1.0)

    def __sub__(self, other):
        return _combine(self, other, -1.0)

    def scaled(self, c):
        return PieceFunction(self.complex, self.piece_id, tuple(_SumPart(p, p, c - 1.0) for p in self.parts))


def _combine(a, b, s):
    if a.piece_id != b.piece_id:
        raise ValueError("functions live on different pieces")
    return PieceFunction(a.complex, a.piece_id, tuple(_SumPart(p, q, s) for p, q in zip(a.parts, b.parts)))


@dataclass(frozen=True, eq=False)
class _SumPart:
    a: object
    b: object
    s: float

    def value(self, z):
        return self.a.value(z) + self.s * self.b.value(z)

    def d(self, z):
        return self.a.d(z) + self.s * self.b.d(z)

    def dbar(self, z):
        return self.a.dbar(z) + self.s * self.b.dbar(z)


def modal_part(comp, **coeffs) -> ModalFunction:
    """ModalFunction adapted to the coordinates of a component."""
    if not comp.chart.is_identity() or not comp.round:
        raise GeometryError("modal functions need circle boundaries without a Mobius chart")
    if comp.kind == "band":
        return ModalFunction("band", heights=comp.heights, **coeffs)
    if comp.kind in ("interior", "exterior", "annulus"):
        R = comp.radii[-1]
        return ModalFunction("sphere", center=complex(comp.center), scale=R, **coeffs)
    raise GeometryError(f"no modal representation on {comp.kind!r}")


# ---------------------------------------------------------------- overfare

def _band_shift(cx, comp, ci):
    """Multiple of tau carrying curve ci to its representative on a band."""
    tau = complex(cx.surface.tau)
    lo, hi = comp.heights
    y = lo if dict(comp.boundary)[ci] > 0 else hi
    return round((y - cx.curves[ci].height % tau.imag) / tau.imag) * tau

def _trace(f: PieceFunction, ci: int, n: int):
    """Fourier coefficients (numpy FFT order) of f on curve ci from its own side."""
    cx = f.complex
    for i, comp in enumerate(cx.piece(f.piece_id).components):
        if any(c == ci for c, _ in comp.boundary):
            cv = cx.curves[ci]
            t = 2 * np.pi * np.arange(n) / n
            w, _ = cv.point_and_tangent(t)
            if cv.kind == "horizontal_torus_circle":
                sh = _band_shift(cx, comp, ci)
                w = t / (2 * np.pi) + 1j * (cv.height % complex(cx.surface.tau).imag) + sh
                d = np.fft.fft(f.value(w, i)) / n
                # data in the x coordinate of the representative, as the tau shift moves x
                m = np.fft.fftfreq(n, 1.0 / n)
                return d * np.exp(-2j * np.pi * m * sh.real), sh
            return np.fft.fft(f.value(w, i)) / n, 0.0
    raise GeometryError(f"curve {ci} does not bound piece {f.piece_id}")


def _check_tail(d, tol):
    n = len(d)
    m = np.abs(np.fft.fftshift(d))
    tail = np.concatenate([m[: n // 8], m[-n // 8:]])
    if tail.max(initial=0.0) > tol * max(m.max(), 1.0):
        raise ValueError("boundary data not resolved: Fourier tail above threshold")


def _modes(d):
    n = len(d)
    return {int(k): complex(v) for k, v in zip(np.fft.fftfreq(n, 1.0 / n).astype(int), d) if abs(v) > 0}


def _extend_single(comp, d):
    """Harmonic extension of circle data into a disk or disk exterior."""
    hol, anti, const = {}, {}, 0.0
    for m, v in _modes(d).items():
        if m == 0:
            const = v
        elif (m > 0) == (comp.kind == "interior"):
            # zeta^m inside, zeta^m (m < 0) outside
            hol[m] = v
        else:
            # conj(zeta)^|m| inside for m < 0, conj(zeta^(-m)) outside for m > 0
            anti[-m] = v
    return modal_part(comp, hol=hol, anti=anti, const=const)


def _extend_annulus(comp, d_in, d_out):
    r = comp.radii[0] / comp.radii[1]
    hol, anti = {}, {}
    mi, mo = _modes(d_in), _modes(d_out)
    const = mo.get(0, 0.0)
    log = (mi.get(0, 0.0) - const) / np.log(r)
    for m in set(mi) | set(mo):
        if m == 0:
            continue
        a = abs(m)
        # |zeta|^a e^{i m t} and |zeta|^-a e^{i m t}
        M = np.array([[1.0, 1.0], [r ** a, r ** -a]])
        al, be = np.linalg.solve(M, [mo.get(m, 0.0), mi.get(m, 0.0)])
        if m > 0:
            hol[m] = hol.get(m, 0) + al
            anti[-m] = anti.get(-m, 0) + be
        else:
            anti[a] = anti.get(a, 0) + al
            hol[m] = hol.get(m, 0) + be
    return modal_part(comp, hol=hol, anti=anti, log=log, const=const)


def _extend_band(comp, d_lo, d_hi):
    y0, y1 = comp.heights
    H = y1 - y0
    ml, mh = _modes(d_lo), _modes(d_hi)
    const = ml.get(0, 0.0)
    log = (mh.get(0, 0.0) - const) / H
    hol, anti = {}, {}
    for m in set(ml) | set(mh):
        if m == 0:
            continue
        # x-mode m: hol u_m decays away from one edge, anti conj(u_-m) from the other
        E = np.exp(-2 * np.pi * abs(m) * H)
        if m > 0:
            M = np.array([[1.0, E], [E, 1.0]])  # rows: lower, upper edge
        else:
            M = np.array([[E, 1.0], [1.0, E]])
        a, b = np.linalg.solve(M, [ml.get(m, 0.0), mh.get(m, 0.0)])
        hol[m] = a
        anti[-m] = b
    return modal_part(comp, hol=hol, anti=anti, log=log, const=const)


def overfare_circle(f: PieceFunction, n: int = 256, tail_tol: float = TAIL_TOL) -> PieceFunction:
    """Harmonic function on the other piece with the same boundary values."""
    cx = f.complex
    target = 2 if f.piece_id == 1 else 1
    parts = []
    for comp in cx.piece(target).components:
        if not comp.round or not comp.chart.is_identity():
            raise GeometryError("overfare needs circle boundaries")
        data = {}
        for ci, _ in comp.boundary:
            d, sh = _trace(f, ci, n)
            _check_tail(d, tail_tol)
            if cx.curves[ci].kind == "horizontal_torus_circle":
                # re-express in the x coordinate of the target representative
                m = np.fft.fftfreq(n, 1.0 / n)
                d = d * np.exp(2j * np.pi * m * (sh.real - _band_shift(cx, comp, ci).real))
            data[ci] = d
        if comp.kind in ("interior", "exterior"):
            parts.append(_extend_single(comp, data[comp.boundary[0][0]]))
        elif comp.kind == "annulus":
            (ci_in, _), (ci_out, _) = comp.boundary
            parts.append(_extend_annulus(comp, data[ci_in], data[ci_out]))
        elif comp.kind == "band":
            (ci_lo, _), (ci_hi, _) = comp.boundary
            parts.append(_extend_band(comp, data[ci_lo], data[ci_hi]))
        else:
            raise GeometryError(f"overfare not available on {comp.kind!r}")
    return PieceFunction(cx, target, tuple(parts))


# ---------------------------------------------------------------- Cauchy-Royden

@dataclass(frozen=True, eq=False)
class JumpField:
    """J^q h sampled at points of one piece, with a callable for further use."""
    side: int
    points: np.ndarray
    values: np.ndarray
    q: complex
    func: Callable
    meta: dict = field(default_factory=dict)

    def at(self, z):
        return self.func(np.asarray(z, dtype=complex))

    def derivatives(self, z, h: float = 1e-4):
        return wirtinger(self.func, np.asarray(z, dtype=complex), h)

    def laplacian(self, z, h: float = 1e-3):
        return laplacian_fd(self.func, np.asarray(z, dtype=complex), h)


def _dG_torus(w, z, q, tau):
    """d/dw of the torus Green's function G(w; z, q)."""
    H = complex(tau).imag
    return (-0.5 * dlog_theta1(w - z, tau) + 0.5 * dlog_theta1(w - q, tau)
            - 1j * np.pi / H * np.imag(q - z))


def _boundary_contours(f: PieceFunction, n: int, level: float = 1.0):
    """(nodes, dz, comp) along each boundary curve of f's piece, pushed into
    the piece by the level parameter, oriented as boundary of the piece."""
    cx = f.complex
    out = []
    for i, comp in enumerate(cx.piece(f.piece_id).components):
        for ci, side in comp.boundary:
            cv = cx.curves[ci]
            t, h = 2 * np.pi * np.arange(n) / n, 2 * np.pi / n
            if cv.kind == "horizontal_torus_circle":
                lo, hi = comp.heights
                y = lo + (1 - level) * (hi - lo) if side > 0 else hi - (1 - level) * (hi - lo)
                w = t / (2 * np.pi) + 1j * y
                dw = np.full(n, 1.0 / n, dtype=complex) * side
            else:
                if not comp.round or not cv.chart.is_identity():
                    w, dw = cv.point_and_tangent(t)
                    if level != 1.0:
                        raise GeometryError("level contours need circle boundaries")
                else:
                    c, R = complex(cv.center), cv.radius
                    inside = (side > 0)  # component lies inside this circle
                    rr = R * level if inside else R / level
                    w = c + rr * np.exp(1j * t)
                    dw = 1j * rr * np.exp(1j * t)
                dw = dw * h * side
            out.append((w, dw, i))
    return out


def _J_contour(f, z, q, level, n):
    cx = f.complex
    z = np.asarray(z, dtype=complex)
    tot = np.zeros(z.shape, dtype=complex)
    for w, dw, i in _boundary_contours(f, n, level):
        hw = f.value(w, i) * dw
        if cx.surface.kind == "sphere":
            k = -0.5 / (w[None, :] - z.ravel()[:, None])
            if np.isfinite(q):
                k = k + 0.5 / (w[None, :] - q)
        else:
            k = _dG_torus(w[None, :], z.ravel()[:, None], q, cx.surface.tau)
        tot = tot + (-(k @ hw) / (1j * np.pi)).reshape(z.shape)
    return tot


def _side_inside(cx, piece_id, ci, side):
    """Whether the evaluation side of curve ci is the inside (or the upper
    side for a torus line); None lets the geometry decide."""
    if side is None:
        return None
    for comp in cx.piece(side).components:
        for c, s in comp.boundary:
            if c == ci:
                return s > 0
    raise GeometryError(f"curve {ci} does not bound piece {side}")


def _cauchy_circle(cv, d, x, inside_hint):
    """Cauchy integral over the counterclockwise circle of data with Fourier
    coefficients d, at the points x."""
    zeta = (x - complex(cv.center)) / cv.radius
    r = np.abs(zeta)
    if inside_hint is None:
        inside = r < 1
    else:
        inside = r < 1 + 1e-9 if inside_hint else r < 1 - 1e-9
    out = np.zeros(x.shape, dtype=complex)
    zi = np.where(inside, zeta, 0.5)
    zo = 1.0 / np.where(inside, 2.0, zeta)  # reciprocal avoids overflow far out
    for m, v in _modes(d).items():
        if m >= 0:
            out = out + np.where(inside, v * zi ** m, 0)
        else:
            out = out - np.where(inside, 0, v * zo ** (-m))
    return out


def _J_laurent(f, z, q, side, n):
    """Sphere circles: the Cauchy integral from boundary Fourier coefficients."""
    cx = f.complex
    z = np.asarray(z, dtype=complex)
    tot = np.zeros(z.shape, dtype=complex)
    for comp in cx.piece(f.piece_id).components:
        for ci, sgn in comp.boundary:
            cv = cx.curves[ci]
            d, _ = _trace(f, ci, n)
            _check_tail(d, TAIL_TOL)
            tot = tot + sgn * _cauchy_circle(cv, d, z, _side_inside(cx, f.piece_id, ci, side))
            if np.isfinite(q):
                tot = tot - sgn * _cauchy_circle(cv, d, np.full(z.shape, q, dtype=complex), None)
    return tot


def _psi_line_integral(d, y_line, u, tau):
    """integral over [0, 1] of dlog theta1(x + i y_line - u) h(x) dx for data
    h = sum d_m e^{2 pi i m x}, valid for 0 <= y_line - Im u <= Im tau."""
    n = len(d)
    m = np.fft.fftfreq(n, 1.0 / n).astype(int)
    tau = complex(tau)
    a = 1j * y_line - u  # |e^{2 pi i a}| <= 1 and |e^{2 pi i (tau - a)}| <= 1 on the validity range
    out = -1j * np.pi * d[0] * np.ones(u.shape, dtype=complex)
    for k in range(1, n // 2):
        dn, dp = d[m == -k][0], d[m == k][0]
        if dn == 0 and dp == 0:
            continue
        c = 1.0 / (1 - np.exp(2j * np.pi * k * tau))
        out = out - 2j * np.pi * c * (dn * np.exp(2j * np.pi * k * a) - dp * np.exp(2j * np.pi * k * (tau - a)))
    return out


def _J_bands(f, z, q, side, n):
    """Torus bands: termwise integration of the Fourier series of the kernel."""
    cx = f.complex
    tau = complex(cx.surface.tau)
    H = tau.imag
    z = np.asarray(z, dtype=complex)
    tot = np.zeros(z.shape, dtype=complex)
    for comp in cx.piece(f.piece_id).components:
        for ci, sgn in comp.boundary:
            d, sh = _trace(f, ci, n)
            _check_tail(d, TAIL_TOL)
            y_l = cx.curves[ci].height % H + sh.imag
            hint = _side_inside(cx, f.piece_id, ci, side)  # True: evaluation side lies above the line

            def shifted(u, above):
                gap = y_l - u.imag
                k = np.floor(gap / H)  # gap - k H in [0, H)
                if above is True:
                    k = np.where(np.abs(gap - k * H) < 1e-12 * H, k - 1, k)
                elif above is False:
                    k = np.where(np.abs(gap - (k + 1) * H) < 1e-12 * H, k + 1, k)
                return u + k * tau

            zs = shifted(z, hint)
            Iz = _psi_line_integral(d, y_l, zs, tau)
            qs = shifted(np.array([q]), None)
            Iq = _psi_line_integral(d, y_l, qs, tau)[0]
            # line element dw = dx along the curve, sign from the orientation
            kern = -0.5 * Iz + 0.5 * Iq - 1j * np.pi / H * np.imag(qs[0] - zs) * d[0]
            tot = tot + sgn * (-kern / (1j * np.pi))
    return tot


def cauchy_royden(f: PieceFunction, points, q=None, side: int | None = None,
                  method: str = "auto", n: int = 256, levels=LEVELS) -> JumpField:
    """J^q h for h = f on piece f.piece_id, sampled at points of piece `side`.

    method: 'series' (boundary Fourier coefficients, exact for band-limited
    data on circle and torus-line boundaries; evaluates one-sided limits on
    the curves themselves), 'contour' (trapezoid integral along the boundary
    curves), or 'levels' (level curves pushed into the piece at the given
    levels, then polynomial extrapolation to the boundary).
    """
    cx = f.complex
    if q is None:
        q = default_q(cx)
    q = complex(q)
    points = np.asarray(points, dtype=complex)
    if method == "auto":
        comps = cx.piece(f.piece_id).components
        method = "series" if all(c.round and c.chart.is_identity() and c.kind in
                                 ("interior", "exterior", "annulus", "band") for c in comps) else "contour"
    if method == "series":
        if cx.surface.kind == "sphere":
            func = lambda z: _J_laurent(f, z, q, side, n)
        else:
            func = lambda z: _J_bands(f, z, q, side, n)
    elif method == "contour":
        func = lambda z: _J_contour(f, z, q, 1.0, n)
    elif method == "levels":
        lv = np.asarray(levels, dtype=float)
        V = np.vander(lv - 1.0, len(lv), increasing=True)
        w0 = np.linalg.solve(V.T, np.eye(len(lv))[0])

        def func(z):
            vals = np.array([_J_contour(f, z, q, l, n) for l in lv])
            return np.tensordot(w0, vals, axes=1)
    else:
        raise ValueError(f"unknown Cauchy-Royden method {method!r}")
    return JumpField(side if side is not None else 0, points, func(points), q, func,
                     {"piece": f.piece_id, "method": method, "n": n})


def default_q(cx: SeparatingComplex) -> complex:
    """A point deep in the second piece: infinity on the sphere, a band or
    complement midpoint on the torus."""
    if cx.surface.kind == "sphere":
        return complex(np.inf)
    comp = cx.piece(2).components[0]
    if comp.kind == "band":
        return 0.5 + 0.5j * (comp.heights[0] + comp.heights[1])
    if comp.kind == "cap":
        return complex(comp.center)
    tau = complex(cx.surface.tau)
    return complex(comp.center) + 0.5 * (1 + tau)


def jump_part(J: JumpField, h: float = 1e-4):
    """Wrap a JumpField as a component function (derivatives by differences)."""
    return _FieldPart(J.func, h)


@dataclass(frozen=True, eq=False)
class _FieldPart:
    func: Callable
    h: float

    def value(self, z):
        return self.func(np.asarray(z, dtype=complex))

    def d(self, z):
        return wirtinger(self.func, np.asarray(z, dtype=complex), self.h)[0]

    def dbar(self, z):
        return wirtinger(self.func, np.asarray(z, dtype=complex), self.h)[1]


def dirichlet_seminorm(d_coef, dbar_coef, grids) -> float:
    """sqrt of the Dirichlet integral 2 * integral(|dh|^2 + |dbar h|^2) dA."""
    tot = 0.0
    for g, a, b in zip(grids, d_coef, dbar_coef):
        tot += 2 * np.sum(g.weights * (np.abs(a) ** 2 + np.abs(b) ** 2))
    return float(np.sqrt(tot))


# ---------------------------------------------------------------- constructors

@dataclass(frozen=True, eq=False)
class _MeasurePart:
    measure: object  # bases.HarmonicMeasure or None (zero on this component)

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return np.zeros(z.shape, dtype=complex) if self.measure is None else self.measure.value(z) + 0j

    def d(self, z):
        z = np.asarray(z, dtype=complex)
        return np.zeros(z.shape, dtype=complex) if self.measure is None else self.measure.a(z)

    def dbar(self, z):
        return np.conj(self.d(z))


def measure_function(hms, index: int) -> PieceFunction:
    """The harmonic measure hms.measures[index] as a function on its piece
    (zero on the other components)."""
    m = hms.measures[index]
    comps = hms.complex.piece(hms.piece_id).components
    return PieceFunction(hms.complex, hms.piece_id,
                         tuple(_MeasurePart(m if i == m.comp else None) for i in range(len(comps))))


def _int_keys(d):
    return {int(k): complex(*v) if isinstance(v, (list, tuple)) else complex(v) for k, v in (d or {}).items()}


def harmonic_from_spec(cx: SeparatingComplex, piece_id: int, spec) -> PieceFunction:
    """Modal harmonic function from a JSON-style spec: one dict per component
    with optional keys hol, anti (mode -> coefficient or [re, im]), log, const."""
    comps = cx.piece(piece_id).components
    if isinstance(spec, dict):
        spec = [spec] + [{}] * (len(comps) - 1)
    if len(spec) != len(comps):
        raise ValueError(f"need one spec per component ({len(comps)})")
    parts = []
    for comp, s in zip(comps, spec):
        c = lambda v: complex(*v) if isinstance(v, (list, tuple)) else complex(v)
        parts.append(modal_part(comp, hol=_int_keys(s.get("hol")), anti=_int_keys(s.get("anti")),
                                log=c(s.get("log", 0.0)), const=c(s.get("const", 0.0))))
    return PieceFunction(cx, piece_id, tuple(parts))


def fourier_test_function(cx: SeparatingComplex, piece_id: int = 1, modes: int = 8) -> PieceFunction:
    """Deterministic harmonic function with the given number of nonzero
    boundary Fourier modes (half holomorphic, half antiholomorphic) on
    every component."""
    comps = cx.piece(piece_id).components
    parts = []
    k = np.arange(1, modes // 2 + 1)
    a = (0.6 / k) * np.exp(0.7j * k)
    b = (0.5 / k) * np.exp(-1.3j * k)
    for comp in comps:
        if comp.kind == "exterior":
            hol = {-int(n): complex(v) for n, v in zip(k, a)}
            anti = {-int(n): complex(v) for n, v in zip(k, b)}
        elif comp.kind == "interior":
            hol = {int(n): complex(v) for n, v in zip(k, a)}
            anti = {int(n): complex(v) for n, v in zip(k, b)}
        else:
            hol = {int(n) * (-1) ** int(n): complex(v) for n, v in zip(k, a)}
            anti = {int(n) * (-1) ** int(n + 1): complex(v) for n, v in zip(k, b)}
        parts.append(modal_part(comp, hol=hol, anti=anti, const=0.25))
    return PieceFunction(cx, piece_id, tuple(parts))
