"""Green's functions, Bergman kernels K and Schiffer kernels L.

Kernel values are coefficients: L with respect to dz dw, K with respect
to dz dw-bar.  Global kernels live on the sphere or on the flat torus
C / (Z + tau Z); piece kernels live on components listed in
:mod:`schiffer.geometry`.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import Polynomial

from .geometry import ComponentDescriptor, GeometryError, SurfaceDescriptor

EPS = np.finfo(float).eps
FD_STEP = 1e-4


# ---------------------------------------------------------------- theta

def _check_tau(tau):
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError("theta functions need Im tau > 0")
    return tau


def theta1(u, tau, deriv: int = 0, max_terms: int = 400):
    """Jacobi theta_1 with period 1: 2 sum (-1)^n q^{(n+1/2)^2} sin((2n+1) pi u).

    Terms are added until each increment is below machine epsilon times the
    running sum.  ``deriv`` selects the u-derivative (0, 1, 2 or 3).
    """
    tau = _check_tau(tau)
    u = np.asarray(u, dtype=complex)
    total = np.zeros(u.shape, dtype=complex)
    for n in range(max_terms):
        k = (2 * n + 1) * np.pi
        amp = 2 * (-1) ** n * np.exp(1j * np.pi * tau * (n + 0.5) ** 2) * k ** deriv
        phase = k * u + deriv * np.pi / 2
        term = amp * np.sin(phase)
        total = total + term
        small = np.abs(term) <= EPS * np.abs(total)
        if np.all(small | (term == 0)):
            break
    return total


def _reduce(u, tau):
    """Split u = u0 + m tau + k with |Im u0| <= Im tau / 2, Re u0 in [-1/2, 1/2)."""
    u = np.asarray(u, dtype=complex)
    m = np.round(u.imag / tau.imag)
    u0 = u - m * tau
    k = np.round(u0.real)
    return u0 - k, m


def _lambert(tau, nmax=None):
    """n Q^n / (1 - Q^n) for n = 1..nmax, Q = exp(2 pi i tau)."""
    Q = np.exp(2j * np.pi * tau)
    if nmax is None:
        # |Q|^{n/2} below eps after reduction to |Im u| <= Im tau / 2
        nmax = int(np.ceil(2 * np.log(EPS) / np.log(abs(Q)))) + 2
    n = np.arange(1, nmax + 1)
    return n, n * Q ** n / (1 - Q ** n)


def dlog_theta1(u, tau):
    """(log theta_1)'(u)."""
    tau = _check_tau(tau)
    u0, m = _reduce(u, tau)
    n, lam = _lambert(tau)
    s = np.tensordot(np.sin(2 * np.pi * np.multiply.outer(u0, n)), lam / n, axes=([-1], [0]))
    return np.pi / np.tan(np.pi * u0) + 4 * np.pi * s - 2j * np.pi * m


_COT_POLYS: list = []


def _cot_poly(m):
    """Polynomial P_m with d^m/du^m [-pi^2 (1 + C^2)] = P_m(C), C = cot(pi u)."""
    if not _COT_POLYS:
        _COT_POLYS.append(Polynomial([-np.pi ** 2, 0, -np.pi ** 2]))
    while len(_COT_POLYS) <= m:
        p = _COT_POLYS[-1]
        _COT_POLYS.append(p.deriv() * Polynomial([-np.pi, 0, -np.pi]))
    return _COT_POLYS[m]


def elliptic_F(u, tau, order: int = 0):
    """order-th derivative of F = (log theta_1)''.

    F is elliptic with a double pole -1/u^2 at lattice points and zero mean
    over horizontal lines; F = -wp + const for the Weierstrass function wp.
    """
    tau = _check_tau(tau)
    u0, _ = _reduce(u, tau)
    C = 1 / np.tan(np.pi * u0)
    val = _cot_poly(order)(C)
    n, lam = _lambert(tau)
    arg = 2 * np.pi * np.multiply.outer(u0, n) + order * np.pi / 2
    val = val + 8 * np.pi ** 2 * np.tensordot(np.cos(arg), lam * (2 * np.pi * n) ** order, axes=([-1], [0]))
    return val


def elliptic_fourier(k, tau, upper: bool):
    """Fourier coefficient of F(u) on exp(2 pi i k u) in the strip
    0 < Im u < Im tau (upper) or -Im tau < Im u < 0 (lower).

    Overflows for large |k|; prefer :func:`log_elliptic_fourier` there.
    """
    return np.exp(log_elliptic_fourier(k, tau, upper))


def log_elliptic_fourier(k, tau, upper: bool):
    """Complex log of the Fourier coefficient described in elliptic_fourier.

    With Q = exp(2 pi i tau): for k >= 1 the upper-strip coefficient of v^k is
    4 pi^2 k / (1 - Q^k) and of v^-k is 4 pi^2 k Q^k / (1 - Q^k); the lower
    strip swaps the roles.  k = 0 gives -inf (the mean vanishes).
    """
    tau = _check_tau(tau)
    k = np.asarray(k)
    a = np.abs(k)
    out = np.full(k.shape, -np.inf + 0j, dtype=complex)
    nz = a > 0
    aa = a[nz].astype(float)
    logQk = 2j * np.pi * tau * aa
    base = np.log(4 * np.pi ** 2 * aa) - np.log(1 - np.exp(logQk))
    positive = k[nz] > 0
    # the large coefficient sits on v^k in the upper strip, on v^-k in the lower one
    big = positive if upper else ~positive
    out[nz] = np.where(big, base, base + logQk)
    return out


# ---------------------------------------------------------------- global

def green_global(surface: SurfaceDescriptor, w, z, q):
    """G(w, .; z, q): -log singularity at z, +log at q; w0 gauge dropped."""
    w, z = np.asarray(w, dtype=complex), np.asarray(z, dtype=complex)
    if np.any(w == z) or np.any(w == q):
        raise ValueError("coincident points in Green's function")
    if surface.kind == "sphere":
        if q is None or np.isinf(q):
            return -np.log(np.abs(w - z))
        return -np.log(np.abs(w - z) / np.abs(w - q))
    tau = complex(surface.tau)
    a, b = w - z, w - q
    ra, ma = _reduce(a, tau)
    rb, mb = _reduce(b, tau)
    val = -np.log(np.abs(theta1(ra, tau) / theta1(rb, tau)))
    return val + np.pi * (ra.imag ** 2 - rb.imag ** 2) / tau.imag


def kernel_L_global(surface: SurfaceDescriptor, z, w):
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    if surface.kind == "sphere":
        return -1 / (2j * np.pi) / (w - z) ** 2
    tau = complex(surface.tau)
    return (0.5 * elliptic_F(w - z, tau) + np.pi / (2 * tau.imag)) / (1j * np.pi)


def kernel_K_global(surface: SurfaceDescriptor, z, w):
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    shape = np.broadcast(z, w).shape
    if surface.kind == "sphere":
        return np.zeros(shape, dtype=complex)
    return np.full(shape, -1j / (2 * complex(surface.tau).imag), dtype=complex)


# ---------------------------------------------------------------- pieces

def _annulus_logP_derivs(zeta, q, K):
    """log P and its first two derivatives, P(z) = (1-z) prod (1-q^2k z)(1-q^2k/z)."""
    zeta = np.asarray(zeta, dtype=complex)
    p0 = np.log(1 - zeta)
    p1 = -1 / (1 - zeta)
    p2 = -1 / (1 - zeta) ** 2
    for k in range(1, K + 1):
        a = q ** (2 * k)
        p0 = p0 + np.log(1 - a * zeta) + np.log(1 - a / zeta)
        p1 = p1 - a / (1 - a * zeta) + (a / zeta ** 2) / (1 - a / zeta)
        p2 = p2 - a ** 2 / (1 - a * zeta) ** 2 \
            - 2 * a / zeta ** 3 / (1 - a / zeta) - (a / zeta ** 2) ** 2 / (1 - a / zeta) ** 2
    return p0, p1, p2


IMAGE_TERMS = 40


def _annulus_green(z, w, q, K=IMAGE_TERMS):
    """Green's function of q < |z| < 1."""
    p_a = _annulus_logP_derivs(z / w, q, K)[0].real
    p_b = _annulus_logP_derivs(z * np.conj(w), q, K)[0].real
    return -p_a + p_b + np.log(np.abs(w)) * np.log(np.abs(z)) / np.log(q) - np.log(np.abs(w))


def annulus_green_converged(z, w, q, K=IMAGE_TERMS):
    """Image-series value with a posteriori doubling check."""
    g1 = _annulus_green(z, w, q, K)
    g2 = _annulus_green(z, w, q, 2 * K)
    return g2, np.max(np.abs(g2 - g1))


def _annulus_LK(z, w, q, K=IMAGE_TERMS):
    """d_z d_w G and d_z dbar_w G for q < |z| < 1."""
    zeta = z / w
    _, p1, p2 = _annulus_logP_derivs(zeta, q, K)
    LL = 0.5 * (p2 * z / w ** 3 + p1 / w ** 2) + 1 / (4 * z * w * np.log(q))
    eta = z * np.conj(w)
    _, r1, r2 = _annulus_logP_derivs(eta, q, K)
    KK = 0.5 * (r2 * eta + r1) + 1 / (4 * z * np.conj(w) * np.log(q))
    return LL, KK


def _model_map(comp: ComponentDescriptor):
    """Holomorphic map zeta from the component onto the unit disk or an
    annulus q < |zeta| < 1, with zeta'. Returns (kind, q, zeta, dzeta)."""
    if not comp.round:
        raise GeometryError("no explicit model map for a non-circular boundary")
    c = complex(comp.center)
    kind = comp.kind
    if kind in ("interior", "cap"):
        R = comp.radii[0]
        return "disk", None, (lambda z: (z - c) / R), (lambda z: np.full(np.shape(z), 1 / R, dtype=complex))
    if kind == "exterior":
        R = comp.radii[0]
        return "disk", None, (lambda z: R / (z - c)), (lambda z: -R / (z - c) ** 2)
    if kind == "annulus":
        a, b = comp.radii
        return "annulus", a / b, (lambda z: (z - c) / b), (lambda z: np.full(np.shape(z), 1 / b, dtype=complex))
    if kind == "band":
        y0, y1 = comp.heights
        q = np.exp(-2 * np.pi * (y1 - y0))
        f = lambda z: np.exp(-2j * np.pi * (z - 1j * y1))
        return "annulus", q, f, (lambda z: -2j * np.pi * f(z))
    raise GeometryError(f"no closed-form Green's function for piece kind {kind!r}")


def _unchart(comp, z):
    """Model coordinate and derivative of the inverse chart."""
    z = np.asarray(z, dtype=complex)
    if comp.chart.is_identity():
        return z, np.ones(z.shape, dtype=complex)
    inv = comp.chart.inverse()
    return inv(z), inv.deriv(z)


def green_piece(comp: ComponentDescriptor, w, z):
    """Green's function of a component, vanishing on its boundary."""
    w, z = np.asarray(w, dtype=complex), np.asarray(z, dtype=complex)
    if np.any(w == z):
        raise ValueError("coincident points in Green's function")
    w, _ = _unchart(comp, w)
    z, _ = _unchart(comp, z)
    kind, q, f, _ = _model_map(comp)
    a, b = f(w), f(z)
    if kind == "disk":
        if np.any(np.abs(a) > 1 + 1e-12) or np.any(np.abs(b) > 1 + 1e-12):
            raise ValueError("points outside the piece")
        return -np.log(np.abs((a - b) / (1 - np.conj(b) * a)))
    if np.any(np.abs(a) > 1 + 1e-12) or np.any(np.abs(a) < q - 1e-12):
        raise ValueError("points outside the piece")
    return _annulus_green(a, b, q)


def kernel_L_piece(comp: ComponentDescriptor, z, w):
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    zm, dz = _unchart(comp, z)
    wm, dw = _unchart(comp, w)
    kind, q, f, df = _model_map(comp)
    a, b = f(zm), f(wm)
    if kind == "disk":
        val = -1 / (2j * np.pi) / (b - a) ** 2
    else:
        val = _annulus_LK(a, b, q)[0] / (1j * np.pi)
    return val * df(zm) * df(wm) * dz * dw


def kernel_K_piece(comp: ComponentDescriptor, z, w):
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    zm, dz = _unchart(comp, z)
    wm, dw = _unchart(comp, w)
    kind, q, f, df = _model_map(comp)
    a, b = f(zm), f(wm)
    if kind == "disk":
        val = 1 / (2j * np.pi) / (1 - np.conj(b) * a) ** 2
    else:
        val = -_annulus_LK(a, b, q)[1] / (1j * np.pi)
    return val * df(zm) * np.conj(df(wm)) * dz * np.conj(dw)


def kernel_L(scope, z, w):
    """Schiffer kernel coefficient on a surface or on a piece component."""
    if isinstance(scope, SurfaceDescriptor):
        return kernel_L_global(scope, z, w)
    return kernel_L_piece(scope, z, w)


def kernel_K(scope, z, w):
    """Bergman kernel coefficient on a surface or on a piece component."""
    if isinstance(scope, SurfaceDescriptor):
        return kernel_K_global(scope, z, w)
    return kernel_K_piece(scope, z, w)


def _sphere_minus_disk_L(comp, z, w):
    """L_sphere - L_piece in a cancellation-free form where available."""
    zm, dz = _unchart(comp, z)
    wm, dw = _unchart(comp, w)
    kind, q, f, df = _model_map(comp)
    if kind == "disk":
        # a Mobius model map carries L_sphere to itself: the difference vanishes
        return np.zeros(np.broadcast(z, w).shape, dtype=complex)
    return None


def kernel_L_desing(surface: SurfaceDescriptor, comp: ComponentDescriptor, z, w):
    """L_R(z, w) - L_piece(z, w); bounded on the diagonal."""
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    if surface.kind == "sphere" and comp.kind in ("interior", "exterior") and comp.round:
        return _sphere_minus_disk_L(comp, z, w)
    return kernel_L_global(surface, z, w) - kernel_L_piece(comp, z, w)


# ---------------------------------------------------------------- checks

def wirtinger(f, z, h: float = FD_STEP):
    """Fourth-order central-difference (d, dbar) of a real or complex f."""
    z = np.asarray(z, dtype=complex)

    def d(e):
        return (-f(z + 2 * h * e) + 8 * f(z + h * e) - 8 * f(z - h * e) + f(z - 2 * h * e)) / (12 * h)

    fx, fy = d(1.0), d(1j)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def laplacian_fd(f, z, h: float = 1e-3):
    """Fourth-order nine-point Laplacian."""
    z = np.asarray(z, dtype=complex)
    f0 = f(z)
    tot = 0.0
    for e in (1.0, 1j):
        tot = tot + (-f(z + 2 * h * e) + 16 * f(z + h * e) - 30 * f0
                     + 16 * f(z - h * e) - f(z - 2 * h * e))
    return tot / (12 * h ** 2)


def level_curve(comp: ComponentDescriptor, w, eps: float, n: int = 128):
    """Points of {z : G_piece(z, w) = eps} near each boundary curve and the
    tangent vectors there, for circle-bounded components via the model map."""
    kind, q, f, df = _model_map(comp)
    wm, _ = _unchart(comp, np.asarray(w, dtype=complex))
    b = f(wm)
    th = 2 * np.pi * np.arange(n) / n
    out = []
    radii = [1.0] if kind == "disk" else [1.0, q]
    for r0 in radii:
        # Newton along rays of the model coordinate
        rho = np.full(n, r0 * (1 - 1e-3) if r0 == 1.0 else r0 * (1 + 1e-3))
        for _ in range(60):
            a = rho * np.exp(1j * th)
            g = _model_green(kind, q, a, b)
            hh = 1e-7 * r0
            gp = (_model_green(kind, q, (rho + hh) * np.exp(1j * th), b)
                  - _model_green(kind, q, (rho - hh) * np.exp(1j * th), b)) / (2 * hh)
            step = (g - eps) / gp
            rho = rho - step
            if np.max(np.abs(step)) < 1e-15:
                break
        a = rho * np.exp(1j * th)
        # tangent is i times the gradient 2 dbar G in the model plane
        gz, gzb = wirtinger(lambda x: _model_green(kind, q, x, b), a, h=1e-5 * r0)
        tang = 1j * 2 * gzb
        out.append((a, tang))
    return out, f, df


def _model_green(kind, q, a, b):
    if kind == "disk":
        return -np.log(np.abs((a - b) / (1 - np.conj(b) * a)))
    return _annulus_green(a, b, q)


def boundary_kernel_identity_check(comp: ComponentDescriptor, w, eps: float = 1e-10, samples: int = 128):
    """Max over level-curve points of |conj K(z,w)(v) + L(z,w)(v)| / |v|.

    Both kernels are contracted in the z slot with the level-curve tangent v.
    Deviation is O(eps); the identity is exact on the boundary itself.
    """
    if comp.kind not in ("interior", "exterior", "annulus", "cap", "band"):
        raise GeometryError("piece has no closed-form Green's function")
    curves, f, df = level_curve(comp, w, eps, samples)
    kind, q, _, _ = _model_map(comp)
    wm, _ = _unchart(comp, np.asarray(w, dtype=complex))
    b = f(wm)
    dev = 0.0
    for a, v in curves:
        if np.any(np.abs(a) > 1 + 1e-9) or (q is not None and np.any(np.abs(a) < q - 1e-9)):
            raise ValueError("level curve leaves the piece; eps too large")
        # model-plane kernels; the identity is conformally natural in the z slot
        if kind == "disk":
            Lm = -1 / (2j * np.pi) / (b - a) ** 2
            Km = 1 / (2j * np.pi) / (1 - np.conj(b) * a) ** 2
        else:
            LL, KK = _annulus_LK(a, b, q)
            Lm, Km = LL / (1j * np.pi), -KK / (1j * np.pi)
        lhs = np.conj(Km) * np.conj(v)
        rhs = -Lm * v
        dev = max(dev, float(np.max(np.abs(lhs - rhs) / (np.abs(v)))))
    return dev
