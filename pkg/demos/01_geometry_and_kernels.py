"""Separating curves, pieces, and the closed-form kernels.

Builds the unit circle on the sphere and two horizontal circles on a torus,
then evaluates Green's functions and the Schiffer and Bergman kernels.
"""
import numpy as np

from schiffer import kernels as kn
from schiffer.geometry import CurveSpec, SurfaceDescriptor, build_complex

sphere = SurfaceDescriptor("sphere")
circle = build_complex(sphere, [CurveSpec("circle", radius=1.0)])
for k in (1, 2):
    comp = circle.piece(k).components[0]
    print(f"sphere piece {k}: {comp.kind}")

disk = circle.piece(1).components[0]
print("disk Green's function G(0.5; 0) =", kn.green_piece(disk, 0.5, 0.0), "(expected", -np.log(0.5), ")")
print("sphere Schiffer kernel L(0, 1) =", kn.kernel_L_global(sphere, 0.0, 1.0))
print("disk Bergman kernel K(0, 0) =", kn.kernel_K_piece(disk, 0.0, 0.0))

torus = SurfaceDescriptor("torus", 2j)
bands = build_complex(torus, [CurveSpec("horizontal_torus_circle", height=h) for h in (0.0, 1.0)])
print("torus pieces:", [c.kind for k in (1, 2) for c in bands.piece(k).components])
print("torus Bergman kernel (constant) =", kn.kernel_K_global(torus, 0.1, 0.3 + 1j))
z, q = 0.3 + 0.4j, 0.8 + 1.5j
lap = kn.laplacian_fd(lambda w: kn.green_global(torus, w, z, q), 0.6 + 0.9j)
print(f"torus Green's function is harmonic away from its poles: Laplacian {abs(lap):.1e}")
