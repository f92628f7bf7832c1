"""Galerkin matrices of the Schiffer operators and their adjoints."""
import numpy as np

from schiffer import operators as O
from schiffer.analysis import disk_automorphism
from schiffer.geometry import CurveSpec, SurfaceDescriptor, build_complex, mobius_transform

circle = build_complex(SurfaceDescriptor("sphere"), [CurveSpec("circle", radius=1.0)])
T12 = O.assemble_T(circle, 1, 2, N=6)
T11 = O.assemble_T(circle, 1, 1, N=6)
print("circle T12 (conj(w^n dw) -> z^-(n+2) dz):\n", np.round(T12.entries.real, 12))
print("circle T11 max entry:", np.abs(T11.entries).max())

T21 = O.assemble_T(circle, 2, 1, N=6)
diff = O.adjoint(T12).entries - O.conjugate(T21).entries
print("adj(T12) - conj T21:", np.abs(diff).max())

bands = build_complex(SurfaceDescriptor("torus", 2j),
                      [CurveSpec("horizontal_torus_circle", height=h) for h in (0.0, 1.0)])
S1, R1 = O.assemble_S(bands, 1, N=4), O.assemble_R(bands, 1, N=4)
S2, R2 = O.assemble_S(bands, 2, N=4), O.assemble_R(bands, 2, N=4)
print("S1 R1 + S2 R2 =", ((S1 @ R1).entries + (S2 @ R2).entries)[0, 0])

ellipse = build_complex(SurfaceDescriptor("sphere"), [CurveSpec("ellipse", semi_axes=(1.5, 1.0))])
m = disk_automorphism(0.3 + 0.2j)
s0 = O.assemble_T(ellipse, 1, 2, N=8).singular_values()
s1 = O.assemble_T(mobius_transform(ellipse, m), 1, 2, N=8).singular_values()
print("ellipse singular values before / after a Mobius map agree to", np.abs(s0 - s1).max())
