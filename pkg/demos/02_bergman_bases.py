"""Bergman bases, Gram matrices, harmonic measures and boundary periods."""
import numpy as np

from schiffer import bases as bs
from schiffer.geometry import CurveSpec, SurfaceDescriptor, build_complex

sphere = SurfaceDescriptor("sphere")
disk_cx = build_complex(sphere, [CurveSpec("circle", radius=1.0)])
basis = bs.make_basis(disk_cx, 1, N=4)
print("disk monomials:", basis.labels())
print("Gram diagonal (2 pi / (n + 1)):", np.round(bs.gram(basis).entries.diagonal().real, 6))

annulus = build_complex(sphere, [CurveSpec("circle", radius=0.5), CurveSpec("circle", radius=1.0)])
hms = bs.harmonic_measures(annulus, 1)
print("annulus harmonic measure at |z| = 0.75:", hms.measures[1].value(0.75))
print("boundary period matrix:\n", np.round(hms.period, 6))

alpha = bs.prescribe_boundary_periods(hms, [1.0, -1.0])
print("form with boundary periods (1, -1) has recomputed periods", bs.star_form_periods(alpha))

anti = basis.conjugate()
h = bs.solve_dbar(bs.FormVector(anti, [0, 0, 1, 0]))
z = 0.4 + 0.3j
print("dbar potential of conj(w^2) dw-bar at z:", h(z), "expected", np.conj(z) ** 3 / 3)
