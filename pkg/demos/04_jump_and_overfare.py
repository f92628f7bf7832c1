"""Cauchy-Royden jump fields and overfare across circles."""
import numpy as np

from schiffer import analysis as an
from schiffer import jump as J
from schiffer.geometry import CurveSpec, SurfaceDescriptor, build_complex

circle = build_complex(SurfaceDescriptor("sphere"), [CurveSpec("circle", radius=1.0)])
zbar = J.harmonic_from_spec(circle, 1, {"anti": {"1": 1}})
outside = np.array([1.5 + 0.5j, -2j])
field = J.cauchy_royden(zbar, outside, side=2)
print("J applied to conj(z) outside the disk:", field.values, "expected", -1 / outside)

h = J.harmonic_from_spec(circle, 1, {"hol": {"2": 1}})
g = J.overfare_circle(h)
print("z^2 overfares to conj(z)^-2:", g.value(outside, 0), np.conj(outside) ** -2)

report = an.run_jump_suite(circle, J.fourier_test_function(circle, 1, 8), N=16)
for r in report.records:
    print(f"  {r.identity:55s} {r.residual:.1e}  {'ok' if r.passed else 'FAILED'}")
