"""Index, cohomology, harmonic-measure theorems, the curve-family probe and V2."""
import numpy as np

from schiffer import analysis as an
from schiffer.geometry import CurveSpec, SurfaceDescriptor, build_complex

torus = SurfaceDescriptor("torus", 2j)
bands = build_complex(torus, [CurveSpec("horizontal_torus_circle", height=h) for h in (0.0, 1.0)])
capped = build_complex(torus, [CurveSpec("circle", center=0.5 + 1j, radius=0.3)])

for name, cx in (("two bands", bands), ("capped torus", capped)):
    r = an.index_experiment(cx, N=8)
    print(f"{name}: index {r.index} (kernel {r.dim_ker}, cokernel {r.dim_coker}), "
          f"by size {r.diagnostics['index_by_size']}")

forms, names = an.default_test_forms(capped, N=8)
periods = an.cohomology_periods(capped, forms, N=8, names=names)
print("capped torus cohomology periods, max:", np.abs(periods.periods).max())

hm = an.run_harmonic_measure_suite(bands, N=8)
print("harmonic-measure theorems on the bands pass:", hm.passed)

curves, alphas = an.cusp_family()
probe = an.quasicircle_probe(curves, alphas, family="cusp")
print("cusp family sigma_min:", {k: np.round(v, 3).tolist() for k, v in probe.sigma_min.items()})

print("V2 for a diagonal period matrix:", an.riemann_matrix_V2(np.diag([1.0, 2.0])))
