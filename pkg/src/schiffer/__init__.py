"""Schiffer comparison operators on separating complexes of the sphere and
the torus: geometry, kernels, Bergman bases, operator assembly, jump
formulas, verification suites and a command-line runner."""
from . import analysis, bases, geometry, jump, kernels, operators
from .geometry import CurveSpec, GeometryError, SurfaceDescriptor, build_complex
from .operators import OperatorMatrix, assemble_R, assemble_S, assemble_T

__all__ = ["analysis", "bases", "geometry", "jump", "kernels", "operators", "CurveSpec", "GeometryError",
           "SurfaceDescriptor", "build_complex", "OperatorMatrix", "assemble_R", "assemble_S", "assemble_T"]
__version__ = "0.1.0"
