"""Kowalevski-type integrable systems in exact and floating arithmetic."""

from .catalog import State, SystemId, SystemParams, integral_set, measure_density, sample_initial_state, vector_field
from .families import cubic_family, kowalevski_q, modal_family
from .integrator import TolSpec, Trajectory, integrate, refine
from .poly import BiPoly, TriQuadPoly, UniPoly
from .separability import check_separable, discriminant_in
from .theorem import ExponentProfile, thm1_coefficients

__version__ = "0.1.0"

__all__ = [
    "BiPoly",
    "ExponentProfile",
    "State",
    "SystemId",
    "SystemParams",
    "TolSpec",
    "Trajectory",
    "TriQuadPoly",
    "UniPoly",
    "check_separable",
    "cubic_family",
    "discriminant_in",
    "integral_set",
    "integrate",
    "kowalevski_q",
    "measure_density",
    "modal_family",
    "refine",
    "sample_initial_state",
    "thm1_coefficients",
    "vector_field",
]
