from ._jit import NUMBA_INSTALLED
from .fuchsian import FuchsianSystem, Probe, restrict_to_line
from .integrator import transport_along, transport_polyline
from .loops import LoopPath, canonical_loops, detour_polyline, keyhole_radius
from .representation import (
    IrreducibilityReport,
    MonodromyRep,
    ReducibilityReport,
    irreducibility_conditions,
    monodromy_rep,
    product_relation_residual,
    reducibility_detect,
    transport,
)

__all__ = [
    "NUMBA_INSTALLED",
    "FuchsianSystem",
    "Probe",
    "restrict_to_line",
    "transport_along",
    "transport_polyline",
    "LoopPath",
    "canonical_loops",
    "detour_polyline",
    "keyhole_radius",
    "IrreducibilityReport",
    "MonodromyRep",
    "ReducibilityReport",
    "irreducibility_conditions",
    "monodromy_rep",
    "product_relation_residual",
    "reducibility_detect",
    "transport",
]
