"""3D toric, solid and welded codes with their decoders and a Monte Carlo harness."""

from .codes import (CodeSpec, PauliFrame, Syndrome, build_code, build_toric3d, build_welded,
                    is_logical_failure, syndrome)
from .lattice import Lattice3D, build_periodic, build_solid, dual_view

__all__ = [
    "CodeSpec", "PauliFrame", "Syndrome", "Lattice3D",
    "build_code", "build_toric3d", "build_welded", "build_periodic", "build_solid",
    "dual_view", "is_logical_failure", "syndrome",
]
