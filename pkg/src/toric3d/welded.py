"""Erasure decoders for welded codes.

Welded qubits are hyperedges of the X-check graph, so the spanning-forest and
trapping tricks only apply once they are set aside.  Setting aside is done by
masking: the code object is never modified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import CodeSpec, WELDED
from .erasure import (DECLARE_FAILURE, GAUSS, RegionReport, TannerGraph, _check_policy,
                      _finish, decode_erasure_gauss, freeze_by_forest_z, peel,
                      trap_regions, triangular_freeze)


@dataclass(eq=False)
class WeldedErasureContext:
    erased: np.ndarray
    welded: np.ndarray      # erased welded qubits
    interior: np.ndarray    # erased non-welded qubits

    @classmethod
    def split(cls, code: CodeSpec, erased) -> "WeldedErasureContext":
        erased = np.asarray(erased, dtype=bool)
        w = code.qubit_meta.welded
        return cls(erased=erased, welded=erased & w, interior=erased & ~w)

    def per_solid(self, code: CodeSpec) -> list[np.ndarray]:
        """Erased interior qubits of each solid, as local template masks."""
        return [self.interior[row] for row in code.solid_qubits]


def _require_welded(code: CodeSpec):
    if code.family != WELDED:
        raise ValueError(f"expected a welded code, got {code.family!r}")


def decode_welded_z(code: CodeSpec, erased, sigma) -> np.ndarray:
    """Peel, then freeze a forest of the non-welded qubits, peel again, then solve."""
    _require_welded(code)
    tanner = TannerGraph.for_x_checks(code, erased, sigma)
    peel(tanner)
    tanner.settle_quiet()
    if tanner.active.any():
        interior = tanner.active & ~code.qubit_meta.welded
        tanner.freeze(np.flatnonzero(freeze_by_forest_z(code, interior, allowed=interior)))
        peel(tanner)
    return _finish(tanner, "X-check")


def trap_solids(code: CodeSpec, unresolved) -> list[RegionReport]:
    """Trapping in every solid separately; welded qubits count as unerased."""
    _require_welded(code)
    dual = code.dual
    interior = np.asarray(unresolved, dtype=bool) & ~code.qubit_meta.welded
    reports = []
    for row in code.solid_qubits:
        blocked = interior[row]
        if blocked.any():
            reports.append(trap_regions(dual.qubit_cells, dual.num_cells, blocked, row, code))
    return reports


def decode_welded_x(code: CodeSpec, erased, tau, stuck_policy: str = GAUSS) -> np.ndarray | None:
    """Peel and trap solid by solid; fall back to elimination or report failure."""
    _require_welded(code)
    _check_policy(stuck_policy)
    tanner = TannerGraph.for_z_checks(code, erased, tau)
    while True:
        peel(tanner)
        tanner.settle_quiet()
        if not tanner.active.any():
            return tanner.estimate
        reports = trap_solids(code, tanner.active)
        merged = RegionReport(
            label=np.zeros(0, np.int64),
            candidates=[c for r in reports for c in r.candidates],
            usable=np.concatenate([r.usable for r in reports]) if reports else np.zeros(0, bool))
        picks = triangular_freeze(merged, code.n)
        if picks.size == 0:
            break
        tanner.freeze(picks)
    if stuck_policy == DECLARE_FAILURE:
        return None
    return _finish(tanner, "Z-check")


def decode_welded_gauss(code: CodeSpec, erased, sigma, tau):
    """(x, z) estimates by direct elimination in both sectors."""
    return decode_erasure_gauss(code, erased, sigma, tau)
