"""Erasure decoding: peeling, spanning-forest freezing and trapping.

The restricted Tanner graph is kept implicitly: full CSR/CSC copies of the
check matrix plus a mask of still-unresolved ("active") qubits.  Dummy
vertices carry no checks, so they never appear as rows and can never act as
peeling pivots; they only matter for the forest, where each half-edge column
gets a private dummy node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from . import gf2
from .codes import CodeSpec

FREEZE_FIRST = "freeze_first"
ALTERNATING = "alternating"
VARIANTS = (FREEZE_FIRST, ALTERNATING)
DECLARE_FAILURE = "declare_failure"
GAUSS = "gauss"
STUCK_POLICIES = (DECLARE_FAILURE, GAUSS)


class InconsistentSyndrome(RuntimeError):
    """A syndrome that no error inside the erasure can produce."""


# ------------------------------------------------------------------ kernels
@nb.njit(cache=True)
def _peel(rptr, ridx, cptr, cidx, active, synd, est):
    nrows = len(rptr) - 1
    deg = np.zeros(nrows, dtype=np.int64)
    for q in range(len(active)):
        if active[q]:
            for k in range(cptr[q], cptr[q + 1]):
                deg[cidx[k]] += 1
    stack = np.empty(2 * nrows + 1, dtype=np.int64)
    top = 0
    for r in range(nrows):
        if deg[r] == 1:
            stack[top] = r
            top += 1
    peeled = 0
    while top > 0:
        top -= 1
        r = stack[top]
        if deg[r] != 1:
            continue
        q = -1
        for k in range(rptr[r], rptr[r + 1]):
            if active[ridx[k]]:
                q = ridx[k]
                break
        bit = synd[r]
        est[q] = bit
        active[q] = False
        peeled += 1
        for k in range(cptr[q], cptr[q + 1]):
            r2 = cidx[k]
            deg[r2] -= 1
            if bit:
                synd[r2] ^= 1
            if deg[r2] == 1:
                stack[top] = r2
                top += 1
    return peeled


@nb.njit(cache=True)
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@nb.njit(cache=True)
def _forest(ends, has_dummy, candidates):
    """Freeze mask keeping a spanning forest with at most one dummy per tree."""
    parent = np.arange(len(has_dummy))
    dummy = has_dummy.copy()
    frozen = np.zeros(len(candidates), dtype=np.bool_)
    for i in range(len(candidates)):
        q = candidates[i]
        ra = _find(parent, ends[q, 0])
        rb = _find(parent, ends[q, 1])
        if ra == rb or (dummy[ra] and dummy[rb]):
            frozen[i] = True
            continue
        lo, hi = min(ra, rb), max(ra, rb)
        parent[hi] = lo
        dummy[lo] = dummy[ra] or dummy[rb]
    return frozen


@nb.njit(cache=True)
def _regions(cells, ncell, blocked):
    """Label cells connected through qubits that are not blocked."""
    parent = np.arange(ncell)
    for q in range(len(blocked)):
        if not blocked[q]:
            ra = _find(parent, cells[q, 0])
            rb = _find(parent, cells[q, 1])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    label = np.full(ncell, -1, dtype=np.int64)
    count = 0
    for c in range(ncell):
        r = _find(parent, c)
        if label[r] < 0:
            label[r] = count
            count += 1
        label[c] = label[r]
    return label, count


@nb.njit(cache=True)
def _closed(order, ptr, cand_q, tptr, tidx, nrows):
    """Per candidate group: does it commute with every Z check?"""
    acc = np.zeros(nrows, dtype=np.uint8)
    ok = np.zeros(len(ptr) - 1, dtype=np.bool_)
    for g in range(len(ptr) - 1):
        for k in range(ptr[g], ptr[g + 1]):
            q = cand_q[order[k]]
            for t in range(tptr[q], tptr[q + 1]):
                acc[tidx[t]] ^= 1
        good = True
        for k in range(ptr[g], ptr[g + 1]):
            q = cand_q[order[k]]
            for t in range(tptr[q], tptr[q + 1]):
                if acc[tidx[t]]:
                    good = False
                acc[tidx[t]] = 0
        ok[g] = good
    return ok


# -------------------------------------------------------------- Tanner graph
@dataclass(eq=False)
class TannerGraph:
    """Checks restricted to the unresolved erased qubits.

    ``active`` marks qubits still to be assigned; ``synd`` is the syndrome left
    after removing the contribution of already assigned qubits.
    """

    rptr: np.ndarray
    ridx: np.ndarray
    cptr: np.ndarray
    cidx: np.ndarray
    active: np.ndarray
    synd: np.ndarray
    estimate: np.ndarray

    @classmethod
    def build(cls, rows_csr, cols_csc, erased, syndrome) -> "TannerGraph":
        erased = np.asarray(erased, dtype=bool)
        syndrome = np.array(syndrome, dtype=np.uint8)
        if len(syndrome) != len(rows_csr[0]) - 1:
            raise ValueError(f"syndrome length {len(syndrome)} != {len(rows_csr[0]) - 1} checks")
        if len(erased) != len(cols_csc[0]) - 1:
            raise ValueError(f"erasure length {len(erased)} != {len(cols_csc[0]) - 1} qubits")
        return cls(*rows_csr, *cols_csc, erased.copy(), syndrome,
                   np.zeros(len(erased), dtype=np.uint8))

    @classmethod
    def for_x_checks(cls, code: CodeSpec, erased, sigma) -> "TannerGraph":
        return cls.build(code.H_csr, code.H_csc, erased, sigma)

    @classmethod
    def for_z_checks(cls, code: CodeSpec, erased, tau) -> "TannerGraph":
        return cls.build(code.T_csr, code.T_csc, erased, tau)

    @property
    def residual_qubits(self) -> np.ndarray:
        return np.flatnonzero(self.active)

    def check_degrees(self) -> np.ndarray:
        deg = np.zeros(len(self.rptr) - 1, dtype=np.int64)
        for q in self.residual_qubits:
            deg[self.cidx[self.cptr[q]:self.cptr[q + 1]]] += 1
        return deg

    def unexplained(self) -> bool:
        """Syndrome left that the current active qubits must explain."""
        return bool(self.synd.any())

    def freeze(self, qubits) -> None:
        qubits = np.asarray(qubits, dtype=np.int64)
        self.active[qubits] = False
        self.estimate[qubits] = 0

    def settle_quiet(self) -> None:
        """With nothing left to explain, zero is a valid assignment for the rest."""
        if not self.unexplained():
            self.freeze(self.residual_qubits)

    def solve_residual(self) -> bool:
        """Gaussian elimination on the residual system; False if inconsistent."""
        cols = self.residual_qubits
        if cols.size == 0:
            return not self.unexplained()
        touched = np.unique(np.concatenate(
            [self.cidx[self.cptr[q]:self.cptr[q + 1]] for q in cols]))
        if (self.synd.astype(bool) & ~np.isin(np.arange(len(self.synd)), touched)).any():
            return False
        local = {int(r): i for i, r in enumerate(touched)}
        a = np.zeros((len(touched), len(cols)), dtype=np.uint8)
        for j, q in enumerate(cols):
            for r in self.cidx[self.cptr[q]:self.cptr[q + 1]]:
                a[local[int(r)], j] = 1
        x = gf2.solve(a, self.synd[touched])
        if x is None:
            return False
        self.estimate[cols] = x
        self.active[cols] = False
        self.synd[touched] = 0
        return True


def peel(tanner: TannerGraph) -> tuple[np.ndarray, TannerGraph]:
    """Resolve degree-one checks until none remain; returns (estimate, tanner)."""
    _peel(tanner.rptr, tanner.ridx, tanner.cptr, tanner.cidx,
          tanner.active, tanner.synd, tanner.estimate)
    return tanner.estimate, tanner


# --------------------------------------------------------------- Z sector
def column_endpoints(code: CodeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Two graph nodes per qubit; single-check columns end on a private dummy node."""
    cached = code._cache.get("column_endpoints")
    if cached is None:
        ptr, idx = code.H_csc
        nrows = code.num_xchecks
        weights = np.diff(ptr)
        ends = np.empty((code.n, 2), dtype=np.int64)
        has_dummy = np.zeros(nrows + code.n, dtype=bool)
        for q in range(code.n):
            rows = idx[ptr[q]:ptr[q + 1]]
            if weights[q] == 2:
                ends[q] = rows
            elif weights[q] == 1:
                ends[q] = (rows[0], nrows + q)
                has_dummy[nrows + q] = True
            else:
                ends[q] = (-1, -1)
        cached = ends, has_dummy
        code._cache["column_endpoints"] = cached
    return cached


def freeze_by_forest_z(code: CodeSpec, erased, allowed=None) -> np.ndarray:
    """Erased qubits to freeze so the rest forms a forest with one dummy per tree.

    Only qubits in ``allowed`` (default: every erased qubit) take part; all of
    them must be graph edges, i.e. lie in one or two X checks.
    """
    ends, has_dummy = column_endpoints(code)
    pool = np.asarray(erased, dtype=bool) if allowed is None else np.asarray(allowed, dtype=bool)
    qubits = np.flatnonzero(pool)
    if (ends[qubits, 0] < 0).any():
        raise ValueError("forest freezing needs qubits in one or two X checks")
    frozen = np.zeros(code.n, dtype=bool)
    frozen[qubits[_forest(ends, has_dummy, qubits)]] = True
    return frozen


def _finish(tanner: TannerGraph, what: str) -> np.ndarray:
    tanner.settle_quiet()
    if tanner.active.any() and not tanner.solve_residual():
        raise InconsistentSyndrome(f"{what} syndrome is not explained by any error on the erasure")
    return tanner.estimate


def decode_erasure_z(code: CodeSpec, erased, sigma, variant: str = FREEZE_FIRST) -> np.ndarray:
    """Z-error estimate supported on the erasure with ``H @ estimate == sigma``."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    tanner = TannerGraph.for_x_checks(code, erased, sigma)
    if variant == FREEZE_FIRST:
        tanner.freeze(np.flatnonzero(freeze_by_forest_z(code, tanner.active)))
        peel(tanner)
    else:
        peel(tanner)
        while tanner.active.any() and tanner.unexplained():
            frozen = freeze_by_forest_z(code, tanner.active)
            if not frozen.any():
                break
            tanner.freeze(np.flatnonzero(frozen))
            peel(tanner)
    return _finish(tanner, "X-check")


# --------------------------------------------------------------- X sector
@dataclass(eq=False)
class RegionReport:
    """Result of one trapping pass.

    ``label[c]`` is the region of cell ``c``; ``candidates[i]`` lists the
    unresolved qubits on the boundary of region ``i``; ``usable[i]`` says the
    candidate is nonempty and commutes with every Z check.
    """

    label: np.ndarray
    candidates: list
    usable: np.ndarray

    @property
    def num_regions(self) -> int:
        return len(self.candidates)


def trap_regions(qubit_cells, num_cells, blocked, to_global, code: CodeSpec) -> RegionReport:
    """Flood fill cells through unblocked qubits and validate region boundaries.

    ``to_global`` maps local qubit indices to the qubits of ``code`` whose Z
    checks are used for validation.
    """
    blocked = np.asarray(blocked, dtype=bool)
    label, count = _regions(qubit_cells, num_cells, blocked)
    bq = np.flatnonzero(blocked)
    la, lb = label[qubit_cells[bq, 0]], label[qubit_cells[bq, 1]]
    cut = la != lb
    bq, la, lb = bq[cut], la[cut], lb[cut]
    cand_q = np.concatenate([bq, bq])
    cand_r = np.concatenate([la, lb])
    order = np.lexsort((cand_q, cand_r))
    ptr = np.zeros(count + 1, dtype=np.int64)
    np.add.at(ptr, cand_r + 1, 1)
    ptr = np.cumsum(ptr)
    gq = np.asarray(to_global, dtype=np.int64)[cand_q]
    tptr, tidx = code.T_csc
    closed = _closed(order, ptr, gq, tptr, tidx, code.num_zchecks)
    sorted_q = gq[order]
    candidates = [sorted_q[ptr[i]:ptr[i + 1]] for i in range(count)]
    usable = closed & (np.diff(ptr) > 0)
    return RegionReport(label=label, candidates=candidates, usable=usable)


def trap(code: CodeSpec, unresolved) -> RegionReport:
    """Trapping pass on the dual of a periodic or solid lattice."""
    dual = code.dual
    return trap_regions(dual.qubit_cells, dual.num_cells, unresolved, np.arange(code.n), code)


def triangular_freeze(report: RegionReport, n: int) -> np.ndarray:
    """One qubit per usable region, never inside an earlier chosen candidate.

    The chosen candidates restricted to the frozen qubits form a unit
    triangular matrix, so freezing them all at once keeps the system solvable.
    """
    covered = np.zeros(n, dtype=bool)
    picks = []
    for cand, ok in zip(report.candidates, report.usable):
        if not ok:
            continue
        free = cand[~covered[cand]]
        if free.size == 0:
            continue
        picks.append(int(free.min()))
        covered[cand] = True
    return np.array(picks, dtype=np.int64)


def _check_policy(stuck_policy):
    if stuck_policy not in STUCK_POLICIES:
        raise ValueError(f"unknown stuck policy {stuck_policy!r}; expected one of {STUCK_POLICIES}")


def decode_erasure_x(code: CodeSpec, erased, tau, stuck_policy: str = DECLARE_FAILURE) -> np.ndarray | None:
    """X-error estimate supported on the erasure with ``T @ estimate == tau``.

    Returns ``None`` when peeling and trapping stall and the policy is to
    declare failure.
    """
    _check_policy(stuck_policy)
    tanner = TannerGraph.for_z_checks(code, erased, tau)
    while True:
        peel(tanner)
        tanner.settle_quiet()
        if not tanner.active.any():
            return tanner.estimate
        picks = triangular_freeze(trap(code, tanner.active), code.n)
        if picks.size == 0:
            break
        tanner.freeze(picks)
    if stuck_policy == DECLARE_FAILURE:
        return None
    return _finish(tanner, "Z-check")


def decode_erasure_gauss(code: CodeSpec, erased, sigma, tau):
    """Both sectors by direct elimination on the restricted systems."""
    z = _finish(TannerGraph.for_x_checks(code, erased, sigma), "X-check")
    x = _finish(TannerGraph.for_z_checks(code, erased, tau), "Z-check")
    return x, z
