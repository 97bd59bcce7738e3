"""Multi-rule Toom decoder for bit-flip errors on the solid code.

Work in the dual picture: each qubit edge is a dual plaquette whose four
sides are the primal faces containing the edge.  For an edge along axis ``d``
the in-plane axes ``(a, b)`` are ``(x, y)``, ``(y, z)`` or ``(z, x)`` for
``d = z, x, y``.  The sides are named

* ``e``: the face spanned by ``d`` and ``+a`` (normal ``b``, same base point),
* ``w``: the face spanned by ``d`` and ``-a``,
* ``n``: the face spanned by ``d`` and ``+b`` (normal ``a``, same base point),
* ``s``: the face spanned by ``d`` and ``-b``.

A rule such as ``ne`` flips a qubit whenever both its ``n`` and ``e`` faces
carry a syndrome.  Sides that fall outside the lattice are missing and rules
that need them are skipped for that qubit.

Stubborn leftovers are handled by a plane cut.  The X logical is a membrane
of vertical edges at one height, so an uncorrectable residue is a syndrome
string of vertical faces at a single level ``L``.  Such a string cuts the
membrane of ``(ell+1)**2`` vertical edges at that level into pieces; flipping
the smaller of two pieces clears it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .codes import CodeSpec, SOLID

SLOTS = {"n": 0, "e": 1, "s": 2, "w": 3}
RULES = ("ne", "es", "sw", "wn", "ns", "ew")
PLANE_ORDER = (2, 0, 1)
_IN_PLANE = {2: (0, 1), 0: (1, 2), 1: (2, 0)}


@dataclass(eq=False)
class ToomGeometry:
    slots: np.ndarray          # (n, 4) Z-check row per side, -1 if missing
    order: np.ndarray          # sweep order over qubits
    levels: list               # per level: (cell_qubits, faces, face_cells, face_links)


def _sweep_order(lat, plane_order) -> np.ndarray:
    eq = lat.edge_qubit
    keys = []
    for e in lat.qubit_edges:
        d = int(lat.edge_dir[e])
        a, b = _IN_PLANE[d]
        c = lat.edge_coords[e]
        keys.append((plane_order.index(d), c[d], -c[b], c[a], eq[e]))
    keys.sort()
    return np.array([k[-1] for k in keys], dtype=np.int64)


def toom_geometry(code: CodeSpec, plane_order=PLANE_ORDER) -> ToomGeometry:
    key = ("toom", tuple(plane_order))
    geo = code._cache.get(key)
    if geo is not None:
        return geo
    if code.family != SOLID:
        raise ValueError("the Toom decoder is defined for the solid code only")
    lat = code.lattice
    fi = lat.face_index
    row_of_face = np.full(lat.num_faces, -1, dtype=np.int64)
    row_of_face[code.zcheck_face] = np.arange(len(code.zcheck_face))

    def row(p, normal):
        f = fi.get((*p, normal))
        return -1 if f is None else int(row_of_face[f])

    slots = np.full((code.n, 4), -1, dtype=np.int64)
    for q, e in enumerate(lat.qubit_edges):
        d = int(lat.edge_dir[e])
        a, b = _IN_PLANE[d]
        p = lat.edge_coords[e].tolist()
        pa = list(p)
        pa[a] -= 1
        pb = list(p)
        pb[b] -= 1
        slots[q] = (row(p, a), row(p, b), row(pb, a), row(pa, b))

    ell, ei = lat.ell, lat.edge_index
    cube_row = {tuple(c): i for i, c in enumerate(lat.cube_coords.tolist())}
    levels = []
    for L in range(ell + 1):
        cells = np.array([[lat.edge_qubit[ei[(x, y, L, 2)]] for y in range(ell + 1)]
                          for x in range(ell + 1)], dtype=np.int64)
        faces, face_cells, face_links = [], [], []
        for normal, step in ((0, (0, 1)), (1, (1, 0))):
            for x in range(ell + 1 - step[0]):
                for y in range(ell + 1 - step[1]):
                    r = row((x, y, L), normal)
                    faces.append(r)
                    face_cells.append(((x, y), (x + step[0], y + step[1])))
                    # cubes either side of the face within the level
                    side = (1, 0) if normal == 0 else (0, 1)
                    links = [cube_row.get((x - side[0], y - side[1], L), -1),
                             cube_row.get((x, y, L), -1)]
                    face_links.append([c for c in links if c >= 0])
        levels.append((cells, np.array(faces, dtype=np.int64), face_cells, face_links))
    geo = ToomGeometry(slots=slots, order=_sweep_order(lat, tuple(plane_order)), levels=levels)
    code._cache[key] = geo
    return geo


@dataclass(eq=False)
class SweepState:
    tau: np.ndarray
    estimate: np.ndarray
    rule: str = "ne"
    i: int = 0
    j: int = 0
    ok: bool = False
    history: list = field(default_factory=list)

    @classmethod
    def start(cls, code: CodeSpec, tau) -> "SweepState":
        tau = np.array(tau, dtype=np.uint8)
        if len(tau) != code.num_zchecks:
            raise ValueError(f"syndrome length {len(tau)} != {code.num_zchecks} Z checks")
        return cls(tau=tau, estimate=np.zeros(code.n, dtype=np.uint8), ok=not tau.any())


@nb.njit(cache=True)
def _sweep(order, slots, ra, rb, tau, est):
    flips = 0
    for q in order:
        fa = slots[q, ra]
        fb = slots[q, rb]
        if fa < 0 or fb < 0:
            continue
        if tau[fa] and tau[fb]:
            est[q] ^= 1
            flips += 1
            for k in range(4):
                f = slots[q, k]
                if f >= 0:
                    tau[f] ^= 1
    return flips


@nb.njit(cache=True)
def _schedule(order, slots, rule_pairs, imax, jmax, tau, est):
    for i in range(imax):
        for r in range(rule_pairs.shape[0]):
            for j in range(jmax):
                flips = _sweep(order, slots, rule_pairs[r, 0], rule_pairs[r, 1], tau, est)
                if not tau.any():
                    return True
                if flips == 0:
                    break
    return not tau.any()


def _rule_pairs(rules) -> np.ndarray:
    for r in rules:
        if len(r) != 2 or r[0] not in SLOTS or r[1] not in SLOTS or r[0] == r[1]:
            raise ValueError(f"unknown Toom rule {r!r}")
    return np.array([(SLOTS[r[0]], SLOTS[r[1]]) for r in rules], dtype=np.int64).reshape(-1, 2)


def sweep_once(state: SweepState, code: CodeSpec, geometry: ToomGeometry | None = None) -> SweepState:
    """Apply the state's current rule once over the whole sweep order."""
    geo = geometry or toom_geometry(code)
    pair = _rule_pairs([state.rule])[0]
    flips = _sweep(geo.order, geo.slots, pair[0], pair[1], state.tau, state.estimate)
    state.history.append((state.rule, int(flips)))
    state.ok = not state.tau.any()
    return state


def residual_string_fix(state: SweepState, code: CodeSpec, geometry: ToomGeometry | None = None) -> SweepState:
    """Clear leftover syndrome strings by flipping the smaller side of each cut."""
    geo = geometry or toom_geometry(code)
    tau = state.tau
    if not tau.any():
        state.ok = True
        return state
    in_levels = np.zeros(len(tau), dtype=bool)
    for _, faces, _, _ in geo.levels:
        in_levels[faces] = True
    if (tau.astype(bool) & ~in_levels).any():
        state.ok = False
        return state

    for cells, faces, face_cells, face_links in geo.levels:
        hot = [k for k in range(len(faces)) if tau[faces[k]]]
        for comp in _components(hot, face_links):
            part = _smaller_side(cells.shape[0], comp, face_cells)
            if part is None:
                state.ok = False
                return state
            for x, y in part:
                q = cells[x, y]
                state.estimate[q] ^= 1
                for f in geo.slots[q]:
                    if f >= 0:
                        tau[f] ^= 1
    state.ok = not tau.any()
    return state


def _components(hot, face_links):
    """Group syndrome faces of one level that meet at a shared cube."""
    by_cube: dict = {}
    for k in hot:
        for c in face_links[k]:
            by_cube.setdefault(c, []).append(k)
    parent = {k: k for k in hot}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for ks in by_cube.values():
        for k in ks[1:]:
            ra, rb = find(ks[0]), find(k)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict = {}
    for k in hot:
        groups.setdefault(find(k), []).append(k)
    return [groups[r] for r in sorted(groups)]


def _smaller_side(side, comp, face_cells):
    cut = {frozenset(face_cells[k]) for k in comp}
    label = -np.ones((side, side), dtype=np.int64)
    parts = []
    for sx in range(side):
        for sy in range(side):
            if label[sx, sy] >= 0:
                continue
            label[sx, sy] = len(parts)
            stack, part = [(sx, sy)], []
            while stack:
                x, y = stack.pop()
                part.append((x, y))
                for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                    if 0 <= nx < side and 0 <= ny < side and label[nx, ny] < 0 \
                            and frozenset(((x, y), (nx, ny))) not in cut:
                        label[nx, ny] = len(parts)
                        stack.append((nx, ny))
            parts.append(part)
    if len(parts) != 2:
        return None
    # parts[0] holds the lowest cell, so it wins ties
    return parts[0] if len(parts[0]) <= len(parts[1]) else parts[1]


def default_limits(ell: int) -> tuple[int, int]:
    return math.ceil(ell / 2), ell


def run_toom(code: CodeSpec, tau, imax: int | None = None, jmax: int | None = None,
             rules=RULES, plane_order=PLANE_ORDER) -> SweepState:
    geo = toom_geometry(code, plane_order)
    d_imax, d_jmax = default_limits(code.lattice.ell)
    imax = d_imax if imax is None else int(imax)
    jmax = d_jmax if jmax is None else int(jmax)
    if imax < 0 or jmax < 0:
        raise ValueError("iteration limits must be non-negative")
    pairs = _rule_pairs(rules)
    state = SweepState.start(code, tau)
    if state.ok:
        return state
    state.ok = bool(_schedule(geo.order, geo.slots, pairs, imax, jmax,
                              state.tau, state.estimate))
    if not state.ok:
        residual_string_fix(state, code, geo)
    return state


def decode_bitflip(code: CodeSpec, tau, imax: int | None = None, jmax: int | None = None,
                   rules=RULES, plane_order=PLANE_ORDER) -> np.ndarray | None:
    """X-error estimate reproducing ``tau``, or ``None`` when the decoder gives up."""
    state = run_toom(code, tau, imax, jmax, rules, plane_order)
    return state.estimate if state.ok else None
