"""Phase-flip decoding by shortest paths and minimum-weight perfect matching.

Defects are the vertices with a violated X check.  Breadth-first search from
every defect gives hop distances along qubit edges; on the solid lattice the
dummy caps at the end of half edges act as the boundary.  An auxiliary graph
joins defects pairwise and each defect to its own boundary copy; boundary
copies are mutually free, which is exactly a shared virtual boundary for the
matching engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np
import pymatching
import scipy.sparse as sp

from .codes import CodeSpec


class MatchingError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class QubitGraph:
    """Vertices joined by qubit edges, neighbours listed by ascending qubit."""

    ptr: np.ndarray
    nbr: np.ndarray
    qubit: np.ndarray
    is_cap: np.ndarray
    num_qubits: int


def qubit_graph(code: CodeSpec) -> QubitGraph:
    g = code._cache.get("qubit_graph")
    if g is None:
        lat = code.lattice
        ends = lat.edge_vertices[lat.qubit_edges]
        n, nv = len(ends), lat.num_vertices
        src = np.concatenate([ends[:, 0], ends[:, 1]])
        dst = np.concatenate([ends[:, 1], ends[:, 0]])
        q = np.concatenate([np.arange(n), np.arange(n)])
        order = np.lexsort((q, src))
        ptr = np.zeros(nv + 1, dtype=np.int64)
        np.add.at(ptr, src + 1, 1)
        g = QubitGraph(np.cumsum(ptr), dst[order].astype(np.int64),
                       q[order].astype(np.int64), lat.vertex_dummy.copy(), n)
        code._cache["qubit_graph"] = g
    return g


@nb.njit(cache=True)
def _bfs_rows(ptr, nbr, is_cap, sources, nv):
    dist = np.full((len(sources), nv), -1, dtype=np.int32)
    queue = np.empty(nv, dtype=np.int64)
    for s in range(len(sources)):
        d = dist[s]
        d[sources[s]] = 0
        queue[0] = sources[s]
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            if is_cap[u]:
                continue
            for k in range(ptr[u], ptr[u + 1]):
                w = nbr[k]
                if d[w] < 0:
                    d[w] = d[u] + 1
                    queue[tail] = w
                    tail += 1
    return dist


@nb.njit(cache=True)
def _trace(ptr, nbr, qubit, dist_row, target, out):
    """Walk back from ``target`` along lowest-index edges, toggling ``out``."""
    u = target
    while dist_row[u] > 0:
        want = dist_row[u] - 1
        for k in range(ptr[u], ptr[u + 1]):
            w = nbr[k]
            if dist_row[w] == want:
                out[qubit[k]] ^= 1
                u = w
                break


@dataclass(eq=False)
class ShortestPaths:
    graph: QubitGraph
    sources: np.ndarray
    dist: np.ndarray        # (len(sources), num_vertices), -1 = unreachable

    def boundary(self, i: int) -> tuple[int, int]:
        """(cap vertex, distance) of the nearest dummy cap from source ``i``; (-1, -1) if none."""
        row = self.dist[i]
        caps = np.flatnonzero(self.graph.is_cap & (row >= 0))
        if caps.size == 0:
            return -1, -1
        best = caps[np.argmin(row[caps])]
        return int(best), int(row[best])

    def path(self, i: int, target: int) -> np.ndarray:
        """Qubits on the canonical shortest path from source ``i`` to ``target``."""
        g = self.graph
        out = np.zeros(g.num_qubits, dtype=np.uint8)
        _trace(g.ptr, g.nbr, g.qubit, self.dist[i], target, out)
        return np.flatnonzero(out)


def lattice_distances(code: CodeSpec, sources) -> ShortestPaths:
    g = qubit_graph(code)
    sources = np.asarray(sources, dtype=np.int64)
    return ShortestPaths(g, sources, _bfs_rows(g.ptr, g.nbr, g.is_cap, sources, len(g.is_cap)))


@dataclass(eq=False)
class AuxGraph:
    """Defect graph handed to the matching engine.

    ``edges`` rows are ``(u, v, weight)`` with ``v = -1`` for the edge from
    defect ``u`` to its boundary copy.
    """

    defects: np.ndarray
    edges: np.ndarray
    caps: np.ndarray
    paths: ShortestPaths

    @property
    def num_nodes(self) -> int:
        return 2 * len(self.defects) if len(self.caps) and (self.caps >= 0).all() else len(self.defects)


def build_aux_graph(code: CodeSpec, defect_vertices) -> AuxGraph:
    paths = lattice_distances(code, defect_vertices)
    m = len(paths.sources)
    dd = paths.dist[:, paths.sources] if m else np.zeros((0, 0), np.int32)
    caps = np.full(m, -1, dtype=np.int64)
    bdist = np.full(m, -1, dtype=np.int64)
    for i in range(m):
        caps[i], bdist[i] = paths.boundary(i)
    has_boundary = m > 0 and (caps >= 0).all()
    iu, ju = np.triu_indices(m, k=1)
    w = dd[iu, ju].astype(np.int64)
    keep = w >= 0
    if has_boundary:
        # pairing u,v costs more than sending both to the boundary: never optimal
        keep &= w <= bdist[iu] + bdist[ju]
    rows = [np.stack([iu[keep], ju[keep], w[keep]], axis=1)]
    if has_boundary:
        rows.append(np.stack([np.arange(m), np.full(m, -1), bdist], axis=1))
    edges = np.concatenate(rows).astype(np.int64) if m else np.zeros((0, 3), np.int64)
    return AuxGraph(np.asarray(defect_vertices, dtype=np.int64), edges,
                    caps if has_boundary else np.zeros(0, np.int64), paths)


def min_weight_matching(aux: AuxGraph) -> list[tuple[int, int]]:
    """Exact minimum-weight perfect matching; pairs ``(u, -1)`` go to the boundary."""
    m = len(aux.defects)
    if m == 0:
        return []
    e = aux.edges
    if not len(aux.caps) and m % 2:
        raise MatchingError(f"odd number of defects ({m}) without a boundary")
    cols = np.arange(len(e))
    real = e[:, 1] >= 0
    r = np.concatenate([e[:, 0], e[real, 1]])
    c = np.concatenate([cols, cols[real]])
    check = sp.csc_matrix((np.ones(len(r), np.uint8), (r, c)), shape=(m, len(e)))
    matcher = pymatching.Matching.from_check_matrix(check, weights=e[:, 2].astype(float))
    pairs = matcher.decode_to_matched_dets_array(np.ones(m, dtype=np.uint8))
    pairs = np.asarray(pairs).reshape(-1, 2)
    seen = np.zeros(m, dtype=bool)
    out = []
    for u, v in pairs:
        u, v = int(u), int(v)
        if u < 0:
            u, v = v, u
        seen[u] = True
        if v >= 0:
            seen[v] = True
        out.append((u, v))
    if not seen.all():
        raise MatchingError("matching left a defect unmatched")
    return out


def matching_weight(aux: AuxGraph, pairs) -> int:
    lookup = {(int(u), int(v)): int(w) for u, v, w in aux.edges}
    total = 0
    for u, v in pairs:
        key = (u, v) if v < 0 or u < v else (v, u)
        total += lookup[key]
    return total


def decode_phase(code: CodeSpec, sigma) -> np.ndarray:
    """Z-error estimate whose X-check syndrome equals ``sigma``."""
    sigma = np.asarray(sigma, dtype=np.uint8)
    if len(sigma) != code.num_xchecks:
        raise ValueError(f"syndrome length {len(sigma)} != {code.num_xchecks} X checks")
    estimate = np.zeros(code.n, dtype=np.uint8)
    rows = np.flatnonzero(sigma)
    if rows.size == 0:
        return estimate
    aux = build_aux_graph(code, code.xcheck_vertex[rows])
    g, dist = aux.paths.graph, aux.paths.dist
    buf = np.zeros(code.n, dtype=np.uint8)
    for u, v in min_weight_matching(aux):
        target = aux.caps[u] if v < 0 else aux.defects[v]
        _trace(g.ptr, g.nbr, g.qubit, dist[u], target, buf)
    estimate ^= buf
    return estimate
