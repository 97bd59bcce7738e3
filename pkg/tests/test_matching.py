import itertools
from functools import lru_cache

import numpy as np
import pytest

from toric3d.codes import PauliFrame, build_code, is_logical_failure, syndrome
from toric3d.matching import (MatchingError, build_aux_graph, decode_phase, lattice_distances,
                              matching_weight, min_weight_matching)
from toric3d.noise import sample_phaseflip, trial_rng


@lru_cache(maxsize=None)
def code(family, ell):
    return build_code(family, ell)


def closed_form_distance(lat, u, v):
    a, b = lat.vertex_coords[u], lat.vertex_coords[v]
    d = np.abs(a - b)
    if lat.kind == "periodic":
        d = np.minimum(d, lat.ell - d)
    return int(d.sum())


def closed_form_boundary(lat, v):
    z = int(lat.vertex_coords[v][2])
    return min(z, lat.ell + 1 - z)


def test_adjacent_vertices():
    c = code("solid", 2)
    lat = c.lattice
    e = lat.qubit_edges[7]
    u, v = lat.edge_vertices[e]
    sp = lattice_distances(c, [u])
    assert sp.dist[0, v] == 1
    assert sp.path(0, v).tolist() == [lat.edge_qubit[e]]


def test_top_layer_boundary_distance():
    c = code("solid", 2)
    lat = c.lattice
    v = lat.vertex_index[(1, 1, 2)]
    cap, d = lattice_distances(c, [v]).boundary(0)
    assert d == 1
    assert lat.vertex_coords[cap].tolist() == [1, 1, 3]


@pytest.mark.parametrize("family,ell", [("periodic3d", 4), ("solid", 3)])
def test_bfs_matches_closed_form(family, ell):
    c = code(family, ell)
    lat = c.lattice
    real = np.flatnonzero(~lat.vertex_dummy)
    sp = lattice_distances(c, real)
    for i, u in enumerate(real):
        for v in real:
            assert sp.dist[i, v] == closed_form_distance(lat, u, v)
        if family == "solid":
            assert sp.boundary(i)[1] == closed_form_boundary(lat, u)
    if family == "periodic3d":
        assert sp.dist.max() <= 3 * (ell // 2)


def test_paths_are_shortest_and_connect():
    c = code("solid", 3)
    lat = c.lattice
    real = np.flatnonzero(~lat.vertex_dummy)
    sp = lattice_distances(c, real[:5])
    for i in range(5):
        for v in real[::7]:
            path = sp.path(i, v)
            assert len(path) == sp.dist[i, v]
            ends = lat.edge_vertices[lat.qubit_edges[path]].ravel()
            odd = set(np.flatnonzero(np.bincount(ends, minlength=lat.num_vertices) & 1))
            assert odd == ({real[i], v} if real[i] != v else set())


def test_zero_syndrome():
    c = code("solid", 2)
    assert not decode_phase(c, np.zeros(c.num_xchecks, np.uint8)).any()


def test_single_interior_error():
    c = code("solid", 2)
    q = np.flatnonzero(~c.qubit_meta.boundary)[10]
    e = PauliFrame.zeros(c.n)
    e.z[q] = 1
    est = decode_phase(c, syndrome(c, e).sigma)
    assert np.flatnonzero(est).tolist() == [q]


def test_single_half_edge_error():
    c = code("solid", 2)
    for q in np.flatnonzero(c.qubit_meta.boundary):
        e = PauliFrame.zeros(c.n)
        e.z[q] = 1
        s = syndrome(c, e).sigma
        assert s.sum() == 1
        assert np.flatnonzero(decode_phase(c, s)).tolist() == [q]


def test_periodic_odd_defects_rejected():
    c = code("periodic3d", 3)
    sigma = np.zeros(c.num_xchecks, np.uint8)
    sigma[[0, 4, 9]] = 1
    with pytest.raises(MatchingError):
        decode_phase(c, sigma)


def test_syndrome_length_checked():
    c = code("solid", 2)
    with pytest.raises(ValueError):
        decode_phase(c, np.zeros(3, np.uint8))


def brute_min_weight(lat, defects):
    """Minimum over all pairings, each defect optionally matched to the boundary."""
    defects = list(defects)

    def best(rest):
        if not rest:
            return 0
        u, others = rest[0], rest[1:]
        options = [closed_form_boundary(lat, u) + best(others)]
        for k, v in enumerate(others):
            options.append(closed_form_distance(lat, u, v) + best(others[:k] + others[k + 1:]))
        return min(options)

    return best(tuple(defects))


@pytest.mark.parametrize("seed", range(40))
def test_matching_weight_is_optimal(seed):
    c = code("solid", 2)
    lat = c.lattice
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 7))
    defects = rng.choice(np.flatnonzero(~lat.vertex_dummy), size=m, replace=False)
    aux = build_aux_graph(c, defects)
    pairs = min_weight_matching(aux)
    assert matching_weight(aux, pairs) == brute_min_weight(lat, defects)


def test_aux_graph_structure():
    c = code("solid", 3)
    lat = c.lattice
    defects = np.flatnonzero(~lat.vertex_dummy)[[0, 5, 17, 30]]
    aux = build_aux_graph(c, defects)
    boundary = aux.edges[aux.edges[:, 1] < 0]
    assert len(boundary) == 4
    assert aux.num_nodes == 8
    for u, v, w in aux.edges[aux.edges[:, 1] >= 0]:
        assert w == closed_form_distance(lat, defects[u], defects[v])


def test_consistency_random_frames():
    c = code("solid", 3)
    for t in range(10_000):
        p = 0.01 + 0.04 * (t % 5) / 4
        e = sample_phaseflip(c.n, p, trial_rng(5, 0, t))
        s = syndrome(c, e).sigma
        est = decode_phase(c, s)
        assert (syndrome(c, PauliFrame(np.zeros(c.n, np.uint8), est)).sigma == s).all()


def test_exhaustive_low_weight_against_ml():
    c = code("solid", 2)
    n = c.n
    for q in range(n):
        e = PauliFrame.zeros(n)
        e.z[q] = 1
        est = decode_phase(c, syndrome(c, e).sigma)
        assert is_logical_failure(c, PauliFrame(e.x, e.z ^ est)) == (False, False)
    for a, b in itertools.combinations(range(n), 2):
        e = PauliFrame.zeros(n)
        e.z[[a, b]] = 1
        est = decode_phase(c, syndrome(c, e).sigma)
        is_logical_failure(c, PauliFrame(e.x, e.z ^ est))  # raises if syndrome not cleared


def test_periodic_decoding_consistent():
    c = code("periodic3d", 4)
    for t in range(300):
        e = sample_phaseflip(c.n, 0.03, trial_rng(9, 0, t))
        est = decode_phase(c, syndrome(c, e).sigma)
        is_logical_failure(c, PauliFrame(e.x, e.z ^ est))
