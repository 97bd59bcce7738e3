"""Cubic cell complexes for the 3D toric code.

Two geometries are supported:

* ``periodic``: an ``ell x ell x ell`` torus.
* ``solid``: vertex layers ``z = 1..ell`` of ``(ell+1) x (ell+1)`` grids with a
  rough boundary above and below.  Every ``(x, y)`` column carries a half edge
  below layer 1 and above layer ``ell``; each half edge ends on its own dummy
  vertex (at ``z = 0`` or ``z = ell + 1``).  Dummy vertices are joined by dummy
  edges, which in turn bound dummy horizontal faces and half-height dummy cubes.
  Dummy elements never carry qubits or checks.

Elements of each class are indexed densely in lexicographic
``(x, y, z, orientation)`` order.  An edge's orientation is its direction
(0=x, 1=y, 2=z); a face's orientation is its normal direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

PERIODIC = "periodic"
SOLID = "solid"

_UNIT = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def _other_axes(c: int) -> tuple[int, int]:
    a, b = [d for d in range(3) if d != c]
    return a, b


def _shift(p, d, s=1):
    q = list(p)
    q[d] += s
    return tuple(q)


def _csr(lists):
    ptr = np.zeros(len(lists) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(x) for x in lists])
    idx = np.fromiter((i for x in lists for i in x), dtype=np.int64, count=int(ptr[-1]))
    return ptr, idx


@dataclass(eq=False)
class Lattice3D:
    """Indexed cubic cell complex with incidence tables.

    Coordinates are integer triples; together with the orientation column they
    identify each element.  ``edge_vertices`` holds the two endpoints of each
    edge (for a half edge: the real vertex first, then its dummy cap).
    ``face_edges`` lists the four edges of every face in the order
    ``(p,a), (p,b), (p+b,a), (p+a,b)`` where ``a < b`` are the in-plane axes.
    """

    kind: str
    ell: int
    vertex_coords: np.ndarray
    vertex_dummy: np.ndarray
    edge_coords: np.ndarray
    edge_dir: np.ndarray
    edge_dummy: np.ndarray
    edge_vertices: np.ndarray
    face_coords: np.ndarray
    face_normal: np.ndarray
    face_dummy: np.ndarray
    face_edges: np.ndarray
    cube_coords: np.ndarray
    cube_dummy: np.ndarray
    cube_faces: np.ndarray
    _incidence: dict = field(default_factory=dict, repr=False)

    # ------------------------------------------------------------------ sizes
    @property
    def num_vertices(self) -> int:
        return len(self.vertex_coords)

    @property
    def num_edges(self) -> int:
        return len(self.edge_coords)

    @property
    def num_faces(self) -> int:
        return len(self.face_coords)

    @property
    def num_cubes(self) -> int:
        return len(self.cube_coords)

    # ----------------------------------------------------------------- qubits
    @cached_property
    def qubit_edges(self) -> np.ndarray:
        """Edge index of every qubit; qubits are the non-dummy edges in order."""
        return np.flatnonzero(~self.edge_dummy)

    @cached_property
    def edge_qubit(self) -> np.ndarray:
        out = np.full(self.num_edges, -1, dtype=np.int64)
        out[self.qubit_edges] = np.arange(len(self.qubit_edges))
        return out

    @property
    def num_qubits(self) -> int:
        return len(self.qubit_edges)

    @cached_property
    def half_edges(self) -> np.ndarray:
        """Non-dummy edges with one dummy endpoint."""
        ends = self.vertex_dummy[self.edge_vertices]
        return np.flatnonzero(~self.edge_dummy & ends.any(axis=1))

    # -------------------------------------------------------------- incidence
    def _inverse(self, name, table, size):
        if name not in self._incidence:
            lists = [[] for _ in range(size)]
            for i, row in enumerate(table):
                for j in row:
                    if j >= 0:
                        lists[j].append(i)
            self._incidence[name] = _csr(lists)
        return self._incidence[name]

    @property
    def vertex_edge_csr(self):
        return self._inverse("ve", self.edge_vertices, self.num_vertices)

    @property
    def edge_face_csr(self):
        return self._inverse("ef", self.face_edges, self.num_edges)

    @property
    def face_cube_csr(self):
        return self._inverse("fc", self.cube_faces, self.num_faces)

    def edges_of(self, v: int) -> np.ndarray:
        ptr, idx = self.vertex_edge_csr
        return idx[ptr[v]:ptr[v + 1]]

    def vertices_of(self, e: int) -> np.ndarray:
        return self.edge_vertices[e]

    def faces_of(self, e: int) -> np.ndarray:
        ptr, idx = self.edge_face_csr
        return idx[ptr[e]:ptr[e + 1]]

    def boundary_edges(self, f: int) -> np.ndarray:
        return self.face_edges[f]

    def cubes_of(self, f: int) -> np.ndarray:
        ptr, idx = self.face_cube_csr
        return idx[ptr[f]:ptr[f + 1]]

    def faces_of_cube(self, c: int) -> np.ndarray:
        return self.cube_faces[c]

    @cached_property
    def vertex_index(self) -> dict:
        return {tuple(c): i for i, c in enumerate(self.vertex_coords.tolist())}

    @cached_property
    def edge_index(self) -> dict:
        return {(*c, d): i for i, (c, d) in
                enumerate(zip(self.edge_coords.tolist(), self.edge_dir.tolist()))}

    @cached_property
    def face_index(self) -> dict:
        return {(*c, d): i for i, (c, d) in
                enumerate(zip(self.face_coords.tolist(), self.face_normal.tolist()))}

    def dump(self) -> list[str]:
        """One line per element: class, index, coordinates, orientation, dummy flag."""
        lines = []
        for i, (c, d) in enumerate(zip(self.vertex_coords, self.vertex_dummy)):
            lines.append(f"vertex {i} {c[0]} {c[1]} {c[2]} - {int(d)}")
        for i in range(self.num_edges):
            c = self.edge_coords[i]
            lines.append(f"edge {i} {c[0]} {c[1]} {c[2]} {self.edge_dir[i]} "
                         f"{int(self.edge_dummy[i])}")
        for i in range(self.num_faces):
            c = self.face_coords[i]
            lines.append(f"face {i} {c[0]} {c[1]} {c[2]} {self.face_normal[i]} "
                         f"{int(self.face_dummy[i])}")
        for i, (c, d) in enumerate(zip(self.cube_coords, self.cube_dummy)):
            lines.append(f"cube {i} {c[0]} {c[1]} {c[2]} - {int(d)}")
        return lines


def _assemble(kind, ell, vertices, edges, faces, cubes, wrap):
    """Index element tuples and resolve incidences.

    ``vertices``: list of ((x,y,z), dummy); ``edges``/``faces``: list of
    ((x,y,z), orientation, dummy); ``cubes``: list of ((x,y,z), dummy).
    """
    vertices = sorted(vertices)
    edges = sorted(edges)
    faces = sorted(faces)
    cubes = sorted(cubes)

    def norm(p):
        return tuple(c % ell for c in p) if wrap else tuple(p)

    vidx = {p: i for i, (p, _) in enumerate(vertices)}
    eidx = {(p, d): i for i, (p, d, _) in enumerate(edges)}
    fidx = {(p, c): i for i, (p, c, _) in enumerate(faces)}

    edge_vertices = np.array(
        [(vidx[norm(p)], vidx[norm(_shift(p, d))]) for p, d, _ in edges], dtype=np.int64)
    # half edges list the real endpoint first
    vdummy = np.array([dm for _, dm in vertices], dtype=bool)
    swap = vdummy[edge_vertices[:, 0]] & ~vdummy[edge_vertices[:, 1]]
    edge_vertices[swap] = edge_vertices[swap][:, ::-1]

    face_edges = []
    for p, c, _ in faces:
        a, b = _other_axes(c)
        face_edges.append((eidx[(norm(p), a)], eidx[(norm(p), b)],
                           eidx[(norm(_shift(p, b)), a)], eidx[(norm(_shift(p, a)), b)]))
    cube_faces = []
    for p, _ in cubes:
        row = []
        for c in range(3):
            row.append(fidx[(norm(p), c)])
            row.append(fidx[(norm(_shift(p, c)), c)])
        cube_faces.append(row)

    return Lattice3D(
        kind=kind,
        ell=ell,
        vertex_coords=np.array([p for p, _ in vertices], dtype=np.int64).reshape(-1, 3),
        vertex_dummy=vdummy,
        edge_coords=np.array([p for p, _, _ in edges], dtype=np.int64).reshape(-1, 3),
        edge_dir=np.array([d for _, d, _ in edges], dtype=np.int64),
        edge_dummy=np.array([dm for _, _, dm in edges], dtype=bool),
        edge_vertices=edge_vertices,
        face_coords=np.array([p for p, _, _ in faces], dtype=np.int64).reshape(-1, 3),
        face_normal=np.array([c for _, c, _ in faces], dtype=np.int64),
        face_dummy=np.array([dm for _, _, dm in faces], dtype=bool),
        face_edges=np.array(face_edges, dtype=np.int64).reshape(-1, 4),
        cube_coords=np.array([p for p, _ in cubes], dtype=np.int64).reshape(-1, 3),
        cube_dummy=np.array([dm for _, dm in cubes], dtype=bool),
        cube_faces=np.array(cube_faces, dtype=np.int64).reshape(-1, 6),
    )


def build_periodic(ell: int) -> Lattice3D:
    """Cubic lattice on the 3-torus of linear size ``ell`` (``ell >= 2``)."""
    if int(ell) != ell or ell < 2:
        raise ValueError(f"periodic lattice needs ell >= 2, got {ell!r}")
    ell = int(ell)
    pts = [(x, y, z) for x in range(ell) for y in range(ell) for z in range(ell)]
    vertices = [(p, False) for p in pts]
    edges = [(p, d, False) for p in pts for d in range(3)]
    faces = [(p, c, False) for p in pts for c in range(3)]
    cubes = [(p, False) for p in pts]
    return _assemble(PERIODIC, ell, vertices, edges, faces, cubes, wrap=True)


def build_solid(ell: int) -> Lattice3D:
    """Cubic lattice with rough top and bottom boundaries (``ell >= 1``)."""
    if int(ell) != ell or ell < 1:
        raise ValueError(f"solid lattice needs ell >= 1, got {ell!r}")
    ell = int(ell)
    top = ell + 1
    span = range(ell + 1)

    vertices = [((x, y, z), z in (0, top))
                for x in span for y in span for z in range(ell + 2)]
    edges = []
    for z in range(ell + 2):
        dummy = z in (0, top)
        edges += [((x, y, z), 0, dummy) for x in range(ell) for y in span]
        edges += [((x, y, z), 1, dummy) for x in span for y in range(ell)]
    # vertical edges: z=0 and z=ell are half edges, the rest are full
    edges += [((x, y, z), 2, False) for x in span for y in span for z in range(ell + 1)]

    faces = []
    for z in range(ell + 2):
        faces += [((x, y, z), 2, z in (0, top)) for x in range(ell) for y in range(ell)]
    for z in range(ell + 1):
        faces += [((x, y, z), 1, False) for x in range(ell) for y in span]
        faces += [((x, y, z), 0, False) for x in span for y in range(ell)]

    cubes = [((x, y, z), z in (0, ell))
             for x in range(ell) for y in range(ell) for z in range(ell + 1)]
    return _assemble(SOLID, ell, vertices, edges, faces, cubes, wrap=False)


@dataclass(eq=False)
class DualView:
    """Dual picture used by the bit-flip decoders.

    Dual cells are primal vertices, dual faces (qubits) are primal edges, dual
    edges (Z checks) are primal faces and dual vertices are primal cubes, so
    every dual element shares its index with its primal preimage.  For the
    solid lattice each half edge leads to its own dummy cap, which plays the
    role of a degree-one "pocket" cell; dummy edges are not traversable.
    """

    lattice: Lattice3D
    cell_vertex: np.ndarray   # primal vertex of each cell
    cell_pocket: np.ndarray   # True for dummy pocket cells
    qubit_cells: np.ndarray   # (n, 2) cells on either side of every qubit

    @property
    def num_cells(self) -> int:
        return len(self.cell_vertex)

    @property
    def num_pockets(self) -> int:
        return int(self.cell_pocket.sum())

    def dual_vertex_of_cube(self, c: int) -> int:
        return c

    def dual_edge_of_face(self, f: int) -> int:
        return f

    def dual_face_of_edge(self, e: int) -> int:
        return e

    def cell_of_vertex(self, v: int) -> int:
        return v

    @cached_property
    def cell_degree(self) -> np.ndarray:
        return np.bincount(self.qubit_cells.ravel(), minlength=self.num_cells)


def dual_view(lattice: Lattice3D) -> DualView:
    cells = np.arange(lattice.num_vertices)
    qubit_cells = lattice.edge_vertices[lattice.qubit_edges]
    return DualView(lattice=lattice, cell_vertex=cells,
                    cell_pocket=lattice.vertex_dummy.copy(), qubit_cells=qubit_cells)
