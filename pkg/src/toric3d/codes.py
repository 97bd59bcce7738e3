"""CSS codes on cubic lattices: 3D toric, solid and welded codes."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import gf2
from .lattice import Lattice3D, build_periodic, build_solid, dual_view

PERIODIC3D = "periodic3d"
SOLID = "solid"
WELDED = "welded"
FAMILIES = (PERIODIC3D, SOLID, WELDED)


class CodeConstructionError(RuntimeError):
    """A freshly built code failed its commutation self-check."""


class SyndromeMismatch(ValueError):
    """A residual handed to the failure test still has a nonzero syndrome."""


@dataclass(eq=False)
class QubitMeta:
    boundary: np.ndarray          # half-edge qubits
    welded: np.ndarray            # qubits sitting on a weld plane
    solids: list[tuple[int, ...]]
    geom: list[tuple]             # (solid, x, y, z, dir) of the first occurrence


@dataclass(eq=False)
class PauliFrame:
    x: np.ndarray
    z: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "PauliFrame":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @property
    def n(self) -> int:
        return len(self.x)

    def __xor__(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(self.x ^ other.x, self.z ^ other.z)


@dataclass(eq=False)
class Syndrome:
    sigma: np.ndarray   # X-check outcomes, flipped by Z errors
    tau: np.ndarray     # Z-check outcomes, flipped by X errors


def _rows_to_csr(rows, n) -> sp.csr_matrix:
    ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(r) for r in rows])
    idx = np.fromiter((q for r in rows for q in sorted(r)), dtype=np.int64, count=int(ptr[-1]))
    data = np.ones(len(idx), dtype=np.uint8)
    return sp.csr_matrix((data, idx, ptr), shape=(len(rows), n))


def _indicator(support, n) -> np.ndarray:
    v = np.zeros(n, dtype=np.uint8)
    v[list(support)] = 1
    return v


@dataclass(eq=False)
class CodeSpec:
    """A CSS code with X checks ``H`` (rows) and Z checks ``T`` (rows).

    For lattice codes, ``xcheck_vertex[i]`` is the lattice vertex of H row i and
    ``zcheck_face[j]`` the lattice face of T row j.  Welded codes keep the solid
    template in ``lattice`` plus per-solid maps from template qubits/vertices to
    global qubits/H rows (``solid_qubits``, ``solid_xchecks``).
    """

    family: str
    params: tuple
    n: int
    H: sp.csr_matrix
    T: sp.csr_matrix
    logicals_x: np.ndarray
    logicals_z: np.ndarray
    qubit_meta: QubitMeta
    lattice: Lattice3D
    xcheck_vertex: np.ndarray | None = None
    zcheck_face: np.ndarray | None = None
    solid_qubits: np.ndarray | None = None
    solid_xchecks: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    # ------------------------------------------------------------ structure
    @property
    def num_xchecks(self) -> int:
        return self.H.shape[0]

    @property
    def num_zchecks(self) -> int:
        return self.T.shape[0]

    @cached_property
    def H_csr(self):
        return self.H.indptr.astype(np.int64), self.H.indices.astype(np.int64)

    @cached_property
    def T_csr(self):
        return self.T.indptr.astype(np.int64), self.T.indices.astype(np.int64)

    @cached_property
    def H_csc(self):
        c = self.H.tocsc()
        c.sort_indices()
        return c.indptr.astype(np.int64), c.indices.astype(np.int64)

    @cached_property
    def T_csc(self):
        c = self.T.tocsc()
        c.sort_indices()
        return c.indptr.astype(np.int64), c.indices.astype(np.int64)

    @cached_property
    def rank_H(self) -> int:
        return gf2.rank(gf2.BitMatrix.from_sparse(self.H))

    @cached_property
    def rank_T(self) -> int:
        return gf2.rank(gf2.BitMatrix.from_sparse(self.T))

    @cached_property
    def k(self) -> int:
        return self.n - self.rank_H - self.rank_T

    @cached_property
    def dual(self):
        return dual_view(self.lattice)

    @cached_property
    def welded_mask(self) -> np.ndarray:
        return self.qubit_meta.welded

    # -------------------------------------------------------------- checks
    def commutation_defects(self) -> dict:
        """Counts of violated commutation relations; all zero for a valid code."""
        HT = (self.H.astype(np.int64) @ self.T.astype(np.int64).T).toarray() & 1
        lz_h = (self.H.astype(np.int64) @ self.logicals_z.T.astype(np.int64)) & 1
        lx_t = (self.T.astype(np.int64) @ self.logicals_x.T.astype(np.int64)) & 1
        pair = (self.logicals_x.astype(np.int64) @ self.logicals_z.T.astype(np.int64)) & 1
        return {
            "H_T": int(HT.sum()),
            "H_Lz": int(lz_h.sum()),
            "T_Lx": int(lx_t.sum()),
            "pairing": int(np.abs(pair - np.eye(len(pair), dtype=np.int64)).sum()),
        }

    def verify(self) -> None:
        bad = {k: v for k, v in self.commutation_defects().items() if v}
        if bad:
            raise CodeConstructionError(f"{self.family}{self.params}: {bad}")

    def logical_weights(self) -> dict:
        return {"x": [int(r.sum()) for r in self.logicals_x],
                "z": [int(r.sum()) for r in self.logicals_z]}

    def export(self, directory) -> list[Path]:
        """Write H, T and logicals as ``row_index: col col ...`` text files."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        out = []
        mats = {"H": self.H, "T": self.T,
                "logicals_x": sp.csr_matrix(self.logicals_x),
                "logicals_z": sp.csr_matrix(self.logicals_z)}
        for name, m in mats.items():
            m = sp.csr_matrix(m)
            m.sort_indices()
            lines = []
            for i in range(m.shape[0]):
                cols = m.indices[m.indptr[i]:m.indptr[i + 1]]
                lines.append(f"{i}: " + " ".join(map(str, cols)))
            path = directory / f"{name}.txt"
            path.write_text("\n".join(lines) + "\n")
            out.append(path)
        return out


def read_sparse_rows(path, n: int) -> np.ndarray:
    """Inverse of :meth:`CodeSpec.export` for a single file."""
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        _, cols = line.split(":", 1)
        rows.append(_indicator([int(c) for c in cols.split()], n))
    return np.array(rows, dtype=np.uint8).reshape(-1, n)


# ---------------------------------------------------------------- builders
def _lattice_checks(lat: Lattice3D):
    eq = lat.edge_qubit
    verts = np.flatnonzero(~lat.vertex_dummy)
    xrows = []
    for v in verts:
        xrows.append([eq[e] for e in lat.edges_of(v) if eq[e] >= 0])
    faces = np.flatnonzero(~lat.face_dummy)
    zrows = [[eq[e] for e in lat.face_edges[f] if eq[e] >= 0] for f in faces]
    return verts, xrows, faces, zrows


def _solid_logicals(lat: Lattice3D):
    """Vertical string at (0,0) and the plane of bottom half edges."""
    eq, ei = lat.edge_qubit, lat.edge_index
    ell = lat.ell
    z_string = [eq[ei[(0, 0, z, 2)]] for z in range(ell + 1)]
    x_plane = [eq[ei[(x, y, 0, 2)]] for x in range(ell + 1) for y in range(ell + 1)]
    return z_string, x_plane


def build_toric3d(lattice: Lattice3D) -> CodeSpec:
    """Vertex X checks and face Z checks on a periodic or solid lattice."""
    n = lattice.num_qubits
    verts, xrows, faces, zrows = _lattice_checks(lattice)
    eq, ei = lattice.edge_qubit, lattice.edge_index
    ell = lattice.ell
    if lattice.kind == "periodic":
        family, lx, lz = PERIODIC3D, [], []
        for d in range(3):
            loop = []
            for t in range(ell):
                p = [0, 0, 0]
                p[d] = t
                loop.append(eq[ei[(*p, d)]])
            lz.append(_indicator(loop, n))
            plane = [eq[e] for e in range(lattice.num_edges)
                     if lattice.edge_dir[e] == d and lattice.edge_coords[e, d] == 0]
            lx.append(_indicator(plane, n))
        boundary = np.zeros(n, dtype=bool)
    else:
        family = SOLID
        z_string, x_plane = _solid_logicals(lattice)
        lz, lx = [_indicator(z_string, n)], [_indicator(x_plane, n)]
        boundary = np.zeros(n, dtype=bool)
        boundary[eq[lattice.half_edges]] = True

    geom = [(0, *lattice.edge_coords[e].tolist(), int(lattice.edge_dir[e]))
            for e in lattice.qubit_edges]
    code = CodeSpec(
        family=family, params=(ell,), n=n,
        H=_rows_to_csr(xrows, n), T=_rows_to_csr(zrows, n),
        logicals_x=np.array(lx, dtype=np.uint8), logicals_z=np.array(lz, dtype=np.uint8),
        qubit_meta=QubitMeta(boundary=boundary, welded=np.zeros(n, dtype=bool),
                             solids=[(0,)] * n, geom=geom),
        lattice=lattice, xcheck_vertex=verts, zcheck_face=faces,
    )
    code.verify()
    return code


def welded_qubit_count(ell: int, R: int) -> int:
    n = 3 * ell**3 + 5 * ell**2 + 3 * ell + 1
    return R**3 * n - (ell + 1) ** 2 * (2 * R**3 - R - 1)


def build_welded(ell: int, R: int) -> CodeSpec:
    """Weld ``R**3`` solid codes (``R`` layers of ``R x R``) along ``R+1`` planes.

    Layer ``j`` solids sit between weld planes ``j`` and ``j+1``; every half
    edge at plane ``j`` and column ``(x, y)`` is the same welded qubit.  X
    checks are the per-solid vertex checks.  Z checks are the interior faces of
    every solid plus, per weld plane and boundary-face position, the union of
    the corresponding weight-3 faces of all adjacent solids.
    """
    if int(ell) != ell or ell < 1 or int(R) != R or R < 1:
        raise ValueError(f"welded code needs ell >= 1 and R >= 1, got {ell!r}, {R!r}")
    ell, R = int(ell), int(R)
    lat = build_solid(ell)
    eq = lat.edge_qubit
    n_loc = lat.num_qubits
    q_edges = lat.qubit_edges
    q_coords = lat.edge_coords[q_edges]
    q_dir = lat.edge_dir[q_edges]
    is_half = np.zeros(n_loc, dtype=bool)
    is_half[eq[lat.half_edges]] = True

    solids = [(j, u, v) for j in range(R) for u in range(R) for v in range(R)]
    solid_qubits = np.full((len(solids), n_loc), -1, dtype=np.int64)
    welded_index: dict = {}
    meta_solids: list[list[int]] = []
    geom: list[tuple] = []
    welded_flags: list[bool] = []
    for s, (j, _, _) in enumerate(solids):
        for q in range(n_loc):
            if is_half[q]:
                x, y, z = q_coords[q]
                key = (j + (1 if z > 0 else 0), x, y)
                if key in welded_index:
                    g = welded_index[key]
                    meta_solids[g].append(s)
                    solid_qubits[s, q] = g
                    continue
                welded_index[key] = len(geom)
            solid_qubits[s, q] = len(geom)
            meta_solids.append([s])
            geom.append((s, *q_coords[q].tolist(), int(q_dir[q])))
            welded_flags.append(bool(is_half[q]))
    n = len(geom)

    verts, xrows_loc, faces, zrows_loc = _lattice_checks(lat)
    solid_xchecks = np.full((len(solids), lat.num_vertices), -1, dtype=np.int64)
    xrows = []
    for s in range(len(solids)):
        for v, row in zip(verts, xrows_loc):
            solid_xchecks[s, v] = len(xrows)
            xrows.append([solid_qubits[s, q] for q in row])

    # boundary faces are the ones at the two half levels
    fz = lat.face_coords[faces, 2]
    boundary_face = (lat.face_normal[faces] != 2) & ((fz == 0) | (fz == ell))
    zrows = []
    for s in range(len(solids)):
        for row, bnd in zip(zrows_loc, boundary_face):
            if not bnd:
                zrows.append([solid_qubits[s, q] for q in row])
    welded_checks: dict = {}
    for s, (j, _, _) in enumerate(solids):
        for f, row, bnd in zip(faces, zrows_loc, boundary_face):
            if bnd:
                c = lat.face_coords[f]
                key = (j + (1 if c[2] > 0 else 0), int(c[0]), int(c[1]), int(lat.face_normal[f]))
                welded_checks.setdefault(key, set()).update(solid_qubits[s, q] for q in row)
    for key in sorted(welded_checks):
        zrows.append(sorted(welded_checks[key]))

    z_string, x_plane = _solid_logicals(lat)
    lz = set()
    for s in range(len(solids)):
        lz.update(solid_qubits[s, q] for q in z_string)
    lx = [solid_qubits[0, q] for q in x_plane]

    welded = np.array(welded_flags, dtype=bool)
    code = CodeSpec(
        family=WELDED, params=(ell, R), n=n,
        H=_rows_to_csr(xrows, n), T=_rows_to_csr(zrows, n),
        logicals_x=_indicator(lx, n).reshape(1, -1),
        logicals_z=_indicator(sorted(lz), n).reshape(1, -1),
        qubit_meta=QubitMeta(boundary=welded.copy(), welded=welded,
                             solids=[tuple(m) for m in meta_solids], geom=geom),
        lattice=lat, solid_qubits=solid_qubits, solid_xchecks=solid_xchecks,
    )
    code.verify()
    return code


def build_code(family: str, ell: int, R: int = 1) -> CodeSpec:
    if family == PERIODIC3D:
        return build_toric3d(build_periodic(ell))
    if family == SOLID:
        return build_toric3d(build_solid(ell))
    if family == WELDED:
        return build_welded(ell, R)
    raise ValueError(f"unknown code family {family!r}; expected one of {FAMILIES}")


# ---------------------------------------------------------------- syndromes
def _mul(m: sp.csr_matrix, v: np.ndarray) -> np.ndarray:
    return (m.astype(np.int64) @ v.astype(np.int64) & 1).astype(np.uint8)


def syndrome(code: CodeSpec, error: PauliFrame) -> Syndrome:
    if len(error.x) != code.n or len(error.z) != code.n:
        raise ValueError(f"frame length {len(error.x)}/{len(error.z)} does not match n={code.n}")
    return Syndrome(sigma=_mul(code.H, error.z), tau=_mul(code.T, error.x))


def is_logical_failure(code: CodeSpec, residual: PauliFrame) -> tuple[bool, bool]:
    """(z_failed, x_failed) for a residual with trivial syndrome."""
    s = syndrome(code, residual)
    if s.sigma.any() or s.tau.any():
        raise SyndromeMismatch("residual error has a nonzero syndrome")
    z_failed = bool(((code.logicals_x.astype(np.int64) @ residual.z) & 1).any())
    x_failed = bool(((code.logicals_z.astype(np.int64) @ residual.x) & 1).any())
    return z_failed, x_failed
