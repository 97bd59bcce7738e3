"""GF(2) linear algebra on bit-packed rows.

Rows are stored as ``uint64`` words, least significant bit first.  Pivoting is
always in column order, so solutions are canonical: free variables are zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_WORD = 64


def _words(cols: int) -> int:
    return max(1, (cols + _WORD - 1) // _WORD)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) 0/1 array into (rows, words) uint64."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    rows, cols = bits.shape
    nw = _words(cols)
    padded = np.zeros((rows, nw * _WORD), dtype=np.uint8)
    padded[:, :cols] = bits
    by = np.packbits(padded, axis=1, bitorder="little")
    return by.view(np.uint64).reshape(rows, nw).copy() if rows else np.zeros((0, nw), np.uint64)


def unpack_bits(data: np.ndarray, cols: int) -> np.ndarray:
    rows = data.shape[0]
    if rows == 0:
        return np.zeros((0, cols), dtype=np.uint8)
    by = np.ascontiguousarray(data).view(np.uint8).reshape(rows, -1)
    return np.unpackbits(by, axis=1, bitorder="little")[:, :cols]


@dataclass
class BitMatrix:
    rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.rows, _words(self.cols)):
            raise ValueError("packed storage does not match the declared shape")

    @classmethod
    def from_dense(cls, a) -> "BitMatrix":
        a = np.asarray(a, dtype=np.uint8) & 1
        if a.ndim == 1:
            a = a.reshape(1, -1)
        return cls(a.shape[0], a.shape[1], pack_bits(a))

    @classmethod
    def from_sparse(cls, m) -> "BitMatrix":
        """From a scipy sparse matrix; entries are reduced mod 2."""
        return cls.from_dense((m.toarray() & 1).astype(np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, np.zeros((rows, _words(cols)), dtype=np.uint64))

    def to_dense(self) -> np.ndarray:
        return unpack_bits(self.data, self.cols)

    def dot(self, v) -> np.ndarray:
        """Matrix-vector product over GF(2)."""
        v = np.asarray(v, dtype=np.uint8)
        return ((self.to_dense().astype(np.int64) @ v) & 1).astype(np.uint8)


def _eliminate(data: np.ndarray, cols: int, rhs: np.ndarray | None = None):
    """Reduced row echelon form in place; returns the pivot columns."""
    m = data.shape[0]
    pivots = []
    r = 0
    for c in range(cols):
        if r == m:
            break
        w = c // _WORD
        bit = np.uint64(1) << np.uint64(c % _WORD)
        hits = np.flatnonzero(data[r:, w] & bit)
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            data[[r, p]] = data[[p, r]]
            if rhs is not None:
                rhs[[r, p]] = rhs[[p, r]]
        mask = (data[:, w] & bit) != 0
        mask[r] = False
        if mask.any():
            data[mask] ^= data[r]
            if rhs is not None:
                rhs[mask] ^= rhs[r]
        pivots.append(c)
        r += 1
    return pivots


def rank(a) -> int:
    a = a if isinstance(a, BitMatrix) else BitMatrix.from_dense(a)
    return len(_eliminate(a.data.copy(), a.cols))


def solve(a, y) -> np.ndarray | None:
    """Canonical particular solution of ``a x = y``, or ``None`` if inconsistent."""
    a = a if isinstance(a, BitMatrix) else BitMatrix.from_dense(a)
    y = np.asarray(y, dtype=np.uint8).ravel() & 1
    if len(y) != a.rows:
        raise ValueError(f"right-hand side has length {len(y)}, expected {a.rows}")
    data = a.data.copy()
    rhs = y.copy()
    pivots = _eliminate(data, a.cols, rhs)
    if rhs[len(pivots):].any():
        return None
    x = np.zeros(a.cols, dtype=np.uint8)
    x[pivots] = rhs[:len(pivots)]
    return x


def kernel_basis(a) -> list[np.ndarray]:
    """Basis of the null space, one vector per free column (in column order)."""
    a = a if isinstance(a, BitMatrix) else BitMatrix.from_dense(a)
    data = a.data.copy()
    pivots = _eliminate(data, a.cols)
    red = unpack_bits(data[:len(pivots)], a.cols)
    is_pivot = np.zeros(a.cols, dtype=bool)
    is_pivot[pivots] = True
    basis = []
    for f in np.flatnonzero(~is_pivot):
        v = np.zeros(a.cols, dtype=np.uint8)
        v[f] = 1
        v[pivots] = red[:, f]
        basis.append(v)
    return basis


def in_rowspace(a, v) -> bool:
    """True if ``v`` is a GF(2) combination of the rows of ``a``."""
    a = a if isinstance(a, BitMatrix) else BitMatrix.from_dense(a)
    stacked = np.vstack([a.data, pack_bits(np.asarray(v, dtype=np.uint8).reshape(1, -1))])
    return len(_eliminate(stacked, a.cols)) == rank(a)
