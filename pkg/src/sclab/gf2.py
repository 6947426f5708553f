"""GF(2) linear algebra.

Two flavours live here. The int-bitset routines (``rank``, ``nullspace``) are
small and obvious and are used wherever the matrices are tiny (codeword
enumeration). The packed ``uint64`` routines are numba-compiled and carry the
Monte-Carlo workload: ranks of erased-column submatrices of parity-check
matrices with thousands of columns.
"""

from __future__ import annotations

from typing import List, Sequence

import numba
import numpy as np


def rank(rows: Sequence[int], n_cols: int) -> int:
    """Rank over GF(2) of a matrix given as int bitset rows."""
    return len(_xor_basis(rows, n_cols))


def _xor_basis(rows, n_cols):
    basis = {}
    for r in rows:
        r &= (1 << n_cols) - 1
        while r:
            top = r.bit_length() - 1
            if top in basis:
                r ^= basis[top]
            else:
                basis[top] = r
                break
    return basis


def rref(rows: Sequence[int], n_cols: int):
    """Reduced row echelon form. Returns (pivot rows, pivot columns)."""
    work = [r & ((1 << n_cols) - 1) for r in rows]
    pivots: List[int] = []
    out: List[int] = []
    for col in range(n_cols):
        bit = 1 << col
        pivot = None
        for i, r in enumerate(work):
            if r & bit:
                pivot = i
                break
        if pivot is None:
            continue
        prow = work.pop(pivot)
        work = [r ^ prow if r & bit else r for r in work]
        out = [r ^ prow if r & bit else r for r in out]
        out.append(prow)
        pivots.append(col)
    return out, pivots


def nullspace(rows: Sequence[int], n_cols: int) -> List[int]:
    """Basis of {x : r.x = 0 for every row r}, as int bitsets."""
    red, pivots = rref(rows, n_cols)
    pivot_set = set(pivots)
    basis = []
    for f in range(n_cols):
        if f in pivot_set:
            continue
        x = 1 << f
        for prow, p in zip(red, pivots):
            if (prow >> f) & 1:
                x |= 1 << p
        basis.append(x)
    return basis


def ints_to_bits(vectors: Sequence[int], n: int) -> np.ndarray:
    """Expand int bitsets into a (len, n) uint8 array, bit j -> column j."""
    out = np.zeros((len(vectors), n), dtype=np.uint8)
    for i, v in enumerate(vectors):
        for j in range(n):
            if (v >> j) & 1:
                out[i, j] = 1
    return out


def bits_to_ints(matrix: np.ndarray) -> List[int]:
    matrix = np.asarray(matrix, dtype=np.uint8) & 1
    weights = [1 << j for j in range(matrix.shape[1])]
    return [sum(w for w, b in zip(weights, row) if b) for row in matrix.tolist()]


# ---------------------------------------------------------------------------
# packed uint64 kernels


def pack_columns(matrix: np.ndarray) -> np.ndarray:
    """Pack the columns of a dense (M, n) 0/1 matrix into (n, ceil(M/64)) words."""
    matrix = np.asarray(matrix, dtype=np.uint8) & 1
    m, n = matrix.shape
    words = max(1, (m + 63) // 64)
    padded = np.zeros((words * 64, n), dtype=np.uint8)
    padded[:m] = matrix
    # little-endian bit order inside each word
    bits = padded.T.reshape(n, words, 64).astype(np.uint64)
    shifts = np.arange(64, dtype=np.uint64)
    return np.bitwise_or.reduce(bits << shifts, axis=2)


@numba.njit(cache=True)
def _lowest_bit(vec):
    for w in range(vec.shape[0]):
        word = vec[w]
        if word != 0:
            b = 0
            while (word >> np.uint64(b)) & np.uint64(1) == 0:
                b += 1
            return w * 64 + b
    return -1


@numba.njit(cache=True)
def _insert(basis, present, vec):
    """Reduce ``vec`` against the basis; store it if independent. Returns 1 on growth."""
    while True:
        p = _lowest_bit(vec)
        if p < 0:
            return 0
        if present[p]:
            row = basis[p]
            for w in range(vec.shape[0]):
                vec[w] ^= row[w]
        else:
            basis[p, :] = vec
            present[p] = True
            return 1


@numba.njit(cache=True)
def _rank_profile(columns, order):
    n_words = columns.shape[1]
    n_bits = n_words * 64
    basis = np.zeros((n_bits, n_words), dtype=np.uint64)
    present = np.zeros(n_bits, dtype=np.bool_)
    out = np.zeros(order.shape[0] + 1, dtype=np.int64)
    vec = np.zeros(n_words, dtype=np.uint64)
    r = 0
    for i in range(order.shape[0]):
        vec[:] = columns[order[i]]
        r += _insert(basis, present, vec)
        out[i + 1] = r
    return out


def rank_profile(columns: np.ndarray, order: np.ndarray) -> np.ndarray:
    """Ranks of the growing column sets ``order[:0], order[:1], ...``.

    ``columns`` is the output of :func:`pack_columns`. Entry ``i`` of the result
    is the rank of the first ``i`` columns in ``order``.
    """
    order = np.ascontiguousarray(order, dtype=np.int64)
    return _rank_profile(np.ascontiguousarray(columns), order)


def column_rank(columns: np.ndarray, subset: np.ndarray) -> int:
    """Rank of the submatrix formed by the packed columns in ``subset``."""
    return int(rank_profile(columns, subset)[-1])


__all__ = [
    "rank",
    "rref",
    "nullspace",
    "ints_to_bits",
    "bits_to_ints",
    "pack_columns",
    "rank_profile",
    "column_rank",
]
