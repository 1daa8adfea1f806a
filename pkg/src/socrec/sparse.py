"""CSR sparse matrices and the sparse-times-dense product.

The inner kernel is compiled (socrec._spmm_cy, built from the .pyx source)
when the extension is available and falls back to a numpy row loop
otherwise; KERNEL_BACKEND records which one was picked at import.

Matrices are immutable after construction. Indices are int64, values float32
or float64; indices are sorted within each row and explicit zeros are
dropped, so nnz is the true count of nonzero entries.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

try:
    from . import _spmm_cy as _kernels

    KERNEL_BACKEND = "cython"
except ImportError:  # extension not built; take the slow path
    from . import _spmm_py as _kernels

    KERNEL_BACKEND = "python"


class SparseMatrix:
    """Immutable CSR matrix.

    Construct through the from_* classmethods; the raw constructor trusts its
    arguments (sorted, zero-free, in-range) and is for internal use.
    """

    __slots__ = ("shape", "indptr", "indices", "data", "_transpose")

    def __init__(self, shape, indptr, indices, data):
        self.shape = (int(shape[0]), int(shape[1]))
        self.indptr = indptr
        self.indices = indices
        self.data = data
        self._transpose = None

    @classmethod
    def from_coo(cls, rows, cols, vals, shape, dtype=np.float64) -> "SparseMatrix":
        """Build from coordinate triplets. Duplicate coordinates are an error."""
        n_rows, n_cols = shape
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=dtype)
        if not (rows.shape == cols.shape == vals.shape):
            raise ShapeError("rows, cols, vals must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols):
            raise ShapeError(f"coordinate out of range for shape {shape}")

        keep = vals != 0
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size > 1 and np.any((np.diff(rows) == 0) & (np.diff(cols) == 0)):
            raise ShapeError("duplicate coordinates in COO input")

        indptr = np.zeros(n_rows + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls((n_rows, n_cols), indptr, cols, vals)

    @classmethod
    def from_dense(cls, array, dtype=None) -> "SparseMatrix":
        array = np.asarray(array)
        dtype = dtype or (array.dtype if array.dtype in (np.float32, np.float64) else np.float64)
        rows, cols = np.nonzero(array)
        return cls.from_coo(rows, cols, array[rows, cols], array.shape, dtype=dtype)

    @classmethod
    def identity(cls, n, dtype=np.float64) -> "SparseMatrix":
        idx = np.arange(n, dtype=np.int64)
        return cls((n, n), np.arange(n + 1, dtype=np.int64), idx, np.ones(n, dtype=dtype))

    @property
    def nnz(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self):
        return self.data.dtype

    def row_nnz(self) -> np.ndarray:
        """Stored-entry count per row (the degree vector for binary matrices)."""
        return np.diff(self.indptr)

    def astype(self, dtype) -> "SparseMatrix":
        if self.data.dtype == dtype:
            return self
        return SparseMatrix(self.shape, self.indptr, self.indices, self.data.astype(dtype))

    def transpose(self) -> "SparseMatrix":
        """CSR transpose, computed once and cached (counting sort, O(nnz))."""
        if self._transpose is None:
            n_rows, n_cols = self.shape
            t_indptr = np.zeros(n_cols + 1, dtype=np.int64)
            np.add.at(t_indptr, self.indices + 1, 1)
            np.cumsum(t_indptr, out=t_indptr)
            row_of = np.repeat(np.arange(n_rows, dtype=np.int64), np.diff(self.indptr))
            order = np.argsort(self.indices, kind="stable")
            t = SparseMatrix((n_cols, n_rows), t_indptr, row_of[order], self.data[order])
            t._transpose = self
            self._transpose = t
        return self._transpose

    def matmul_dense(self, dense: np.ndarray) -> np.ndarray:
        """self @ dense for a C-contiguous 2-D array of matching dtype."""
        if dense.ndim != 2 or dense.shape[0] != self.shape[1]:
            raise ShapeError(f"cannot multiply {self.shape} sparse by {dense.shape} dense")
        if dense.dtype != self.data.dtype:
            raise ShapeError(f"dtype mismatch: sparse {self.data.dtype}, dense {dense.dtype}")
        dense = np.ascontiguousarray(dense)
        out = np.empty((self.shape[0], dense.shape[1]), dtype=dense.dtype)
        _kernels.csr_matmul(self.indptr, self.indices, self.data, dense, out)
        return out

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=self.data.dtype)
        row_of = np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))
        out[row_of, self.indices] = self.data
        return out

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz}, dtype={self.data.dtype})"


def count_nonzeros(matrix: SparseMatrix) -> int:
    """Exact stored-nonzero count (explicit zeros are never stored)."""
    return matrix.nnz
