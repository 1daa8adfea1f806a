# Compiled CSR kernel. Keep the signature in sync with _spmm_py, which is
# the drop-in fallback when this extension is unavailable.

ctypedef fused real:
    float
    double


def csr_matmul(const long long[::1] indptr,
               const long long[::1] indices,
               const real[::1] data,
               const real[:, ::1] dense,
               real[:, ::1] out):
    """out[i, :] = sum_j A[i, j] * dense[j, :] for CSR-stored A. Overwrites out."""
    cdef Py_ssize_t n_rows = out.shape[0]
    cdef Py_ssize_t n_cols = out.shape[1]
    cdef Py_ssize_t i, p, j, c
    cdef real v
    for i in range(n_rows):
        for c in range(n_cols):
            out[i, c] = 0
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            v = data[p]
            for c in range(n_cols):
                out[i, c] += v * dense[j, c]
