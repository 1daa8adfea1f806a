"""Pure-Python (numpy) fallback for the compiled CSR kernel.

Same call signature as socrec._spmm_cy; socrec.sparse picks whichever
imports. The row loop stays in Python, so this is the slow path; the
benchmark in benchmarks/bench_spmm.py quantifies the gap.
"""


def csr_matmul(indptr, indices, data, dense, out):
    """out[i, :] = sum_j A[i, j] * dense[j, :] for CSR-stored A. Overwrites out."""
    for i in range(out.shape[0]):
        lo, hi = indptr[i], indptr[i + 1]
        if lo == hi:
            out[i, :] = 0.0
        else:
            out[i, :] = data[lo:hi] @ dense[indices[lo:hi], :]
