"""Social recommendation engine.

Rating prediction over a multi-relation user/item graph: items are split
into per-relation sub-nodes for decay-weighted message passing, the social
graph is pre-encoded by a mutual-information-trained encoder whose frozen
output feeds the user side, and cross-domain link reconstruction regularizes
the embeddings. Runs on an in-repo CSR + reverse-mode differentiation core
(compiled kernel when available, numpy fallback otherwise).
"""

from .sparse import KERNEL_BACKEND, SparseMatrix, count_nonzeros
from .autodiff import Tape, Tensor

__all__ = ["KERNEL_BACKEND", "SparseMatrix", "Tape", "Tensor", "count_nonzeros"]
__version__ = "0.1.0"
