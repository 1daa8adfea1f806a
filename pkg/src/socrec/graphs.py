"""Input graph construction: the user social graph, the decomposed user/item
sub-node interaction graph, and symmetric adjacency normalization.

Items rated with relation type k (= the rating value) connect to users
through the item's k-th sub-node; the sub-node for item n and relation k
occupies column n * K + (k - 1). All structures are immutable after
construction and safe for concurrent reads.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import ContractError, GraphError
from .sparse import SparseMatrix, count_nonzeros  # noqa: F401  (count_nonzeros is part of this module's surface)

log = logging.getLogger(__name__)


class UserSocialGraph:
    """Undirected, deduplicated, self-loop-free social ties over M users."""

    __slots__ = ("n_users", "edges", "adjacency", "_edge_keys")

    def __init__(self, n_users: int, edges: np.ndarray, adjacency: SparseMatrix):
        self.n_users = n_users
        self.edges = edges  # (E, 2) with edges[:, 0] < edges[:, 1], lexsorted
        self.adjacency = adjacency
        keys = edges[:, 0].astype(np.int64) * n_users + edges[:, 1]
        keys = np.concatenate([keys, edges[:, 1].astype(np.int64) * n_users + edges[:, 0]])
        keys.sort()
        self._edge_keys = keys

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def has_edge(self, u, v) -> np.ndarray | bool:
        """Vectorized membership test for (u, v) pairs."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        q = u * self.n_users + v
        if self._edge_keys.size == 0:
            return np.zeros(q.shape, dtype=bool) if q.ndim else False
        pos = np.minimum(np.searchsorted(self._edge_keys, q), self._edge_keys.size - 1)
        found = self._edge_keys[pos] == q
        return found if q.ndim else bool(found)

    def neighbors(self, m: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[m]:a.indptr[m + 1]]

    def __repr__(self):
        return f"UserSocialGraph(n_users={self.n_users}, n_edges={self.n_edges})"


def build_social_graph(edges, n_users: int) -> UserSocialGraph:
    """Symmetrize, deduplicate and drop self-pairs from raw tie pairs.

    Raw input may repeat pairs, list both directions, or contain self-ties;
    the result stores each undirected edge once and a symmetric binary A_s.
    """
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError(f"edge list must be (E, 2); got {arr.shape}")
    if arr.size:
        bad = (arr < 0) | (arr >= n_users)
        if bad.any():
            i = int(np.flatnonzero(bad.any(axis=1))[0])
            raise GraphError(f"user index out of range in pair {tuple(arr[i])} (n_users={n_users})")
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keep = lo != hi
    canon = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0) if keep.any() else np.zeros((0, 2), np.int64)
    rows = np.concatenate([canon[:, 0], canon[:, 1]])
    cols = np.concatenate([canon[:, 1], canon[:, 0]])
    adjacency = SparseMatrix.from_coo(rows, cols, np.ones(rows.size), (n_users, n_users))
    return UserSocialGraph(n_users, canon, adjacency)


class SubNodeGraph:
    """Bipartite graph of M users against N*K item sub-nodes.

    Vertex count is M + N*K. Each observed (user, item) pair contributes one
    edge to exactly one sub-node column, so the interaction count equals the
    nonzero count of the M x NK adjacency.
    """

    __slots__ = ("n_users", "n_items", "n_relations", "users", "items", "relations",
                 "ratings", "adjacency")

    def __init__(self, n_users, n_items, n_relations, users, items, relations, ratings, adjacency):
        self.n_users = n_users
        self.n_items = n_items
        self.n_relations = n_relations
        self.users = users
        self.items = items
        self.relations = relations
        self.ratings = ratings
        self.adjacency = adjacency

    @property
    def n_subnodes(self) -> int:
        return self.n_items * self.n_relations

    @property
    def vertex_count(self) -> int:
        return self.n_users + self.n_subnodes

    def subnode_column(self, n: int, k: int) -> int:
        return n * self.n_relations + (k - 1)

    def user_degrees(self) -> np.ndarray:
        """|J_m| per user: number of sub-node neighbors."""
        return self.adjacency.row_nnz()

    def subnode_degrees(self) -> np.ndarray:
        """|J_{n,k}| per sub-node: number of connected users."""
        return self.adjacency.transpose().row_nnz()

    def user_neighbors(self, m: int) -> list[tuple[int, int]]:
        """Sub-node neighbors of user m as (item, relation) pairs."""
        a = self.adjacency
        cols = a.indices[a.indptr[m]:a.indptr[m + 1]]
        k = self.n_relations
        return [(int(c) // k, int(c) % k + 1) for c in cols]

    def subnode_users(self, n: int, k: int) -> np.ndarray:
        t = self.adjacency.transpose()
        c = self.subnode_column(n, k)
        return t.indices[t.indptr[c]:t.indptr[c + 1]]

    def __repr__(self):
        return (f"SubNodeGraph(n_users={self.n_users}, n_items={self.n_items}, "
                f"n_relations={self.n_relations}, interactions={self.users.size})")


def decompose_interactions(ratings, n_users: int, n_items: int, n_relations: int) -> SubNodeGraph:
    """Split each item into one sub-node per relation type and wire users to
    the sub-node matching their rating (relation k = rating value).

    Rejects duplicate (user, item) pairs and ratings outside {1..K};
    non-integer ratings do not map to a relation type and are rejected too.
    """
    triples = np.asarray(list(ratings) if not isinstance(ratings, np.ndarray) else ratings, dtype=np.float64)
    if triples.size == 0:
        triples = triples.reshape(0, 3)
    if triples.ndim != 2 or triples.shape[1] != 3:
        raise GraphError(f"ratings must be (B, 3) triples; got {triples.shape}")
    users = triples[:, 0].astype(np.int64)
    items = triples[:, 1].astype(np.int64)
    values = triples[:, 2]
    if users.size:
        if users.min() < 0 or users.max() >= n_users:
            raise GraphError("user index out of range")
        if items.min() < 0 or items.max() >= n_items:
            raise GraphError("item index out of range")
    rounded = np.rint(values)
    if np.any(values != rounded) or np.any(rounded < 1) or np.any(rounded > n_relations):
        i = int(np.flatnonzero((values != rounded) | (rounded < 1) | (rounded > n_relations))[0])
        raise GraphError(f"rating {values[i]} of pair ({users[i]}, {items[i]}) does not map to a relation "
                         f"type in 1..{n_relations}")
    relations = rounded.astype(np.int64)

    pair_keys = users * n_items + items
    sorted_keys = np.sort(pair_keys)
    dup_pos = np.flatnonzero(np.diff(sorted_keys) == 0)
    if dup_pos.size:
        dup = int(sorted_keys[dup_pos[0]])
        raise GraphError(f"duplicate interaction for (user, item) = ({dup // n_items}, {dup % n_items})")

    cols = items * n_relations + (relations - 1)
    adjacency = SparseMatrix.from_coo(users, cols, np.ones(users.size),
                                      (n_users, n_items * n_relations))
    return SubNodeGraph(n_users, n_items, n_relations, users, items, relations, values, adjacency)


class NormalizedAdjacency:
    """Self-looped, symmetrically normalized adjacency D^-1/2 (A+I) D^-1/2."""

    __slots__ = ("matrix", "degrees")

    def __init__(self, matrix: SparseMatrix, degrees: np.ndarray):
        self.matrix = matrix
        self.degrees = degrees

    @property
    def total_degree(self) -> int:
        """Sum over all entries of the self-looped adjacency (= sum of degrees)."""
        return int(self.degrees.sum())


def normalize(adjacency: SparseMatrix, dtype=np.float64) -> NormalizedAdjacency:
    """Add self-loops and scale each entry by 1/sqrt(d_i * d_j), sparsely."""
    n_rows, n_cols = adjacency.shape
    if n_rows != n_cols:
        raise GraphError(f"normalize needs a square matrix; got {adjacency.shape}")
    if not np.all(adjacency.data == 1):
        raise GraphError("normalize expects a binary adjacency")
    t = adjacency.transpose()
    if not (np.array_equal(adjacency.indptr, t.indptr) and np.array_equal(adjacency.indices, t.indices)):
        raise GraphError("normalize expects a symmetric adjacency")
    row_of = np.repeat(np.arange(n_rows, dtype=np.int64), np.diff(adjacency.indptr))
    if np.any(row_of == adjacency.indices):
        raise GraphError("adjacency already contains self-loops")

    rows = np.concatenate([row_of, np.arange(n_rows, dtype=np.int64)])
    cols = np.concatenate([adjacency.indices, np.arange(n_rows, dtype=np.int64)])
    degrees = adjacency.row_nnz() + 1  # self-loop contributes 1 to every node
    inv_sqrt = 1.0 / np.sqrt(degrees.astype(np.float64))
    vals = (inv_sqrt[rows] * inv_sqrt[cols]).astype(dtype)
    matrix = SparseMatrix.from_coo(rows, cols, vals, (n_rows, n_rows), dtype=dtype)
    return NormalizedAdjacency(matrix, degrees)


def decay_coefficient(graph: SubNodeGraph, m: int, n: int, k: int) -> float:
    """Message decay 1/sqrt(|J_m| * |J_{n,k}|) for an observed interaction."""
    col = graph.subnode_column(n, k)
    a = graph.adjacency
    row = a.indices[a.indptr[m]:a.indptr[m + 1]]
    pos = np.searchsorted(row, col)
    if pos >= row.size or row[pos] != col:
        raise ContractError(f"({m}, {n}, k={k}) is not an observed interaction")
    ju = a.indptr[m + 1] - a.indptr[m]
    t = a.transpose()
    jv = t.indptr[col + 1] - t.indptr[col]
    return float(1.0 / np.sqrt(ju * jv))
