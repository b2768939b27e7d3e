"""High-order common-neighbor count matrices and their walk-length slices.

For a pair (u, v) and order k, entry c of slice (k1, k2) counts walks of
length k1 from u to c times walks of length k2 from c to v, i.e. the number
of (k1 + k2)-length u-v walks through c. The three slices (k, k), (k-1, k)
and (k, k-1) cover lengths 2k and 2k-1; their sum is the combined count
vector for the pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .graph import Graph, PairBatch

# Above this node count the (h, n) feature matrices are kept sparse.
DENSE_NODE_LIMIT = 32768

DEFAULT_MAX_ORDER = 3


@dataclass
class OrderFeatures:
    """Per-order count matrices for one batch of pairs.

    ``slices`` maps (k1, k2) -> (h, n) matrix (ndarray or CSR), ``combined``
    is their elementwise sum.
    """

    order: int
    pairs: np.ndarray
    slices: dict
    combined: object

    @property
    def batch_size(self) -> int:
        return self.pairs.shape[0]


def _is_sparse(m) -> bool:
    return sp.issparse(m)


def as_dense(m) -> np.ndarray:
    return m.toarray() if _is_sparse(m) else np.asarray(m)


def _indicator_rows(n: int, nodes: np.ndarray, dense: bool):
    h = nodes.shape[0]
    if dense:
        out = np.zeros((h, n))
        out[np.arange(h), nodes] = 1.0
        return out
    data = np.ones(h)
    return sp.csr_matrix((data, (np.arange(h), nodes)), shape=(h, n))


def _power_rows(adj: sp.csr_matrix, nodes: np.ndarray, length: int, dense: bool):
    """Rows of A^length for the given nodes, via repeated sparse mat-vec products."""
    rows = _indicator_rows(adj.shape[0], nodes, dense)
    for _ in range(length):
        rows = rows @ adj
    return rows


def adj_power_row(g: Graph, u: int, l: int, max_order: int = DEFAULT_MAX_ORDER) -> np.ndarray:
    """Dense row u of A^l: exact counts of l-length walks from u to every node."""
    if l < 0 or l > max_order:
        raise ConfigError(f"walk length {l} outside [0, {max_order}]")
    return as_dense(_power_rows(g.to_scipy(), np.array([u], dtype=np.int64), l, g.n <= DENSE_NODE_LIMIT))[0]


def _multiply(a, b):
    if _is_sparse(a) or _is_sparse(b):
        return (a.multiply(b)).tocsr() if _is_sparse(a) else b.multiply(a).tocsr()
    return a * b


def cn_order_features(g: Graph, batch: PairBatch, k: int,
                      exclude_endpoints: bool = False,
                      dense: bool | None = None) -> OrderFeatures:
    """Compute the three order-k slices and their sum for a batch of pairs.

    Never materializes A^k; each slice comes from k repeated sparse
    mat-vec products per endpoint. ``exclude_endpoints`` zeroes the two
    endpoint columns of each batch row (classic-CN convention).
    """
    if k < 1:
        raise ConfigError(f"order must be >= 1, got {k}")
    if dense is None:
        dense = g.n <= DENSE_NODE_LIMIT
    adj = g.to_scipy()
    u = batch.pairs[:, 0]
    v = batch.pairs[:, 1]
    ru_km1 = _power_rows(adj, u, k - 1, dense)
    rv_km1 = _power_rows(adj, v, k - 1, dense)
    ru_k = ru_km1 @ adj
    rv_k = rv_km1 @ adj
    slices = {
        (k, k): _multiply(ru_k, rv_k),
        (k - 1, k): _multiply(ru_km1, rv_k),
        (k, k - 1): _multiply(ru_k, rv_km1),
    }
    if exclude_endpoints:
        h = batch.pairs.shape[0]
        rows = np.repeat(np.arange(h), 2)
        cols = batch.pairs.ravel()
        for key, mat in slices.items():
            if _is_sparse(mat):
                mat = mat.tolil()
                mat[rows, cols] = 0.0
                slices[key] = mat.tocsr()
            else:
                mat[rows, cols] = 0.0
    combined = slices[(k, k)] + slices[(k - 1, k)] + slices[(k, k - 1)]
    if _is_sparse(combined):
        combined = combined.tocsr()
        combined.eliminate_zeros()
    return OrderFeatures(order=k, pairs=batch.pairs, slices=slices, combined=combined)


def cn_order_features_all(g: Graph, batch: PairBatch, k_max: int,
                          exclude_endpoints: bool = False,
                          dense: bool | None = None) -> list[OrderFeatures]:
    """Orders 1..k_max for one batch."""
    return [cn_order_features(g, batch, k, exclude_endpoints, dense)
            for k in range(1, k_max + 1)]


def _bfs_distances(g: Graph, source: int, cutoff: int) -> np.ndarray:
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = [source]
    depth = 0
    while frontier and depth < cutoff:
        depth += 1
        nxt = []
        for node in frontier:
            for nb in g.neighbors(node):
                if dist[nb] < 0:
                    dist[nb] = depth
                    nxt.append(int(nb))
        frontier = nxt
    return dist


def cn_set(g: Graph, i: int, j: int, k: int,
           exclude_endpoints: bool = True,
           spd_filter: bool = False) -> set[int]:
    """Nodes with a strictly positive combined count for pair (i, j) at order k.

    With endpoints excluded, k=1 reduces to the classic N(i) & N(j).
    ``spd_filter`` restricts to nodes at shortest-path distance exactly k
    from both endpoints, which makes the sets of different orders disjoint
    (the SPD variant, unoptimized).
    """
    batch = PairBatch(np.array([[i, j]], dtype=np.int64))
    feats = cn_order_features(g, batch, k, exclude_endpoints=exclude_endpoints)
    row = as_dense(feats.combined)[0]
    members = set(int(c) for c in np.nonzero(row > 0)[0])
    if spd_filter:
        di = _bfs_distances(g, i, k)
        dj = _bfs_distances(g, j, k)
        members = {c for c in members if di[c] == k and dj[c] == k}
    return members
