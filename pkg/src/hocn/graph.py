"""Immutable undirected graph in CSR form, edge-list IO, splitting, negative sampling."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import EdgeListParseError, InputError, SamplingError, SplitError


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph, neighbors sorted ascending per row.

    ``indptr``/``indices`` follow the usual CSR convention; ``degrees[u]``
    equals the length of row ``u``.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    degrees: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable/array of (u, v) pairs.

        Self-loops and duplicates are dropped; both orientations are stored.
        """
        edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                           dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise InputError("edge endpoint out of range")
        edges = edges[edges[:, 0] != edges[:, 1]]
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        und = np.unique(np.stack([lo, hi], axis=1), axis=0) if edges.size else edges.reshape(0, 2)
        src = np.concatenate([und[:, 0], und[:, 1]])
        dst = np.concatenate([und[:, 1], und[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n=n, indptr=indptr, indices=dst.astype(np.int64),
                   degrees=np.diff(indptr).astype(np.int64))

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return int(self.indices.size) // 2

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return i < row.size and row[i] == v

    def edge_array(self) -> np.ndarray:
        """(m, 2) array of undirected edges with u < v, lexicographically sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        mask = src < self.indices
        return np.stack([src[mask], self.indices[mask]], axis=1)

    def to_scipy(self) -> sp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def to_edge_list(self, stream, sep: str = "\t") -> None:
        for u, v in self.edge_array():
            stream.write(f"{u}{sep}{v}\n")


@dataclass(frozen=True)
class PairBatch:
    """Ordered batch of (source, target) node pairs with optional 0/1 labels."""

    pairs: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "pairs", pairs)
        if pairs.shape[0] == 0:
            raise InputError("empty pair batch")
        if (pairs[:, 0] == pairs[:, 1]).any():
            raise InputError("pair with identical endpoints")
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape[0] != pairs.shape[0]:
                raise InputError("labels length does not match pairs")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.pairs.shape[0]


@dataclass(frozen=True)
class LoadReport:
    """Cleanup summary produced while reading an edge list."""

    lines_read: int = 0
    self_loops_dropped: int = 0
    duplicates_dropped: int = 0
    id_mapping: dict | None = None


@dataclass(frozen=True)
class SplitResult:
    """Train/valid/test positive edges plus the train graph with targets removed."""

    train_graph: Graph
    train: PairBatch
    valid: PairBatch
    test: PairBatch
    split_seed: int

    def write_manifest(self, stream) -> None:
        stream.write("u,v,split\n")
        for name in ("train", "valid", "test"):
            for u, v in getattr(self, name).pairs:
                stream.write(f"{u},{v},{name}\n")


def _parse_line(line: str, fmt: str, lineno: int) -> tuple[int, int] | None:
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    if fmt == "csv":
        parts = body.split(",")
    else:
        parts = body.replace(",", "\t").split()
    if len(parts) != 2:
        raise EdgeListParseError(lineno, f"expected two ids, got {len(parts)} fields")
    try:
        u, v = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise EdgeListParseError(lineno, str(exc)) from None
    if u < 0 or v < 0:
        raise EdgeListParseError(lineno, "negative node id")
    if max(u, v) > 2**62:
        raise EdgeListParseError(lineno, "node id overflow")
    return u, v


def load_edge_list(source, format: str = "tsv", remap: bool = False):
    """Parse an edge-list text stream (or string) into a :class:`Graph`.

    Lines hold two integer ids separated by tab or comma; ``#`` starts a
    comment. Duplicates and self-loops are silently dropped (counted in the
    report). With ``remap=True`` sparse external ids are densified and the
    mapping is returned in the report.

    Returns ``(graph, report)``.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    raw = []
    lines_read = 0
    for lineno, line in enumerate(source, start=1):
        lines_read += 1
        parsed = _parse_line(line, format, lineno)
        if parsed is not None:
            raw.append(parsed)
    edges = np.array(raw, dtype=np.int64).reshape(-1, 2)
    mapping = None
    if remap and edges.size:
        uniq = np.unique(edges)
        mapping = {int(old): i for i, old in enumerate(uniq)}
        edges = np.searchsorted(uniq, edges)
        n = uniq.size
    else:
        n = int(edges.max()) + 1 if edges.size else 0
    self_loops = int((edges[:, 0] == edges[:, 1]).sum()) if edges.size else 0
    keep = edges[edges[:, 0] != edges[:, 1]] if edges.size else edges
    n_unique = (np.unique(np.sort(keep, axis=1), axis=0).shape[0] if keep.size else 0)
    g = Graph.from_edges(n, edges)
    report = LoadReport(
        lines_read=lines_read,
        self_loops_dropped=self_loops,
        duplicates_dropped=keep.shape[0] - n_unique,
        id_mapping=mapping,
    )
    return g, report


def split_edges(g: Graph, ratios, seed: int) -> SplitResult:
    """Random train/valid/test split of the edge set; targets removed from train graph."""
    r_train, r_valid, r_test = (float(x) for x in ratios)
    if abs(r_train + r_valid + r_test - 1.0) > 1e-9:
        raise SplitError(f"ratios sum to {r_train + r_valid + r_test}, expected 1")
    if min(r_train, r_valid, r_test) < 0:
        raise SplitError("negative split ratio")
    edges = g.edge_array()
    m = edges.shape[0]
    if m < 3:
        raise SplitError(f"graph has {m} edges; need at least 3 to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m)
    n_test = int(round(r_test * m))
    n_valid = int(round(r_valid * m))
    if n_test + n_valid > m:
        raise SplitError("valid+test ratios leave no training edges")
    test_idx = perm[:n_test]
    valid_idx = perm[n_test:n_test + n_valid]
    train_idx = perm[n_test + n_valid:]
    train_edges = edges[np.sort(train_idx)]
    return SplitResult(
        train_graph=Graph.from_edges(g.n, train_edges),
        train=PairBatch(train_edges),
        valid=PairBatch(edges[np.sort(valid_idx)]),
        test=PairBatch(edges[np.sort(test_idx)]),
        split_seed=int(seed),
    )


def merged_graph(split: SplitResult, use_valid_as_input: bool) -> Graph:
    """Test-time input graph; optionally merges validation edges (collab convention)."""
    if not use_valid_as_input:
        return split.train_graph
    edges = np.concatenate([split.train.pairs, split.valid.pairs], axis=0)
    return Graph.from_edges(split.train_graph.n, edges)


def sample_negatives(g: Graph, count: int, seed: int, exclude=()) -> PairBatch:
    """Uniformly sample ``count`` distinct non-adjacent unordered pairs.

    ``exclude`` holds extra forbidden pairs (any orientation). Deterministic
    for a fixed seed; raises :class:`SamplingError` on exhaustion.
    """
    n = g.n
    total_pairs = n * (n - 1) // 2
    excl = {(min(u, v), max(u, v)) for u, v in exclude}
    rng = np.random.default_rng(seed)
    # Small graphs: enumerate every candidate; large graphs: rejection sample.
    if total_pairs <= 1_000_000:
        iu, iv = np.triu_indices(n, k=1)
        adj = g.to_scipy()
        nonedge = np.asarray(adj[iu, iv]).ravel() == 0
        cand = np.stack([iu[nonedge], iv[nonedge]], axis=1)
        if excl:
            mask = np.array([(int(u), int(v)) not in excl for u, v in cand])
            cand = cand[mask]
        if count > cand.shape[0]:
            raise SamplingError(
                f"requested {count} negatives, only {cand.shape[0]} available")
        pick = rng.choice(cand.shape[0], size=count, replace=False)
        chosen = cand[np.sort(pick)]
    else:
        chosen_set: set[tuple[int, int]] = set()
        chosen_list = []
        attempts = 0
        max_attempts = 100 * count + 10_000
        while len(chosen_list) < count:
            attempts += 1
            if attempts > max_attempts:
                raise SamplingError("negative sampling did not converge; "
                                    "non-edge pool may be exhausted")
            u = int(rng.integers(0, n))
            v = int(rng.integers(0, n))
            if u == v:
                continue
            key = (min(u, v), max(u, v))
            if key in chosen_set or key in excl or g.has_edge(u, v):
                continue
            chosen_set.add(key)
            chosen_list.append(key)
        chosen = np.array(chosen_list, dtype=np.int64)
    return PairBatch(chosen, labels=np.zeros(len(chosen), dtype=np.int64))
