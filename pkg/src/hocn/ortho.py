"""Cross-order redundancy removal.

Streaming Gram-Schmidt over mini-batches with running (simple-moving-average)
Frobenius inner products, an exact full-graph orthogonalizer used as the
small-graph oracle, and the polynomial-filter variant that trades exact
orthogonality for a per-node diagonal rescaling.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, ScaleError
from .features import OrderFeatures, as_dense, cn_order_features_all
from .graph import Graph, PairBatch

DEGENERATE_NORM = 1e-12

FULL_GRAPH_NODE_LIMIT = 2000


def frobenius_inner(a, b) -> float:
    if sp.issparse(a) and sp.issparse(b):
        return float(a.multiply(b).sum())
    return float(np.vdot(as_dense(a), as_dense(b)))


def frobenius_norm(a) -> float:
    return float(np.sqrt(frobenius_inner(a, a)))


@dataclass
class RunningState:
    """Running statistics shared by the orthogonalizer and the normalizer.

    ``t`` counts completed Gram-Schmidt batches; ``xi_hat[(k, i)]`` is the
    running inner product of CN^k with OCN^i; ``psi_hat[k]`` the running
    per-node walk-participation column sums with its own batch counter
    ``psi_t[k]``. With the 1/(t+1) gains both runs equal the arithmetic mean
    of the per-batch values.
    """

    t: int = 0
    xi_hat: dict = field(default_factory=dict)
    psi_hat: dict = field(default_factory=dict)
    psi_t: dict = field(default_factory=dict)

    def save(self, stream) -> None:
        """Checkpoint to CSV; floats are written exactly (repr round-trips)."""
        writer = csv.writer(stream)
        writer.writerow(["kind", "k", "i", "value"])
        writer.writerow(["t", "", "", repr(self.t)])
        for (k, i), value in sorted(self.xi_hat.items()):
            writer.writerow(["xi", k, i, repr(value)])
        for k, count in sorted(self.psi_t.items()):
            writer.writerow(["psi_t", k, "", repr(count)])
        for k, vec in sorted(self.psi_hat.items()):
            for node, value in enumerate(vec):
                writer.writerow(["psi", k, node, repr(float(value))])

    @classmethod
    def load(cls, stream) -> "RunningState":
        reader = csv.reader(stream)
        header = next(reader)
        if header != ["kind", "k", "i", "value"]:
            raise ConfigError("unrecognized checkpoint header")
        state = cls()
        psi_rows: dict[int, dict[int, float]] = {}
        for kind, k, i, value in reader:
            if kind == "t":
                state.t = int(value)
            elif kind == "xi":
                state.xi_hat[(int(k), int(i))] = float(value)
            elif kind == "psi_t":
                state.psi_t[int(k)] = int(value)
            elif kind == "psi":
                psi_rows.setdefault(int(k), {})[int(i)] = float(value)
            else:
                raise ConfigError(f"unknown checkpoint row kind {kind!r}")
        for k, row in psi_rows.items():
            vec = np.zeros(max(row) + 1)
            for node, value in row.items():
                vec[node] = value
            state.psi_hat[k] = vec
        return state


@dataclass
class OrthoBasis:
    """OCN^1..OCN^K matrices for one batch; each unit Frobenius norm or degenerate."""

    matrices: list
    degenerate: list

    @property
    def k_max(self) -> int:
        return len(self.matrices)

    def matrix(self, k: int):
        return self.matrices[k - 1]

    def row(self, k: int, index: int) -> np.ndarray:
        mat = self.matrices[k - 1]
        if sp.issparse(mat):
            return np.asarray(mat.getrow(index).todense()).ravel()
        return np.asarray(mat[index])

    @property
    def degenerate_count(self) -> int:
        return sum(self.degenerate)


def _combined_list(feats):
    out = []
    for k, f in enumerate(feats, start=1):
        if isinstance(f, OrderFeatures):
            if f.order != k:
                raise ConfigError("orders must be contiguous from 1")
            out.append(f.combined)
        else:
            out.append(f)
    return out


def gram_schmidt_batch(feats, state: RunningState, training: bool = True) -> OrthoBasis:
    """One batch of streaming Gram-Schmidt.

    ``feats`` is a sequence of combined CN^k matrices for orders 1..K.
    OCN^1 is CN^1 Frobenius-normalized; for k >= 2 the running inner
    products are (in training mode) first updated with gain 1/(t+1) against
    this batch's OCN^i, then CN^k - sum_i xi_hat^i OCN^i is normalized.
    Near-zero residuals are emitted as zero matrices flagged degenerate.
    """
    mats = _combined_list(feats)
    if not mats:
        raise ConfigError("need at least one order")
    basis: list = []
    degenerate: list[bool] = []
    beta = 1.0 / (state.t + 1)
    for k, cn in enumerate(mats, start=1):
        if k == 1:
            residual = cn * 1.0
        else:
            residual = cn * 1.0
            for i in range(1, k):
                if training:
                    xi_batch = frobenius_inner(cn, basis[i - 1])
                    prev = state.xi_hat.get((k, i), 0.0)
                    state.xi_hat[(k, i)] = (1.0 - beta) * prev + beta * xi_batch
                xi = state.xi_hat.get((k, i), 0.0)
                residual = residual - xi * basis[i - 1]
        norm = frobenius_norm(residual)
        if norm < DEGENERATE_NORM:
            degenerate.append(True)
            basis.append(residual * 0.0)
        else:
            degenerate.append(False)
            basis.append(residual * (1.0 / norm))
    if training:
        state.t += 1
    return OrthoBasis(matrices=basis, degenerate=degenerate)


def all_pairs_batch(n: int) -> PairBatch:
    iu, iv = np.triu_indices(n, k=1)
    return PairBatch(np.stack([iu, iv], axis=1).astype(np.int64))


@dataclass
class ExactOrthoBasis:
    """Full-graph orthogonal basis in coefficient form.

    OCN^k = sum_j coeffs[k-1, j-1] * CN^j over the all-pairs batch. The Gram
    matrix of the raw CN^k matrices is kept so inner products of arbitrary
    combinations are exact without materializing (P, n) matrices.
    """

    graph: Graph
    k_max: int
    exclude_endpoints: bool
    gram: np.ndarray
    coeffs: np.ndarray
    degenerate: list

    def inner(self, a: int, b: int) -> float:
        """Frobenius inner product <OCN^a, OCN^b> over the all-pairs batch."""
        return float(self.coeffs[a - 1] @ self.gram @ self.coeffs[b - 1])

    def raw_inner(self, a: int, b: int) -> float:
        """<CN^a, CN^b> over the all-pairs batch."""
        return float(self.gram[a - 1, b - 1])

    def cn_ocn_inner(self, k: int, i: int) -> float:
        """<CN^k, OCN^i>: the exact counterpart of the running xi."""
        return float(self.gram[k - 1] @ self.coeffs[i - 1])

    def materialize(self, batch: PairBatch | None = None) -> OrthoBasis:
        """Realize the basis rows (for the all-pairs batch by default)."""
        if batch is None:
            batch = all_pairs_batch(self.graph.n)
        feats = cn_order_features_all(self.graph, batch, self.k_max,
                                      exclude_endpoints=self.exclude_endpoints)
        mats = [as_dense(f.combined).astype(np.float64) for f in feats]
        out = []
        for k in range(self.k_max):
            acc = np.zeros_like(mats[0])
            for j in range(self.k_max):
                if self.coeffs[k, j] != 0.0:
                    acc += self.coeffs[k, j] * mats[j]
            out.append(acc)
        return OrthoBasis(matrices=out, degenerate=list(self.degenerate))


def full_graph_orthogonalize(g: Graph, k_max: int,
                             exclude_endpoints: bool = False,
                             batch_rows: int = 4096,
                             node_limit: int = FULL_GRAPH_NODE_LIMIT) -> ExactOrthoBasis:
    """Exact Gram-Schmidt over the batch of all unordered pairs.

    The K x K Gram matrix of the CN^k matrices is accumulated in streamed
    row blocks (never holding a (P, n) matrix), then the orthogonal basis is
    derived in coefficient space. Guarded to small graphs; this is the
    convergence oracle for the streaming mode.
    """
    if g.n > node_limit:
        raise ScaleError(f"n={g.n} exceeds the full-graph guard {node_limit}; "
                         "use the streaming orthogonalizer")
    pairs = all_pairs_batch(g.n).pairs
    gram = np.zeros((k_max, k_max))
    for start in range(0, pairs.shape[0], batch_rows):
        chunk = PairBatch(pairs[start:start + batch_rows])
        feats = cn_order_features_all(g, chunk, k_max,
                                      exclude_endpoints=exclude_endpoints)
        mats = [as_dense(f.combined).astype(np.float64) for f in feats]
        for a in range(k_max):
            for b in range(a, k_max):
                val = float(np.vdot(mats[a], mats[b]))
                gram[a, b] += val
                if a != b:
                    gram[b, a] += val
    coeffs = np.zeros((k_max, k_max))
    degenerate = []
    for k in range(k_max):
        c = np.zeros(k_max)
        c[k] = 1.0
        for i in range(k):
            if degenerate[i]:
                continue
            xi = float(gram[k] @ coeffs[i])
            c = c - xi * coeffs[i]
        norm_sq = float(c @ gram @ c)
        norm = np.sqrt(max(norm_sq, 0.0))
        if norm < DEGENERATE_NORM:
            degenerate.append(True)
            coeffs[k] = 0.0
        else:
            degenerate.append(False)
            coeffs[k] = c / norm
    return ExactOrthoBasis(graph=g, k_max=k_max, exclude_endpoints=exclude_endpoints,
                           gram=gram, coeffs=coeffs, degenerate=degenerate)


def polynomial_weights(basis_kind: str, k: int, x) -> np.ndarray:
    """k-th basis polynomial evaluated elementwise; x is clamped to [-1, 1]."""
    x = np.clip(np.asarray(x, dtype=np.float64), -1.0, 1.0)
    if k < 0:
        raise ConfigError("polynomial order must be >= 0")
    if basis_kind == "monomial":
        return x ** k
    if basis_kind == "chebyshev":
        prev, cur = np.ones_like(x), x.copy()
    elif basis_kind == "legendre":
        prev, cur = np.ones_like(x), x.copy()
    else:
        raise ConfigError(f"unknown polynomial basis {basis_kind!r}")
    if k == 0:
        return prev
    if k == 1:
        return cur
    for m in range(1, k):
        if basis_kind == "chebyshev":
            prev, cur = cur, 2.0 * x * cur - prev
        else:
            prev, cur = cur, ((2 * m + 1) * x * cur - m * prev) / (m + 1)
    return cur


def degree_filter_argument(g: Graph) -> np.ndarray:
    """Default per-node filter argument: degree mapped affinely onto [-1, 1]."""
    d_max = int(g.degrees.max()) if g.n else 1
    if d_max == 0:
        return np.full(g.n, -1.0)
    return 2.0 * g.degrees / d_max - 1.0


def apply_polynomial_filter(feats: OrderFeatures, weights: np.ndarray) -> OrderFeatures:
    """Scale column c of every matrix by weights[c] (the OCNP diagonal filter)."""
    weights = np.asarray(weights, dtype=np.float64)
    n = feats.combined.shape[1]
    if weights.shape[0] != n:
        raise ConfigError(f"weight length {weights.shape[0]} != node count {n}")

    def scale(mat):
        if sp.issparse(mat):
            return (mat @ sp.diags(weights)).tocsr()
        return np.asarray(mat, dtype=np.float64) * weights

    return OrderFeatures(order=feats.order, pairs=feats.pairs,
                         slices={key: scale(m) for key, m in feats.slices.items()},
                         combined=scale(feats.combined))
