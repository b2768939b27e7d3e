"""Path-based normalization of CN features.

A node that serves as a k-hop common neighbor for many pairs carries little
information about any one of them, so each feature column is divided by the
node's walk-participation count: exactly (all ordered pairs) on small graphs,
or by the streaming column-sum estimate during training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, ScaleError
from .features import OrderFeatures, as_dense, cn_set
from .graph import Graph
from .ortho import RunningState

EXACT_NODE_LIMIT = 5000

DIVISION_EPSILON = 1e-12


@dataclass
class ParticipationCounts:
    """Per-node walk-participation totals for one order.

    In ``exact`` mode, counts[c] sums combined(i, j)[c] over all ordered
    pairs i != j; ``running`` mode holds the streaming column-sum estimate.
    """

    order: int
    counts: np.ndarray
    mode: str

    def write_csv(self, stream) -> None:
        stream.write("node,k,count,mode\n")
        for node, value in enumerate(self.counts):
            stream.write(f"{node},{self.order},{value!r},{self.mode}\n")


def _dense_powers(g: Graph, max_power: int) -> list[np.ndarray]:
    adj = g.to_scipy().toarray()
    powers = [np.eye(g.n)]
    for _ in range(max_power):
        powers.append(powers[-1] @ adj)
    return powers


def exact_walk_participation(g: Graph, k: int,
                             exclude_endpoints: bool = True,
                             node_limit: int = EXACT_NODE_LIMIT) -> ParticipationCounts:
    """counts[c] = sum over ordered pairs (i, j), i != j, of combined(i, j)[c].

    Uses the closed form
        sum_{i != j} (A^k1)_{ic} (A^k2)_{cj}
            = s_{k1}[c] s_{k2}[c] - (A^{k1+k2})_{cc}
    per slice (s_l = row sums of A^l), with endpoint-column corrections when
    the endpoints are excluded. For k=1 with endpoints excluded this is
    d(c)(d(c) - 1).
    """
    if k < 1:
        raise ConfigError(f"order must be >= 1, got {k}")
    if g.n > node_limit:
        raise ScaleError(f"n={g.n} exceeds the exact-participation guard "
                         f"{node_limit}; use the running estimator")
    powers = _dense_powers(g, 2 * k)
    sums = [p.sum(axis=0) for p in powers]
    counts = np.zeros(g.n)
    for k1, k2 in ((k, k), (k - 1, k), (k, k - 1)):
        counts += sums[k1] * sums[k2] - np.diag(powers[k1 + k2])
        if exclude_endpoints:
            d1 = np.diag(powers[k1])
            d2 = np.diag(powers[k2])
            counts -= d1 * (sums[k2] - d2)  # c == i terms
            counts -= d2 * (sums[k1] - d1)  # c == j terms
    counts[np.abs(counts) < 1e-9] = 0.0
    return ParticipationCounts(order=k, counts=counts, mode="exact")


def update_running_participation(state: RunningState, feats: OrderFeatures) -> RunningState:
    """Fold one batch's column sums into the running estimate (gain 1/(1+t)).

    Equivalent to the simple moving average of per-batch column sums; the
    first batch initializes the estimate outright.
    """
    k = feats.order
    col_sums = np.asarray(feats.combined.sum(axis=0)).ravel().astype(np.float64)
    t = state.psi_t.get(k, 0)
    gamma = 1.0 / (1 + t)
    if k not in state.psi_hat:
        state.psi_hat[k] = np.zeros_like(col_sums)
    state.psi_hat[k] = (1.0 - gamma) * state.psi_hat[k] + gamma * col_sums
    state.psi_t[k] = t + 1
    return state


def running_counts(state: RunningState, k: int) -> ParticipationCounts:
    if k not in state.psi_hat:
        raise ConfigError(f"no running participation for order {k}")
    return ParticipationCounts(order=k, counts=state.psi_hat[k], mode="running")


def apply_normalization(feats: OrderFeatures, counts: ParticipationCounts,
                        epsilon: float = DIVISION_EPSILON) -> OrderFeatures:
    """Divide every feature column c by max(counts[c], epsilon).

    Zero entries stay zero; epsilon only guards nodes never observed in any
    batch.
    """
    if counts.order != feats.order:
        raise ConfigError(f"counts order {counts.order} != feature order {feats.order}")
    inv = 1.0 / np.maximum(counts.counts, epsilon)

    def scale(mat):
        if sp.issparse(mat):
            return (mat @ sp.diags(inv)).tocsr()
        return np.asarray(mat, dtype=np.float64) * inv

    return OrderFeatures(order=feats.order, pairs=feats.pairs,
                         slices={key: scale(m) for key, m in feats.slices.items()},
                         combined=scale(feats.combined))


def normalized_cn_score(g: Graph, i: int, j: int, k: int,
                        participation: ParticipationCounts | None = None,
                        degree_corrected: bool = False) -> float:
    """Sum of reciprocal unordered-pair walk-participation counts over CN^k(i, j).

    Participation is counted over unordered pairs (ordered totals halved).
    With ``degree_corrected`` each term is multiplied by the ratio of the
    node's unordered pair count to its degree; at k=1 that ratio is
    C(d(c), 2)/d(c), turning the term into the resource-allocation value
    1/d(c) exactly.
    """
    members = cn_set(g, i, j, k, exclude_endpoints=True)
    if not members:
        return 0.0
    if participation is None:
        participation = exact_walk_participation(g, k, exclude_endpoints=True)
    score = 0.0
    for c in members:
        ordered = participation.counts[c]
        assert ordered > 0, "a CN member must have positive participation"
        term = 2.0 / ordered
        if degree_corrected:
            term *= (ordered / 2.0) / g.degrees[c]
        score += term
    return score
