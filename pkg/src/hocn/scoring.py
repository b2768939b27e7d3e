"""Heuristic scorers and the orthogonal-CN link scoring model.

The learned model realizes
    score(i, j) = head . [ H_i * H_j + sum_k alpha_k (OCN^k row) H ] + bias
with H produced by parameter-free symmetrically-normalized propagation: a
stand-in for a trained message-passing encoder, so the structural-feature
pipeline is exercised end to end with manually derived gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, InputError, TrainingError
from .features import as_dense, cn_order_features_all
from .graph import Graph, PairBatch, SplitResult, sample_negatives
from .normalize import running_counts, update_running_participation, apply_normalization
from .ortho import (OrthoBasis, RunningState, apply_polynomial_filter,
                    degree_filter_argument, gram_schmidt_batch, polynomial_weights)

MODEL_FORMAT_VERSION = 1

MAX_PROPAGATION_DEPTH = 8


def _common_neighbors(g: Graph, i: int, j: int) -> np.ndarray:
    return np.intersect1d(g.neighbors(i), g.neighbors(j), assume_unique=True)


def heuristic_score(g: Graph, pair, kind: str, order: int = 1) -> float:
    """Classic CN / AA / RA scores, or the path-normalized CN at a given order."""
    i, j = int(pair[0]), int(pair[1])
    if i == j:
        raise InputError("pair with identical endpoints")
    if kind == "normalized_cn" or kind.startswith("normalized_cn_"):
        from .normalize import normalized_cn_score
        if kind.startswith("normalized_cn_"):
            order = int(kind.rsplit("_", 1)[1])
        return normalized_cn_score(g, i, j, order)
    cn = _common_neighbors(g, i, j)
    if kind == "cn":
        return float(cn.size)
    degs = g.degrees[cn]
    assert (degs >= 2).all(), "a common neighbor has degree >= 2 by construction"
    if kind == "ra":
        return float(np.sum(1.0 / degs))
    if kind == "aa":
        return float(np.sum(1.0 / np.log(degs)))
    raise ConfigError(f"unknown heuristic kind {kind!r}")


def heuristic_scores(g: Graph, pairs: np.ndarray, kind: str) -> np.ndarray:
    """Vectorized CN/AA/RA over a (h, 2) pair array via sparse row products."""
    if kind not in ("cn", "aa", "ra"):
        return np.array([heuristic_score(g, p, kind) for p in pairs])
    adj = g.to_scipy()
    if kind == "cn":
        weighted = adj
    else:
        d = g.degrees.astype(np.float64)
        with np.errstate(divide="ignore"):
            w = 1.0 / d if kind == "ra" else 1.0 / np.log(d)
        w[~np.isfinite(w)] = 0.0
        weighted = adj @ sp.diags(w)
    rows_u = adj[pairs[:, 0]]
    rows_v = weighted.tocsr()[pairs[:, 1]]
    return np.asarray(rows_u.multiply(rows_v).sum(axis=1)).ravel()


def normalized_adjacency(g: Graph) -> sp.csr_matrix:
    """Symmetrically degree-normalized adjacency with self-loops."""
    adj = g.to_scipy() + sp.identity(g.n, format="csr")
    inv_sqrt = 1.0 / np.sqrt(g.degrees + 1.0)
    d = sp.diags(inv_sqrt)
    return (d @ adj @ d).tocsr()


def default_node_features(g: Graph, dim: int = 16, seed: int = 0) -> np.ndarray:
    """Log-degree scalar plus a seeded random projection of each adjacency row."""
    rng = np.random.default_rng(seed)
    proj = rng.standard_normal((g.n, dim)) / math.sqrt(dim)
    adj = g.to_scipy()
    return np.concatenate([np.log1p(g.degrees)[:, None], adj @ proj], axis=1)


def propagate_features(g: Graph, x, depth: int) -> np.ndarray:
    """H = A_hat^depth X with A_hat the normalized self-loop adjacency."""
    if depth < 0 or depth > MAX_PROPAGATION_DEPTH:
        raise InputError(f"propagation depth {depth} outside [0, {MAX_PROPAGATION_DEPTH}]")
    if isinstance(x, str):
        if x == "identity":
            x = np.eye(g.n)
        elif x == "degree-log":
            x = np.log1p(g.degrees.astype(np.float64))[:, None]
        else:
            raise InputError(f"unknown feature preset {x!r}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != g.n:
        raise InputError(f"feature matrix shape {x.shape} does not match n={g.n}")
    if depth == 0:
        return x
    a_hat = normalized_adjacency(g)
    h = x
    for _ in range(depth):
        h = a_hat @ h
    return h


@dataclass
class ScoreModel:
    """Learned coefficients of the orthogonal-CN scoring form."""

    k_max: int
    alpha: np.ndarray
    depth: int
    head_w: np.ndarray
    head_b: float
    variant: str = "ocn"

    def save(self, stream) -> None:
        stream.write(f"hocn-model v{MODEL_FORMAT_VERSION}\n")
        stream.write(f"variant {self.variant}\n")
        stream.write(f"k_max {self.k_max}\n")
        stream.write(f"depth {self.depth}\n")
        stream.write("alpha " + " ".join(repr(float(a)) for a in self.alpha) + "\n")
        stream.write("head_w " + " ".join(repr(float(w)) for w in self.head_w) + "\n")
        stream.write(f"head_b {self.head_b!r}\n")

    @classmethod
    def load(cls, stream) -> "ScoreModel":
        lines = [ln.strip() for ln in stream if ln.strip()]
        if not lines or not lines[0].startswith("hocn-model"):
            raise ConfigError("not a model file")
        fields = {}
        for ln in lines[1:]:
            key, _, rest = ln.partition(" ")
            fields[key] = rest
        return cls(
            k_max=int(fields["k_max"]),
            alpha=np.array([float(v) for v in fields["alpha"].split()]),
            depth=int(fields["depth"]),
            head_w=np.array([float(v) for v in fields["head_w"].split()]),
            head_b=float(fields["head_b"]),
            variant=fields.get("variant", "ocn"),
        )


def ocn_score(model: ScoreModel, h: np.ndarray, basis: OrthoBasis, pair,
              pair_index: int = 0) -> float:
    """Logit for one pair given its basis rows; see the module docstring."""
    i, j = int(pair[0]), int(pair[1])
    if basis.k_max < model.k_max:
        raise ConfigError(f"basis has {basis.k_max} orders, model wants {model.k_max}")
    z = h[i] * h[j]
    for k in range(1, model.k_max + 1):
        z = z + model.alpha[k - 1] * (basis.row(k, pair_index) @ h)
    return float(model.head_w @ z + model.head_b)


@dataclass
class FeatureConfig:
    """Settings for the structural-feature pipeline feeding the model."""

    k_max: int = 2
    depth: int = 2
    feature_dim: int = 16
    variant: str = "ocn"
    poly_basis: str = "chebyshev"
    batch_size: int = 2048
    exclude_endpoints: bool = False
    seed: int = 0


def pair_features(g: Graph, pairs: np.ndarray, h: np.ndarray,
                  cfg: FeatureConfig, state: RunningState,
                  training: bool) -> tuple[np.ndarray, np.ndarray]:
    """Per-pair model inputs: (B, F) elementwise products and (K, B, F) CN pools.

    Runs the full pipeline per mini-batch: CN features, path normalization
    with the running participation estimate, then streaming Gram-Schmidt
    (variant "ocn") or the diagonal polynomial filter (variant "ocnp").
    Basis rows are rescaled by sqrt(batch size) so feature magnitudes do not
    depend on batch boundaries.
    """
    n_pairs = pairs.shape[0]
    f_dim = h.shape[1]
    m = h[pairs[:, 0]] * h[pairs[:, 1]]
    q = np.zeros((cfg.k_max, n_pairs, f_dim))
    poly_x = degree_filter_argument(g) if cfg.variant == "ocnp" else None
    for start in range(0, n_pairs, cfg.batch_size):
        chunk = PairBatch(pairs[start:start + cfg.batch_size])
        feats = cn_order_features_all(g, chunk, cfg.k_max,
                                      exclude_endpoints=cfg.exclude_endpoints)
        normalized = []
        for f in feats:
            if training:
                update_running_participation(state, f)
            counts = running_counts(state, f.order)
            normalized.append(apply_normalization(f, counts))
        if cfg.variant == "ocn":
            basis = gram_schmidt_batch(normalized, state, training=training)
            scale = math.sqrt(len(chunk))
            mats = [basis.matrix(k) * scale for k in range(1, cfg.k_max + 1)]
        elif cfg.variant == "ocnp":
            mats = []
            for f in normalized:
                weights = polynomial_weights(cfg.poly_basis, f.order, poly_x)
                mats.append(apply_polynomial_filter(f, weights).combined)
        else:
            raise ConfigError(f"unknown variant {cfg.variant!r}")
        for k, mat in enumerate(mats):
            q[k, start:start + len(chunk)] = as_dense(mat @ h)
    return m, q


def _logits(alpha, head_w, head_b, m, q):
    z = m + np.tensordot(alpha, q, axes=(0, 0))
    return z @ head_w + head_b


def logistic_loss_and_grads(alpha, head_w, head_b, m, q, y):
    """Mean logistic loss and analytic gradients for (alpha, head_w, head_b)."""
    z = m + np.tensordot(alpha, q, axes=(0, 0))
    logits = z @ head_w + head_b
    # stable log(1 + exp(-s*logit)) with s = +-1
    s = 2.0 * y - 1.0
    margin = s * logits
    loss = float(np.mean(np.logaddexp(0.0, -margin)))
    p = 1.0 / (1.0 + np.exp(-logits))
    delta = (p - y) / y.shape[0]
    grad_w = z.T @ delta
    grad_b = float(delta.sum())
    grad_alpha = np.array([(q[k] @ head_w) @ delta for k in range(q.shape[0])])
    return loss, grad_alpha, grad_w, grad_b


@dataclass
class TrainConfig:
    """Trainer settings for the full-batch gradient-descent fit."""

    features: FeatureConfig = field(default_factory=FeatureConfig)
    learning_rate: float = 0.5
    epochs: int = 4
    steps_per_epoch: int = 60
    seed: int = 0
    use_valid_as_input: bool = False


@dataclass
class TrainResult:
    model: ScoreModel
    state: RunningState
    h: np.ndarray
    losses: list


def train_model(split: SplitResult, config: TrainConfig) -> TrainResult:
    """Fit alpha and the linear head by full-batch gradient descent.

    Negatives are resampled each epoch with a per-epoch seed derived from the
    run seed; features are rebuilt against the fresh sample, then the inner
    descent steps run on fixed arrays (the feature pipeline has no trainable
    parameters).
    """
    g = split.train_graph
    cfg = config.features
    if len(split.train) < 16:
        raise TrainingError(f"need >= 16 train positives, got {len(split.train)}")
    x = default_node_features(g, dim=cfg.feature_dim, seed=cfg.seed)
    h = propagate_features(g, x, cfg.depth)
    state = RunningState()
    rng = np.random.default_rng(config.seed)
    alpha = np.full(cfg.k_max, 0.1)
    head_w = np.full(h.shape[1], 0.1)
    head_b = 0.0
    losses = []
    pos = split.train.pairs
    exclude = [tuple(p) for p in np.concatenate(
        [split.train.pairs, split.valid.pairs, split.test.pairs], axis=0)]
    for epoch in range(config.epochs):
        neg_seed = int(rng.integers(0, 2**31 - 1))
        neg = sample_negatives(g, len(split.train), neg_seed, exclude=exclude)
        pairs = np.concatenate([pos, neg.pairs], axis=0)
        y = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
        m, q = pair_features(g, pairs, h, cfg, state, training=True)
        for _ in range(config.steps_per_epoch):
            loss, g_alpha, g_w, g_b = logistic_loss_and_grads(
                alpha, head_w, head_b, m, q, y)
            if not math.isfinite(loss):
                raise TrainingError(
                    "training loss diverged",
                    last_state=ScoreModel(cfg.k_max, alpha, cfg.depth,
                                          head_w, head_b, cfg.variant))
            losses.append(loss)
            alpha = alpha - config.learning_rate * g_alpha
            head_w = head_w - config.learning_rate * g_w
            head_b = head_b - config.learning_rate * g_b
    model = ScoreModel(k_max=cfg.k_max, alpha=alpha, depth=cfg.depth,
                       head_w=head_w, head_b=float(head_b), variant=cfg.variant)
    return TrainResult(model=model, state=state, h=h, losses=losses)


def model_scores(g: Graph, pairs: np.ndarray, model: ScoreModel,
                 state: RunningState, h: np.ndarray,
                 cfg: FeatureConfig) -> np.ndarray:
    """Inference-mode logits for a pair array (running statistics frozen)."""
    m, q = pair_features(g, pairs, h, cfg, state, training=False)
    return _logits(model.alpha, model.head_w, model.head_b, m, q)
