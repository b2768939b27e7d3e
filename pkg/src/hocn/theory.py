"""Random-graph generators, closed-form distance-bound evaluators, and their
Monte-Carlo validation.

The latent model places nodes uniformly on a unit-volume D-torus and links
pairs within radius r (step connection function), so the expected degree is
exactly N V(1) r^D with no boundary corrections. The Barabasi-Albert
generator attaches each arriving node to m degree-proportional draws (with
replacement, duplicates collapsed). Bound evaluators are deterministic pure
functions that return an explicit vacuous marker instead of NaN.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BoundDomainError, InputError
from .graph import Graph

INV_E = math.exp(-1.0)


# ---------------------------------------------------------------------------
# special functions


def unit_ball_volume(dim: int) -> float:
    """Volume of the unit-radius ball in `dim` dimensions."""
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


def log_double_factorial_ratio(n: int) -> float:
    """log of (2n+1)!! / (2^n n!), evaluated via log-gamma."""
    return (math.lgamma(2 * n + 2) - 2 * n * math.log(2.0)
            - 2.0 * math.lgamma(n + 1))


def lambert_w(x: float, branch: str = "principal") -> float:
    """Real Lambert W via Halley iteration; |W e^W - x| <= 1e-12.

    branch "principal" needs x >= -1/e; "minus-one" needs -1/e <= x < 0.
    """
    if branch not in ("principal", "minus-one"):
        raise BoundDomainError(f"unknown branch {branch!r}")
    if x < -INV_E - 1e-15:
        raise BoundDomainError(f"x={x} below -1/e")
    if abs(x + INV_E) < 1e-300:
        return -1.0
    if branch == "principal":
        if x == 0.0:
            return 0.0
        if x > math.e:
            lx = math.log(x)
            w = lx - math.log(lx)
        elif x > -0.25:
            w = x / (1.0 + x) if x > -0.5 else x
        else:
            # series around the branch point
            p = math.sqrt(2.0 * (math.e * x + 1.0))
            w = -1.0 + p - p * p / 3.0
    else:
        if x >= 0.0:
            raise BoundDomainError("minus-one branch needs x < 0")
        if x > -0.25:
            lx = math.log(-x)
            w = lx - math.log(-lx)
        else:
            p = math.sqrt(2.0 * (math.e * x + 1.0))
            w = -1.0 - p - p * p / 3.0
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= 1e-13 * max(1.0, abs(x)):
            break
        wp1 = w + 1.0
        w = w - f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
    return w


# ---------------------------------------------------------------------------
# graph models


@dataclass(frozen=True)
class LatentModelParams:
    """Unit-volume D-torus geometric model with one shared radius."""

    n: int
    dim: int
    radius: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 2 or self.dim < 1:
            raise InputError("need n >= 2 and dim >= 1")
        r_max = (1.0 / unit_ball_volume(self.dim)) ** (1.0 / self.dim)
        if not 0.0 < self.radius < r_max:
            raise InputError(f"radius must lie in (0, {r_max:.4f})")


def torus_distances(positions: np.ndarray) -> np.ndarray:
    """Pairwise wrap-around Euclidean distances on the unit torus."""
    diff = np.abs(positions[:, None, :] - positions[None, :, :])
    diff = np.minimum(diff, 1.0 - diff)
    return np.sqrt((diff ** 2).sum(axis=-1))


@dataclass(frozen=True)
class LatentSample:
    graph: Graph
    positions: np.ndarray
    distances: np.ndarray
    params: LatentModelParams


def sample_latent_model(params: LatentModelParams) -> LatentSample:
    """Sample positions and the induced radius graph, keeping the geometry."""
    rng = np.random.default_rng(params.seed)
    positions = rng.random((params.n, params.dim))
    dist = torus_distances(positions)
    iu, iv = np.triu_indices(params.n, k=1)
    mask = dist[iu, iv] <= params.radius
    edges = np.stack([iu[mask], iv[mask]], axis=1)
    g = Graph.from_edges(params.n, edges)
    return LatentSample(graph=g, positions=positions, distances=dist, params=params)


def sample_latent_graph(params: LatentModelParams) -> Graph:
    return sample_latent_model(params).graph


def sample_ba_graph(n: int, m: int, seed: int = 0) -> Graph:
    """Preferential attachment with replacement; duplicate draws collapse."""
    if not n > m >= 1:
        raise InputError("need n > m >= 1")
    rng = np.random.default_rng(seed)
    # repeated-node list makes degree-proportional sampling O(1)
    targets = [0, 1, 1, 0]  # seed: edge (0, 1)
    edges = [(0, 1)]
    for v in range(2, n):
        picks = {int(targets[rng.integers(0, len(targets))]) for _ in range(m)}
        for w in picks:
            edges.append((v, w))
            targets.extend((v, w))
    return Graph.from_edges(n, edges)


def count_paths(g: Graph, i: int, j: int, length: int) -> int:
    """(A^length)_{ij}: the number of walks of that exact length."""
    if length == 0:
        return int(i == j)
    adj = g.to_scipy()
    vec = np.zeros(g.n)
    vec[i] = 1.0
    for _ in range(length):
        vec = adj.T @ vec
    return int(round(vec[j]))


def degree_expectation_ba(gap: int, m: int) -> float:
    """Expected per-arrival degree increment m (2 gap - 1)!! / (2^gap gap!)."""
    if gap < 1:
        raise InputError("gap must be >= 1")
    log_val = (math.lgamma(2 * gap) - (gap - 1) * math.log(2.0)
               - math.lgamma(gap)) - gap * math.log(2.0) - math.lgamma(gap + 1)
    return m * math.exp(log_val)


# ---------------------------------------------------------------------------
# bound evaluators


@dataclass(frozen=True)
class BoundInputs:
    """Closed-form bound inputs; see field names for the quantities involved.

    ``steepness`` is the logistic sharpness of the connection function,
    distinct from the concentration quantity computed internally from
    (n, delta, k). ``max_degree`` only enters the normalized BA bound.
    """

    n: int
    delta: float
    k: int
    dim: int
    r_sum: float = 0.0
    r_m_max: float = 1.0
    eta_2k: float = 0.0
    zeta: int = 2
    rho: float = 0.5
    m: int = 1
    steepness: float = 1.0
    max_degree: int = 1

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise InputError("delta must lie in (0, 1)")
        if self.k < 1:
            raise InputError("k must be >= 1")
        if self.eta_2k < 0:
            raise InputError("eta_2k must be >= 0")


@dataclass(frozen=True)
class BoundResult:
    value: float | None
    vacuous: bool = False
    reason: str = ""

    def __float__(self) -> float:
        if self.vacuous:
            raise ValueError(f"vacuous bound: {self.reason}")
        return self.value


def _concentration_terms(b: BoundInputs) -> tuple[float, float]:
    """(iota, alpha): normalized walk count and the Bernstein correction."""
    n, delta, k = b.n, b.delta, b.k
    alpha = math.sqrt(n * math.log(1.0 / (2.0 * delta)) / 2.0) / (
        n + math.sqrt(-3.0 * n * math.log(delta)))
    iota = b.eta_2k / (n - math.sqrt(-2.0 * n * math.log(delta))) ** (2 * k - 1)
    return iota, alpha


def bound_unnormalized(b: BoundInputs) -> BoundResult:
    """Latent-space distance bound from raw k-hop walk counts."""
    iota, alpha = _concentration_terms(b)
    if iota <= alpha:
        return BoundResult(None, vacuous=True, reason="iota <= alpha")
    term = (iota - alpha) ** (2.0 / (b.dim * (2 * b.k - 1)))
    radicand = b.r_m_max ** 2 - term
    if radicand < 0.0:
        return BoundResult(None, vacuous=True, reason="negative radicand")
    return BoundResult(b.r_sum + 2.0 * math.sqrt(radicand))


def bound_normalized(b: BoundInputs) -> BoundResult:
    """Latent-space bound with the path-normalized contribution (k >= 2)."""
    if b.k < 2:
        raise BoundDomainError("normalized latent bound needs k >= 2")
    iota, alpha = _concentration_terms(b)
    gamma = iota - alpha
    if gamma <= 0.0:
        return BoundResult(None, vacuous=True, reason="gamma <= 0")
    pair_count = b.zeta * (b.zeta - 1) / 2.0
    inner = (gamma * pair_count) ** (1.0 / (b.dim * (b.k - 1))) * b.rho ** b.n
    term = inner ** ((2.0 * b.k - 2.0) / (2.0 * b.k - 1.0))
    radicand = b.r_m_max ** 2 - term
    if radicand < 0.0:
        return BoundResult(None, vacuous=True, reason="negative radicand")
    return BoundResult(b.r_sum + 2.0 * math.sqrt(radicand))


def _ba_shared_term(b: BoundInputs) -> float:
    """The geometric term shared by both BA bounds (log-space evaluation)."""
    ratio = math.exp(log_double_factorial_ratio(b.n))
    inner = (b.m * ratio + math.sqrt(b.n * b.m ** 2 / 2.0
                                     * math.log(1.0 / b.delta)))
    return (inner / (b.n * unit_ball_volume(b.dim))) ** (1.0 / b.dim)


def ba_bound_unnormalized(b: BoundInputs) -> float:
    """Barabasi-Albert distance bound, affine through the origin in k."""
    if b.steepness <= 0.0:
        raise BoundDomainError("steepness must be > 0")
    ratio = math.exp(log_double_factorial_ratio(b.n))
    arg = 2.0 * (b.n - 2) / (ratio + math.sqrt(b.n * math.log(1.0 / b.delta)) / 4.0) - 1.0
    if arg <= 0.0:
        raise BoundDomainError("log argument <= 0")
    return 2.0 * b.k * (math.log(arg) / b.steepness + _ba_shared_term(b))


def ba_bound_normalized(b: BoundInputs, n_inner: int,
                        branch: str = "principal") -> float:
    """Barabasi-Albert bound after normalization (needs the Lambert W)."""
    if b.steepness <= 0.0:
        raise BoundDomainError("steepness must be > 0")
    if not 2 < n_inner < b.n - 1:
        raise BoundDomainError("n_inner must lie strictly between 2 and n-1")
    pair_count = b.zeta * (b.zeta - 1) / 2.0
    if pair_count <= 0:
        raise BoundDomainError("zeta must be >= 2")
    denom = b.eta_2k - b.max_degree ** (2 * b.k - 2) * math.sqrt(
        b.n * math.log(1.0 / b.delta)) / 4.0
    if denom <= 0.0:
        raise BoundDomainError("walk count too small for the concentration term")
    c_const = (1.0 / pair_count) * b.max_degree ** (2 * b.k - 1) / denom
    r_factor = (b.n - n_inner - 1) / (n_inner - 2)
    w_arg = -r_factor * c_const ** (1.0 / (n_inner - 2))
    if w_arg < -INV_E:
        raise BoundDomainError(f"Lambert W argument {w_arg:.6g} below -1/e")
    w_val = lambert_w(w_arg, branch=branch)
    inner = -w_val / r_factor
    if not 0.0 < inner < 1.0:
        raise BoundDomainError(f"inner Lambert term {inner:.6g} outside (0, 1)")
    log_arg = inner ** (-1.0 / b.k) - 1.0
    if log_arg <= 0.0:
        raise BoundDomainError("log argument <= 0")
    return 2.0 * b.k * (math.log(log_arg) / b.steepness + _ba_shared_term(b))


# ---------------------------------------------------------------------------
# Monte-Carlo validation


@dataclass(frozen=True)
class ViolationReport:
    model: str
    bound: str
    k: int
    delta: float
    trials: int
    eligible: int
    violations: int
    mean_slack: float
    seed: int

    @property
    def violation_fraction(self) -> float:
        return self.violations / self.eligible if self.eligible else float("nan")

    def write_csv(self, stream) -> None:
        stream.write("model,bound,k,delta,trials,eligible,violations,"
                     "violation_fraction,mean_slack,seed\n")
        frac = "" if self.eligible == 0 else repr(self.violation_fraction)
        stream.write(f"{self.model},{self.bound},{self.k},{self.delta},"
                     f"{self.trials},{self.eligible},{self.violations},"
                     f"{frac},{self.mean_slack!r},{self.seed}\n")


def _walk_count_matrix(g: Graph, length: int) -> np.ndarray:
    adj = g.to_scipy().toarray()
    out = np.eye(g.n)
    for _ in range(length):
        out = out @ adj
    return out


def _hop_distances(g: Graph, source: int) -> np.ndarray:
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = [source]
    while frontier:
        nxt = []
        for node in frontier:
            for nb in g.neighbors(node):
                if dist[nb] < 0:
                    dist[nb] = dist[node] + 1
                    nxt.append(int(nb))
        frontier = nxt
    return dist


def _latent_trial(params: LatentModelParams, bound_kind: str, k: int,
                  delta: float, seed: int):
    sample = sample_latent_model(replace(params, seed=seed))
    g = sample.graph
    walks = _walk_count_matrix(g, 2 * k)
    rng = np.random.default_rng(seed + 1)
    iu, iv = np.triu_indices(g.n, k=1)
    eligible = np.nonzero(walks[iu, iv] > 0)[0]
    if eligible.size == 0:
        return None
    pick = int(eligible[rng.integers(0, eligible.size)])
    i, j = int(iu[pick]), int(iv[pick])
    eta = float(walks[i, j])
    # The guarantee asserts the existence of a split index along the
    # witnessing walk.  With uniform radius r a split at position M leaves
    # M - 1 whole-radius hops plus a ball of radius (2k - M) r, so the
    # effective bound is the best value over M in {1, ..., 2k - 1}.
    r = params.radius
    best = None
    for split in range(1, 2 * k):
        common = dict(n=params.n, delta=delta, k=k, dim=params.dim,
                      r_sum=(split - 1) * r, r_m_max=(2 * k - split) * r,
                      eta_2k=eta)
        if bound_kind == "unnormalized":
            result = bound_unnormalized(BoundInputs(**common))
        else:
            from .features import cn_set
            members = cn_set(g, i, j, k, exclude_endpoints=True)
            zeta = int(max((g.degrees[c] for c in members), default=2))
            rho = (0.5) ** (1.0 / (params.dim * max(k - 1, 1)))
            result = bound_normalized(
                BoundInputs(**common, zeta=max(zeta, 2), rho=rho))
        if not result.vacuous and (best is None or result.value > best):
            best = result.value
    if best is None:
        return None
    d_ij = float(sample.distances[i, j])
    return best - d_ij  # slack; negative means violation


def _ba_trial(n: int, m: int, bound_kind: str, k: int, delta: float, seed: int):
    g = sample_ba_graph(n, m, seed=seed)
    walks = _walk_count_matrix(g, 2 * k)
    rng = np.random.default_rng(seed + 1)
    iu, iv = np.triu_indices(g.n, k=1)
    eligible = np.nonzero(walks[iu, iv] > 0)[0]
    if eligible.size == 0:
        return None
    pick = int(eligible[rng.integers(0, eligible.size)])
    i, j = int(iu[pick]), int(iv[pick])
    b = BoundInputs(n=n, delta=delta, k=k, dim=2, m=m, steepness=1.0,
                    eta_2k=float(walks[i, j]),
                    max_degree=int(g.degrees.max()))
    try:
        value = ba_bound_unnormalized(b)
    except BoundDomainError:
        return None
    # hop-count proxy: per-hop share of the bound times the hop distance
    hops = int(_hop_distances(g, i)[j])
    if hops < 0:
        return None
    s_ij = hops * (value / (2.0 * k))
    return value - s_ij


def validate_bound(model: str, params, bound_kind: str, k: int, delta: float,
                   trials: int, seed: int, threads: int = 1) -> ViolationReport:
    """Monte-Carlo check that the stated bound fails at most a delta fraction.

    Each trial samples a graph, picks a random pair with positive 2k-walk
    count, evaluates the bound against the latent distance (latent model) or
    the hop-scaled proxy (BA model), and counts violations among non-vacuous
    cases. Per-trial seeds derive from the run seed; reduction order fixed.
    """
    if trials < 100:
        raise InputError("need at least 100 trials")
    seeds = [seed + 1000 * t for t in range(trials)]
    if model == "latent":
        work = lambda s: _latent_trial(params, bound_kind, k, delta, s)
    elif model == "ba":
        n, m = params
        work = lambda s: _ba_trial(n, m, bound_kind, k, delta, s)
    else:
        raise InputError(f"unknown model {model!r}")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            slacks = list(pool.map(work, seeds))
    else:
        slacks = [work(s) for s in seeds]
    valid = [s for s in slacks if s is not None]
    violations = sum(1 for s in valid if s < 0)
    mean_slack = float(np.mean(valid)) if valid else float("nan")
    return ViolationReport(model=model, bound=bound_kind, k=k, delta=delta,
                           trials=trials, eligible=len(valid),
                           violations=violations, mean_slack=mean_slack,
                           seed=seed)
