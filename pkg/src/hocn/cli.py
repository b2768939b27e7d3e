"""Command-line entry point.

Subcommands cover the whole pipeline: prepare (load and split an edge list),
score (heuristic or structural-feature scores over a split), train (fit the
pair-scoring model), eval (ranking metrics), diagnose (redundancy and
concentration reports), theory (closed-form bounds and their Monte-Carlo
validation), bench (timing sweep with a linear fit).

Outputs are CSV with a commented header carrying version, seed, and the
effective configuration; ``--json`` mirrors the same rows as a JSON array.
Config files are plain key=value lines; explicit flags win. Exit codes:
0 ok, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import time

import numpy as np

from . import __version__
from .diagnostics import coefficient_of_variation, edge_jsd, order_correlation
from .errors import ConfigError, HocnError, InputError
from .features import cn_order_features_all
from .graph import (Graph, PairBatch, load_edge_list, merged_graph,
                    sample_negatives, split_edges)
from .metrics import evaluate
from .normalize import (apply_normalization, exact_walk_participation,
                        running_counts, update_running_participation)
from .ortho import (RunningState, apply_polynomial_filter,
                    degree_filter_argument, full_graph_orthogonalize,
                    gram_schmidt_batch, polynomial_weights)
from .scoring import (FeatureConfig, ScoreModel, TrainConfig,
                      default_node_features, heuristic_score,
                      heuristic_scores, model_scores, propagate_features,
                      train_model)
from .theory import (BoundInputs, LatentModelParams, ba_bound_normalized,
                     ba_bound_unnormalized, bound_normalized,
                     bound_unnormalized, sample_ba_graph, validate_bound)

DEFAULTS = {
    "seed": 0,
    "k_max": 2,
    "variant": "ocn",
    "exclude_endpoints": False,
    "use_valid_as_input": False,
    "threads": 1,
    "json": False,
    "format": "tsv",
    "ratios": "0.7,0.1,0.2",
}

_BOOL_KEYS = ("exclude_endpoints", "use_valid_as_input", "json")


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def load_config(path: str) -> dict:
    """key=value lines; '#' starts a comment; keys use flag spelling."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = body.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from the config file, then built-in defaults."""
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    for key, raw in cfg.items():
        if not hasattr(args, key):
            raise ConfigError(f"unknown config key: {key}")
        if getattr(args, key) is None:
            value = _parse_bool(raw) if key in _BOOL_KEYS else raw
            setattr(args, key, value)
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    for key in ("seed", "k_max", "threads"):
        if hasattr(args, key):
            setattr(args, key, int(getattr(args, key)))
    for key in _BOOL_KEYS:
        if hasattr(args, key) and not isinstance(getattr(args, key), bool):
            setattr(args, key, _parse_bool(getattr(args, key)))
    if getattr(args, "variant", "ocn") not in ("ocn", "ocnp"):
        raise ConfigError(f"variant must be ocn or ocnp, got {args.variant!r}")
    return args


def _effective_config(args: argparse.Namespace) -> dict:
    skip = {"func", "command", "config", "output", "json"}
    return {k: v for k, v in sorted(vars(args).items())
            if k not in skip and v is not None and not callable(v)}


def emit(args, fieldnames, rows, stream=None) -> None:
    """Write rows as commented-header CSV, or as JSON with --json."""
    close = False
    if stream is None:
        if getattr(args, "output", None):
            stream = open(args.output, "w")
            close = True
        else:
            stream = sys.stdout
    try:
        if getattr(args, "json", False):
            payload = [dict(zip(fieldnames, row)) for row in rows]
            json.dump({"version": __version__, "config": _effective_config(args),
                       "rows": payload}, stream, indent=1, default=str)
            stream.write("\n")
            return
        stream.write(f"# version={__version__}\n")
        stream.write(f"# seed={getattr(args, 'seed', 0)}\n")
        pairs = " ".join(f"{k}={v}" for k, v in _effective_config(args).items())
        stream.write(f"# config: {pairs}\n")
        stream.write(",".join(fieldnames) + "\n")
        for row in rows:
            stream.write(",".join("" if v is None else str(v) for v in row) + "\n")
    finally:
        if close:
            stream.close()


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in str(text).split(",")]
    if len(parts) != 3:
        raise InputError(f"expected three ratios, got {text!r}")
    return tuple(parts)


def _load_split(args):
    with open(args.input) as fh:
        g, _report = load_edge_list(fh, format=args.format)
    return g, split_edges(g, _parse_ratios(args.ratios), args.seed)


# ---------------------------------------------------------------------------
# subcommands


def cmd_prepare(args) -> int:
    g, split = _load_split(args)
    rows = []
    for name in ("train", "valid", "test"):
        for u, v in getattr(split, name).pairs:
            rows.append((int(u), int(v), name))
    emit(args, ("u", "v", "split"), rows)
    return 0


def _structural_scores(g: Graph, pairs: np.ndarray, args) -> np.ndarray:
    """Row sums of per-order combined features after the chosen transform."""
    cfg = FeatureConfig(k_max=args.k_max, variant=args.variant,
                        exclude_endpoints=args.exclude_endpoints,
                        seed=args.seed)
    state = RunningState()
    scores = np.zeros(pairs.shape[0])
    poly_x = degree_filter_argument(g) if args.variant == "ocnp" else None
    for start in range(0, pairs.shape[0], cfg.batch_size):
        chunk = PairBatch(pairs[start:start + cfg.batch_size])
        feats = cn_order_features_all(g, chunk, cfg.k_max,
                                      exclude_endpoints=cfg.exclude_endpoints)
        normalized = []
        for f in feats:
            state = update_running_participation(state, f)
            normalized.append(apply_normalization(f, running_counts(state, f.order)))
        if args.variant == "ocnp":
            basis = [apply_polynomial_filter(
                f, polynomial_weights(cfg.poly_basis, f.order, poly_x))
                for f in normalized]
            mats = [b.combined for b in basis]
        else:
            basis = gram_schmidt_batch(normalized, state, training=True)
            mats = [basis.matrix(k) for k in range(1, cfg.k_max + 1)]
        rowsum = sum(np.asarray(np.abs(m).sum(axis=1)).ravel() for m in mats)
        scores[start:start + len(chunk)] = rowsum
    return scores


def cmd_score(args) -> int:
    g, split = _load_split(args)
    base = merged_graph(split, args.use_valid_as_input)
    batch = getattr(split, args.split)
    if args.kind in ("cn", "aa", "ra"):
        scores = heuristic_scores(base, batch.pairs, args.kind)
    elif args.kind == "normalized-cn":
        scores = np.array([heuristic_score(base, p, "normalized_cn",
                                           order=args.k_max)
                           for p in batch.pairs])
    elif args.kind in ("ocn", "ocnp"):
        args.variant = args.kind
        scores = _structural_scores(base, batch.pairs, args)
    else:
        raise InputError(f"unknown score kind {args.kind!r}")
    rows = [(int(u), int(v), repr(float(s)))
            for (u, v), s in zip(batch.pairs, scores)]
    emit(args, ("u", "v", "score"), rows)
    return 0


def cmd_train(args) -> int:
    g, split = _load_split(args)
    fc = FeatureConfig(k_max=args.k_max, variant=args.variant,
                       exclude_endpoints=args.exclude_endpoints,
                       seed=args.seed)
    tc = TrainConfig(features=fc, learning_rate=float(args.learning_rate),
                     epochs=int(args.epochs), seed=args.seed,
                     use_valid_as_input=args.use_valid_as_input)
    result = train_model(split, tc)
    with open(args.model_out, "w") as fh:
        result.model.save(fh)
    if args.state_out:
        with open(args.state_out, "w") as fh:
            result.state.save(fh)
    rows = [(i, repr(loss)) for i, loss in enumerate(result.losses)]
    emit(args, ("step", "loss"), rows)
    return 0


def cmd_eval(args) -> int:
    g, split = _load_split(args)
    base = merged_graph(split, args.use_valid_as_input)
    batch = getattr(split, args.split)
    exclude = [tuple(p) for p in np.concatenate(
        [split.train.pairs, split.valid.pairs, split.test.pairs], axis=0)]
    n_neg = int(args.negatives) if args.negatives else max(len(batch), 200)
    negatives = sample_negatives(base, n_neg, args.seed + 7, exclude=exclude)
    ks = tuple(int(k) for k in str(args.ks).split(","))
    if args.kind in ("cn", "aa", "ra"):
        score_fn = lambda pairs: heuristic_scores(base, pairs, args.kind)
    elif args.kind == "model":
        if not args.model:
            raise InputError("--model is required with --kind model")
        with open(args.model) as fh:
            model = ScoreModel.load(fh)
        if args.state:
            with open(args.state) as fh:
                state = RunningState.load(fh)
        else:
            state = RunningState()
        fc = FeatureConfig(k_max=model.k_max, depth=model.depth,
                           variant=model.variant,
                           exclude_endpoints=args.exclude_endpoints,
                           seed=args.seed)
        x = default_node_features(base, dim=fc.feature_dim, seed=fc.seed)
        h = propagate_features(base, x, fc.depth)
        training = args.state is None
        score_fn = lambda pairs: model_scores(
            base, pairs, model, state, h,
            fc) if not training else _model_scores_training(
            base, pairs, model, state, h, fc)
    else:
        raise InputError(f"unknown eval kind {args.kind!r}")
    report = evaluate(score_fn, batch, negatives, ks=ks, seed=args.seed)
    rows = [("hits", k, repr(report.hits[k]), report.n_pos, report.n_neg)
            for k in sorted(report.hits)]
    rows.append(("mrr", None, repr(report.mrr), report.n_pos, report.n_neg))
    emit(args, ("metric", "K", "value", "n_pos", "n_neg"), rows)
    return 0


def _model_scores_training(base, pairs, model, state, h, fc):
    # no saved running statistics: let them accumulate over the scored pairs
    from .scoring import pair_features, _logits
    m, q = pair_features(base, pairs, h, fc, state, training=True)
    return _logits(model.alpha, model.head_w, model.head_b, m, q)


def _diagnose_graph(args) -> Graph:
    if args.input:
        with open(args.input) as fh:
            g, _ = load_edge_list(fh, format=args.format)
        return g
    n, m = (int(x) for x in str(args.synthetic).split(","))
    return sample_ba_graph(n, m, seed=args.seed)


def cmd_diagnose(args) -> int:
    g = _diagnose_graph(args)
    rng = np.random.default_rng(args.seed)
    pairs = []
    seen = set()
    while len(pairs) < int(args.pairs):
        u, v = (int(x) for x in rng.integers(0, g.n, size=2))
        if u == v or (u, v) in seen or (v, u) in seen:
            continue
        seen.add((u, v))
        pairs.append((u, v))
    batch = PairBatch(np.array(pairs))
    feats = cn_order_features_all(g, batch, args.k_max,
                                  exclude_endpoints=args.exclude_endpoints)
    raw = [np.asarray(f.combined.toarray() if hasattr(f.combined, "toarray")
                      else f.combined) for f in feats]
    normalized = [apply_normalization(f, exact_walk_participation(
        g, f.order, exclude_endpoints=args.exclude_endpoints)) for f in feats]
    state = RunningState()
    basis = gram_schmidt_batch(normalized, state, training=True)
    ortho = [np.asarray(basis.matrix(k).toarray()
                        if hasattr(basis.matrix(k), "toarray")
                        else basis.matrix(k)) for k in range(1, args.k_max + 1)]
    norm_dense = [np.asarray(f.combined.toarray()
                             if hasattr(f.combined, "toarray")
                             else f.combined) for f in normalized]
    corr_raw = order_correlation(raw)
    corr_ortho = order_correlation(ortho)
    jsd = edge_jsd(raw[0], raw[-1])
    jsd_after = edge_jsd(ortho[0], ortho[-1])
    rows = []
    for a in range(args.k_max):
        for b in range(args.k_max):
            rows.append(("corr_raw", a + 1, b + 1, repr(float(corr_raw[a, b]))))
            rows.append(("corr_ortho", a + 1, b + 1, repr(float(corr_ortho[a, b]))))
    for k in range(1, args.k_max + 1):
        rows.append(("cv_raw", k, None, repr(coefficient_of_variation(raw[k - 1]))))
        rows.append(("cv_normalized", k, None,
                     repr(coefficient_of_variation(norm_dense[k - 1]))))
    rows.append(("jsd_mean_raw", None, None, repr(float(np.nanmean(jsd)))))
    rows.append(("jsd_mean_ortho", None, None, repr(float(np.nanmean(jsd_after)))))
    emit(args, ("quantity", "a", "b", "value"), rows)
    return 0


def cmd_theory(args) -> int:
    if args.mode == "grid":
        rows = []
        for k in range(2, int(args.k_grid_max) + 1):
            if args.model == "latent":
                b = BoundInputs(n=int(args.n), delta=float(args.delta), k=k,
                                dim=int(args.dim), r_sum=float(args.r_sum),
                                r_m_max=float(args.r_m_max),
                                eta_2k=float(args.eta), zeta=int(args.zeta),
                                rho=float(args.rho))
                u = bound_unnormalized(b)
                v = bound_normalized(b)
                rows.append((k, None if u.vacuous else repr(u.value),
                             None if v.vacuous else repr(v.value)))
            else:
                b = BoundInputs(n=int(args.n), delta=float(args.delta), k=k,
                                dim=int(args.dim), m=int(args.m),
                                steepness=float(args.steepness),
                                zeta=int(args.zeta), eta_2k=float(args.eta),
                                max_degree=int(args.max_degree))
                rows.append((k, repr(ba_bound_unnormalized(b)),
                             repr(ba_bound_normalized(b, int(args.n_inner)))))
        emit(args, ("k", "unnormalized", "normalized"), rows)
        return 0
    if args.model == "latent":
        params = LatentModelParams(n=int(args.n), dim=int(args.dim),
                                   radius=float(args.radius), seed=args.seed)
    else:
        params = (int(args.n), int(args.m))
    report = validate_bound(args.model, params, args.bound, int(args.k),
                            float(args.delta), int(args.trials), args.seed,
                            threads=args.threads)
    rows = [(report.model, report.bound, report.k, report.delta,
             report.trials, report.eligible, report.violations,
             repr(report.violation_fraction), repr(report.mean_slack))]
    emit(args, ("model", "bound", "k", "delta", "trials", "eligible",
                "violations", "violation_fraction", "mean_slack"), rows)
    return 0


def _r_squared(t: np.ndarray, y: np.ndarray, fit: np.ndarray) -> float:
    pred = fit[0] * t + fit[1]
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in str(args.batch_sizes).split(",")]
    g = sample_ba_graph(int(args.nodes), 3, seed=args.seed)
    rng = np.random.default_rng(args.seed + 1)

    def batch(size):
        u = rng.integers(0, g.n, size=size)
        v = (u + 1 + rng.integers(0, g.n - 1, size=size)) % g.n
        return PairBatch(np.stack([u, v], axis=1))

    def run_once(pb, k_max, with_ortho):
        state = RunningState()
        feats = cn_order_features_all(g, pb, k_max,
                                      exclude_endpoints=args.exclude_endpoints)
        normalized = []
        for f in feats:
            state = update_running_participation(state, f)
            normalized.append(apply_normalization(f, running_counts(state, f.order)))
        if with_ortho:
            gram_schmidt_batch(normalized, state, training=True)

    rows = []
    times = []
    for size in sizes:
        pb = batch(size)
        run_once(batch(min(size, 256)), args.k_max, True)  # warm caches
        start = time.perf_counter()
        run_once(pb, args.k_max, True)
        elapsed = time.perf_counter() - start
        times.append(elapsed)
        rows.append(("sweep", size, args.k_max, repr(elapsed)))
    t = np.array(sizes, dtype=np.float64)
    y = np.array(times)
    fit = np.polyfit(t, y, 1)
    rows.append(("fit_C", None, args.k_max, repr(float(fit[0]))))
    rows.append(("fit_B", None, args.k_max, repr(float(fit[1]))))
    rows.append(("fit_r2", None, args.k_max, repr(_r_squared(t, y, fit))))
    probe = batch(int(args.probe_size))
    for k in range(1, args.k_max + 1):
        start = time.perf_counter()
        run_once(probe, k, False)
        rows.append(("per_k", int(args.probe_size), k,
                     repr(time.perf_counter() - start)))
    start = time.perf_counter()
    run_once(probe, args.k_max, False)
    base_t = time.perf_counter() - start
    start = time.perf_counter()
    run_once(probe, args.k_max, True)
    rows.append(("ortho_overhead", int(args.probe_size), args.k_max,
                 repr(max(time.perf_counter() - start - base_t, 0.0))))
    emit(args, ("section", "t", "k", "seconds"), rows)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None)
    common.add_argument("--k-max", dest="k_max", type=int, default=None)
    common.add_argument("--variant", choices=("ocn", "ocnp"), default=None)
    common.add_argument("--exclude-endpoints", dest="exclude_endpoints",
                        action="store_const", const=True, default=None)
    common.add_argument("--use-valid-as-input", dest="use_valid_as_input",
                        action="store_const", const=True, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--json", action="store_const", const=True, default=None)
    common.add_argument("--output", default=None)

    parser = argparse.ArgumentParser(prog="hocn")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", parents=[common])
    p.add_argument("--input", required=True)
    p.add_argument("--format", default=None)
    p.add_argument("--ratios", default=None)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("score", parents=[common])
    p.add_argument("--input", required=True)
    p.add_argument("--format", default=None)
    p.add_argument("--ratios", default=None)
    p.add_argument("--split", choices=("train", "valid", "test"), default="test")
    p.add_argument("--kind", default="cn",
                   choices=("cn", "aa", "ra", "normalized-cn", "ocn", "ocnp"))
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("train", parents=[common])
    p.add_argument("--input", required=True)
    p.add_argument("--format", default=None)
    p.add_argument("--ratios", default=None)
    p.add_argument("--epochs", type=int, default=4)
    p.add_argument("--learning-rate", dest="learning_rate", type=float,
                   default=0.5)
    p.add_argument("--model-out", dest="model_out", required=True)
    p.add_argument("--state-out", dest="state_out", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common])
    p.add_argument("--input", required=True)
    p.add_argument("--format", default=None)
    p.add_argument("--ratios", default=None)
    p.add_argument("--split", choices=("train", "valid", "test"), default="test")
    p.add_argument("--kind", default="cn", choices=("cn", "aa", "ra", "model"))
    p.add_argument("--model", default=None)
    p.add_argument("--state", default=None)
    p.add_argument("--negatives", type=int, default=None)
    p.add_argument("--ks", default="20,50,100")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("diagnose", parents=[common])
    p.add_argument("--input", default=None)
    p.add_argument("--format", default=None)
    p.add_argument("--synthetic", default="200,3",
                   help="n,m for a preferential-attachment graph")
    p.add_argument("--pairs", type=int, default=256)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("theory", parents=[common])
    p.add_argument("--mode", choices=("validate", "grid"), default="validate")
    p.add_argument("--model", choices=("latent", "ba"), default="latent")
    p.add_argument("--bound", choices=("unnormalized", "normalized"),
                   default="unnormalized")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--k-grid-max", dest="k_grid_max", type=int, default=6)
    p.add_argument("--eta", type=float, default=0.3)
    p.add_argument("--zeta", type=int, default=2)
    p.add_argument("--rho", type=float, default=0.98)
    p.add_argument("--r-sum", dest="r_sum", type=float, default=0.1)
    p.add_argument("--r-m-max", dest="r_m_max", type=float, default=5.0)
    p.add_argument("--steepness", type=float, default=1.0)
    p.add_argument("--max-degree", dest="max_degree", type=int, default=1)
    p.add_argument("--n-inner", dest="n_inner", type=int, default=4)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("bench", parents=[common])
    p.add_argument("--batch-sizes", dest="batch_sizes",
                   default="1024,4096,16384,65536")
    p.add_argument("--nodes", type=int, default=100000)
    p.add_argument("--probe-size", dest="probe_size", type=int, default=1024)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve(args)
        return args.func(args)
    except HocnError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
