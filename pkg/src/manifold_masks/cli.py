"""Command-line harness: dataset synthesis, mask selection, evaluation
sweeps, and leave-one-out extension experiments."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import data as data_mod
from .data import DataMatrix, knn_graph, load_dataset, synth_dataset
from .embeddings import (
    Embedding,
    GeodesicDistances,
    LleWeights,
    classical_mds,
    geodesics,
    lle_embed,
    lle_weights,
)
from .errors import (
    CapacityError,
    ManifoldMasksError,
    NumericalError,
    ParameterError,
)
from .masks import (
    Mask,
    apply_mask,
    exact_mask_global,
    exact_mask_local,
    load_mask,
    maps_global,
    maps_local,
    mask_to_pgm,
    pcoa,
    random_mask,
    save_mask,
)
from .metrics import (
    EvalReport,
    append_results,
    embedding_error,
    neighbor_preservation,
    residual_variance,
)
from .oose import leave_one_out

SELECTORS = ("maps_global", "maps_local", "pcoa", "random", "exact_global", "exact_local")
NESTED_SELECTORS = ("maps_global", "maps_local", "pcoa", "random")


@dataclass
class RunConfig:
    """Merged configuration for one harness invocation."""

    data: str | None = None
    meta: str | None = None
    format: str = "csv"
    synth: str | None = None  # e.g. "swiss_roll:n=500,seed=7" or "translating_blob:n=200,g=16,seed=1"
    algorithms: tuple[str, ...] = ("maps_global",)
    sizes: tuple[int, ...] = ()
    k: int = 10
    k_lle: int = 10
    l: int = 2
    p: str = "L1"
    reg: float = 1e-3
    seed: int = 0
    trials: int = 100
    np_k: int = 20
    methods: tuple[str, ...] = ("isomap",)
    out_dir: str = "."
    results: str | None = None
    largest_component: bool = False
    exact_folds: bool = False

    def __post_init__(self):
        if self.sizes and list(self.sizes) != sorted(set(self.sizes)):
            raise ParameterError(f"mask sizes must be strictly increasing, got {self.sizes}")


def _parse_config_file(path) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(key: str, value):
    """Coerce a config-file string to the RunConfig field type."""
    if not isinstance(value, str):
        return value
    if key in ("sizes",):
        return tuple(int(v) for v in value.split(",") if v)
    if key in ("algorithms", "methods"):
        return tuple(v.strip() for v in value.split(",") if v.strip())
    if key in ("k", "k_lle", "l", "seed", "trials", "np_k"):
        return int(value)
    if key == "reg":
        return float(value)
    if key in ("largest_component", "exact_folds"):
        return value.lower() in ("1", "true", "yes", "on")
    return value


def build_config(args: argparse.Namespace) -> RunConfig:
    """Config-file values overridden by explicit command-line flags."""
    merged = {}
    if getattr(args, "config", None):
        for key, value in _parse_config_file(args.config).items():
            if key not in RunConfig.__dataclass_fields__:
                raise ParameterError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, value)
    for key in RunConfig.__dataclass_fields__:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = _coerce(key, flag)
    return RunConfig(**merged)


def _parse_synth_spec(spec: str) -> tuple[str, dict]:
    kind, _, rest = spec.partition(":")
    options = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            if not value:
                raise ParameterError(f"bad synth option {item!r} in {spec!r}")
            options[key.strip()] = float(value) if "." in value else int(value)
    return kind, options


def load_input(cfg: RunConfig) -> tuple[DataMatrix, str]:
    """Resolve the dataset source to (data, dataset id)."""
    if cfg.synth:
        kind, options = _parse_synth_spec(cfg.synth)
        n = int(options.pop("n", 200))
        seed = int(options.pop("seed", cfg.seed))
        return synth_dataset(kind, n, seed, **options), cfg.synth
    if not cfg.data:
        raise ParameterError("no dataset: provide data= or synth=")
    X = load_dataset(cfg.data, format=cfg.format, meta=cfg.meta)
    return X, os.path.basename(cfg.data)


def select_mask(cfg: RunConfig, algorithm: str, X: DataMatrix, m: int) -> Mask:
    """Run one selector at size m."""
    if algorithm == "pcoa":
        return pcoa(X, m)
    if algorithm == "random":
        return random_mask(X.d, m, cfg.seed)
    G = knn_graph(X, cfg.k)
    if algorithm == "maps_global":
        from .secants import build_secants

        return maps_global(build_secants(X, G), m, cfg.p)
    if algorithm == "maps_local":
        from .secants import build_clique_array

        return maps_local(build_clique_array(X, G), m)
    if algorithm == "exact_global":
        from .secants import build_secants

        return exact_mask_global(build_secants(X, G), m, cfg.p)[0]
    if algorithm == "exact_local":
        from .secants import build_clique_array

        return exact_mask_local(build_clique_array(X, G), m)[0]
    raise ParameterError(f"unknown algorithm {algorithm!r}; choose from {SELECTORS}")


def cmd_synth(cfg: RunConfig, args) -> int:
    kind, options = _parse_synth_spec(cfg.synth or args.kind)
    n = int(options.pop("n", args.n or 200))
    seed = int(options.pop("seed", cfg.seed))
    X = synth_dataset(kind, n, seed, **options)
    base = args.out
    table = X.points if X.params is None else np.hstack([X.points, X.params])
    with open(base + ".csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in table:
            writer.writerow([f"{v:.17g}" for v in row])
    with open(base + ".meta", "w", encoding="utf-8") as fh:
        if X.image_shape is not None:
            fh.write(f"image_shape=[{X.image_shape[0]}, {X.image_shape[1]}]\n")
        if X.params is not None:
            fh.write(f"param_cols=[{X.d}, {X.d + X.params.shape[1]}]\n")
    print(f"wrote {base}.csv ({X.n} x {X.d} points) and {base}.meta")
    return 0


def cmd_mask(cfg: RunConfig, args) -> int:
    X, _ = load_input(cfg)
    if not cfg.sizes:
        raise ParameterError("no mask sizes requested")
    os.makedirs(cfg.out_dir, exist_ok=True)
    algorithm = cfg.algorithms[0]
    if algorithm in NESTED_SELECTORS:
        # one run at max size; smaller masks are its prefixes
        full = select_mask(cfg, algorithm, X, max(cfg.sizes))
        masks = {m: full.prefix(m) for m in cfg.sizes}
    else:
        masks = {m: select_mask(cfg, algorithm, X, m) for m in cfg.sizes}
    for m, mask in masks.items():
        path = os.path.join(cfg.out_dir, f"mask_{m}.json")
        save_mask(path, mask)
        print(f"wrote {path}")
        if X.image_shape is not None:
            pgm = os.path.join(cfg.out_dir, f"mask_{m}.pgm")
            mask_to_pgm(pgm, mask, X.image_shape)
            print(f"wrote {pgm}")
    return 0


def _data_hash(X: DataMatrix, *params) -> str:
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(X.points).tobytes())
    digest.update(repr(params).encode())
    return digest.hexdigest()[:16]


def full_references(
    cfg: RunConfig, X: DataMatrix, cache_dir: str | None
) -> tuple[GeodesicDistances, LleWeights]:
    """Full-data geodesics and LLE weights, cached by content hash."""
    key = _data_hash(X, cfg.k, cfg.k_lle, cfg.reg)
    cache_path = os.path.join(cache_dir, f"refs_{key}.npz") if cache_dir else None
    if cache_path and os.path.exists(cache_path):
        payload = np.load(cache_path)
        D = GeodesicDistances(D=payload["D"], connected=bool(payload["connected"]))
        W = LleWeights(
            W=sp.csr_matrix(
                (payload["w_data"], payload["w_indices"], payload["w_indptr"]),
                shape=(X.n, X.n),
            ),
            k=cfg.k_lle,
        )
        return D, W
    D = geodesics(X, knn_graph(X, cfg.k))
    W = lle_weights(X, knn_graph(X, cfg.k_lle), cfg.reg)
    if cache_path:
        os.makedirs(cache_dir, exist_ok=True)
        np.savez_compressed(
            cache_path,
            D=D.D,
            connected=D.connected,
            w_data=W.W.data,
            w_indices=W.W.indices,
            w_indptr=W.W.indptr,
        )
    return D, W


def _masked_metrics(
    cfg: RunConfig,
    X: DataMatrix,
    mask: Mask,
    D_full: GeodesicDistances,
    W_full: LleWeights,
) -> dict[str, float]:
    Xm = apply_mask(X, mask)
    D_m = geodesics(Xm, knn_graph(Xm, cfg.k))
    Y_iso = classical_mds(D_m, cfg.l)
    Y_lle = lle_embed(lle_weights(Xm, knn_graph(Xm, cfg.k_lle), cfg.reg), cfg.l)
    return {
        "residual_variance": residual_variance(D_full, Y_iso),
        "neighbor_preservation": neighbor_preservation(X, Y_iso, cfg.np_k),
        "embedding_error": embedding_error(W_full, Y_lle),
    }


def cmd_evaluate(cfg: RunConfig, args) -> int:
    X, dataset_id = load_input(cfg)
    if not cfg.sizes:
        raise ParameterError("no mask sizes requested")
    os.makedirs(cfg.out_dir, exist_ok=True)
    results = cfg.results or os.path.join(cfg.out_dir, "results.csv")
    D_full, W_full = full_references(cfg, X, os.path.join(cfg.out_dir, ".cache"))
    base_ctx = {"dataset": dataset_id, "k": cfg.k, "l": cfg.l, "seed": cfg.seed}

    for algorithm in cfg.algorithms:
        if algorithm == "random":
            for m in cfg.sizes:
                per_metric: dict[str, list[float]] = {}
                for trial in range(cfg.trials):
                    mask = random_mask(X.d, m, cfg.seed + trial)
                    for name, value in _masked_metrics(cfg, X, mask, D_full, W_full).items():
                        per_metric.setdefault(name, []).append(value)
                reports = [
                    EvalReport(
                        metric=name,
                        value=float(np.mean(values)),
                        context={
                            **base_ctx,
                            "algorithm": algorithm,
                            "m": m,
                            "trials": cfg.trials,
                            "stddev": float(np.std(values)),
                        },
                    )
                    for name, values in per_metric.items()
                ]
                append_results(results, reports)
            continue
        if algorithm in NESTED_SELECTORS:
            full = select_mask(cfg, algorithm, X, max(cfg.sizes))
            masks = {m: full.prefix(m) for m in cfg.sizes}
        else:
            masks = {m: select_mask(cfg, algorithm, X, m) for m in cfg.sizes}
        for m in cfg.sizes:
            reports = [
                EvalReport(
                    metric=name,
                    value=value,
                    context={**base_ctx, "algorithm": algorithm, "m": m, "trials": 1},
                )
                for name, value in _masked_metrics(cfg, X, masks[m], D_full, W_full).items()
            ]
            append_results(results, reports)
    print(f"wrote {results}")
    return 0


def cmd_oose(cfg: RunConfig, args) -> int:
    X, dataset_id = load_input(cfg)
    if not cfg.sizes:
        raise ParameterError("no mask sizes requested")
    os.makedirs(cfg.out_dir, exist_ok=True)
    results = cfg.results or os.path.join(cfg.out_dir, "oose_results.csv")
    base_ctx = {"dataset": dataset_id, "seed": cfg.seed}

    for algorithm in cfg.algorithms:
        for m in cfg.sizes:
            for method in cfg.methods:
                if algorithm == "random":
                    values = []
                    for trial in range(cfg.trials):
                        mask = random_mask(X.d, m, cfg.seed + trial)
                        rep = leave_one_out(
                            X, mask, method, cfg.k, cfg.l, cfg.reg, cfg.exact_folds
                        )
                        values.append(rep.value)
                    report = EvalReport(
                        metric=rep.metric,
                        value=float(np.mean(values)),
                        context={
                            **base_ctx,
                            **rep.context,
                            "algorithm": algorithm,
                            "trials": cfg.trials,
                            "stddev": float(np.std(values)),
                        },
                    )
                else:
                    mask = select_mask(cfg, algorithm, X, m)
                    rep = leave_one_out(
                        X, mask, method, cfg.k, cfg.l, cfg.reg, cfg.exact_folds
                    )
                    report = EvalReport(
                        metric=rep.metric,
                        value=rep.value,
                        context={
                            **base_ctx,
                            **rep.context,
                            "algorithm": algorithm,
                            "trials": 1,
                        },
                    )
                append_results(results, [report])
    print(f"wrote {results}")
    return 0


def cmd_render_mask(cfg: RunConfig, args) -> int:
    mask = load_mask(args.mask)
    h, w = (int(v) for v in args.image_shape.split(","))
    mask_to_pgm(args.out, mask, (h, w))
    print(f"wrote {args.out}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--data", help="dataset CSV or binary path")
    parser.add_argument("--meta", help="sidecar metadata path")
    parser.add_argument("--format", choices=["csv", "f64le-binary"])
    parser.add_argument("--synth", help="synthetic spec, e.g. translating_blob:n=200,g=16,seed=1")
    parser.add_argument("--algorithms", help="comma-separated selector names")
    parser.add_argument("--sizes", help="comma-separated mask sizes, strictly increasing")
    parser.add_argument("--k", type=int, help="neighborhood size for the Isomap graph")
    parser.add_argument("--k-lle", dest="k_lle", type=int, help="neighborhood size for LLE")
    parser.add_argument("--l", type=int, help="embedding dimension")
    parser.add_argument("--p", choices=["L1", "Linf"], help="norm for the global selector")
    parser.add_argument("--reg", type=float, help="LLE regularization")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int, help="random-mask trial count")
    parser.add_argument("--np-k", dest="np_k", type=int, help="neighbor-preservation k")
    parser.add_argument("--methods", help="comma-separated OoSE methods (isomap,lle,gaze)")
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--results", help="results CSV path")
    parser.add_argument(
        "--largest-component", dest="largest_component", action="store_const", const=True
    )
    parser.add_argument(
        "--exact-folds", dest="exact_folds", action="store_const", const=True
    )


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="manifold-masks",
        description="Select and evaluate structure-preserving pixel masks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    _add_common(p_synth)
    p_synth.add_argument("--kind", help="swiss_roll or translating_blob (or use --synth)")
    p_synth.add_argument("--n", type=int)
    p_synth.add_argument("--out", required=True, help="output basename (.csv/.meta)")
    p_synth.set_defaults(handler=cmd_synth)

    p_mask = sub.add_parser("mask", help="select masks and write JSON/PGM files")
    _add_common(p_mask)
    p_mask.set_defaults(handler=cmd_mask)

    p_eval = sub.add_parser("evaluate", help="score masks with Isomap/LLE metrics")
    _add_common(p_eval)
    p_eval.set_defaults(handler=cmd_evaluate)

    p_oose = sub.add_parser("oose", help="leave-one-out out-of-sample evaluation")
    _add_common(p_oose)
    p_oose.set_defaults(handler=cmd_oose)

    p_render = sub.add_parser("render-mask", help="render a mask JSON as a PGM raster")
    _add_common(p_render)
    p_render.add_argument("--mask", required=True)
    p_render.add_argument("--image-shape", dest="image_shape", required=True, help="h,w")
    p_render.add_argument("--out", required=True)
    p_render.set_defaults(handler=cmd_render_mask)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return args.handler(cfg, args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ManifoldMasksError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
