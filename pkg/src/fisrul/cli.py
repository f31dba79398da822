"""Command-line orchestration: features, train, predict, evaluate, benchmark.

Diagnostics (progress, timings, warnings) go to stderr; results go to the
output files and stdout, so reruns with identical inputs produce identical
artifacts.  Configuration may come from a JSON file (--config); explicit
command-line flags override file values, and the effective configuration is
embedded in the model provenance.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .clustering import ClusterConfig, concat_tables, subtractive_cluster
from .datasets import iter_ims, iter_phm, synth_bearing
from .errors import ConfigError, LoadError
from .features import (
    FeatureParams,
    FeatureVector,
    extract_features,
    normalize_feature_names,
    read_feature_csv,
    write_feature_csv,
)
from .fis import identify_baseline, identify_weighted, load_model, predict_table, save_model
from .rul import evaluate_model, rul_from_ratio, smooth_rul, write_curves_csv, write_summary_csv

CONFIG_SCHEMA_VERSION = 1


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    version = cfg.get("version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"unsupported config version: {version}")
    return cfg


def _effective_cluster_config(args, cfg: dict) -> ClusterConfig:
    section = cfg.get("cluster", {})
    ra = args.ra if args.ra is not None else section.get("ra", 0.5)
    rb = args.rb if args.rb is not None else section.get("rb")
    return ClusterConfig(
        ra=ra,
        rb=rb,
        eps_accept=section.get("eps_accept", 0.5),
        eps_reject=section.get("eps_reject", 0.15),
    )


def _effective_feature_params(cfg: dict) -> FeatureParams:
    section = dict(cfg.get("features", {}))
    known = set(FeatureParams.__dataclass_fields__)
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown feature parameter(s): {sorted(unknown)}")
    if "lle_fit_range" in section and section["lle_fit_range"] is not None:
        section["lle_fit_range"] = tuple(section["lle_fit_range"])
    return FeatureParams(**section)


def _sg_settings(args, cfg: dict) -> tuple[int, int]:
    section = cfg.get("filter", {})
    order = section.get("sg_order", 2)
    frame = args.sg_frame if getattr(args, "sg_frame", None) is not None \
        else section.get("sg_frame", 61)
    return order, frame


def _provenance(datasets, cluster_config: ClusterConfig, extra: dict | None = None) -> dict:
    config = {
        "cluster": {
            "ra": cluster_config.ra,
            "rb": cluster_config.rb,
            "eps_accept": cluster_config.eps_accept,
            "eps_reject": cluster_config.eps_reject,
        },
    }
    if extra:
        config.update(extra)
    digest = hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()).hexdigest()[:12]
    return {"datasets": [str(d) for d in datasets],
            "config": config, "config_hash": digest}


def _read_tables(paths):
    tables = {}
    names = None
    for path in paths:
        table = read_feature_csv(path)
        if names is None:
            names = table.feature_names
        elif table.feature_names != names:
            raise ConfigError(
                f"{path}: feature set {table.feature_names} does not match "
                f"{names} from the first file")
        key = Path(path).stem
        if key in tables:  # same stem from different directories
            key = str(path)
        tables[key] = table
    return tables


def cmd_features(args) -> int:
    start = time.perf_counter()
    names = normalize_feature_names(args.features.split(","))
    cfg = _load_config(args.config)
    params = _effective_feature_params(cfg)
    if args.format == "csv":
        # column subsetting of an existing feature CSV
        table = read_feature_csv(args.input)
        missing = [n for n in names if n not in table.feature_names]
        if missing:
            raise ConfigError(
                f"{args.input}: feature(s) {missing} not present in "
                f"{table.feature_names}")
        columns = [table.feature_names.index(n) for n in names]
        vectors = [
            FeatureVector(table.features[k, columns], float(table.taus[k]),
                          None if table.rho is None else float(table.rho[k]))
            for k in range(table.n_rows)
        ]
    else:
        if args.format == "phm":
            windows = iter_phm(args.input)
        else:
            windows = iter_ims(args.input, args.channel)
        vectors = extract_features(windows, names, params,
                                   labeled=not args.unlabeled, n_jobs=args.jobs)
    write_feature_csv(args.out, vectors, names)
    _log(f"{len(vectors)} windows -> {args.out} "
         f"in {time.perf_counter() - start:.2f}s")
    return 0


def cmd_train(args) -> int:
    start = time.perf_counter()
    cfg = _load_config(args.config)
    tables = _read_tables(args.train)
    pooled = concat_tables(tables.values())
    if pooled.rho is None:
        raise ConfigError("training files must carry the rho column")
    cluster_config = _effective_cluster_config(args, cfg)
    clusters = subtractive_cluster(pooled, cluster_config)
    if args.dump_clusters:
        with open(args.dump_clusters, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"c_{name}" for name in pooled.feature_names]
                            + ["c_star"])
            for center in clusters.centers:
                writer.writerow([repr(float(v)) for v in center])
    provenance = _provenance(args.train, cluster_config,
                             {"variant": args.variant})
    if args.variant == "weighted":
        model = identify_weighted(pooled, clusters, provenance)
    else:
        model = identify_baseline(pooled, clusters, provenance)
    save_model(model, args.out)
    print(f"rules: {model.n_rules}")
    if model.variant == "weighted":
        tp = model.time_params
        print("priors: " + " ".join(f"{p:.6f}" for p in tp.priors))
        print("time centroids: " + " ".join(f"{c:.3f}" for c in tp.centroids))
    _log(f"trained {model.variant} model on {pooled.n_rows} rows "
         f"in {time.perf_counter() - start:.2f}s")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    table = read_feature_csv(args.input)
    if table.feature_names != model.feature_set:
        raise ConfigError(
            f"feature set {table.feature_names} does not match the model's "
            f"{model.feature_set}")
    taus = table.taus
    if np.any(np.diff(taus) <= 0):
        raise ValueError("input rows are not in increasing time order")
    cfg = _load_config(args.config)
    order, frame = _sg_settings(args, cfg)
    raw = predict_table(model, table.features, taus)
    clamped = np.clip(raw, 0.0, 1.0)
    rul = np.array([rul_from_ratio(r, t) for r, t in zip(clamped, taus)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        smoothed = smooth_rul(rul, order, frame)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "tau", "rho_hat", "rho_hat_clamped",
                         "rul_hat", "rul_hat_smoothed"])
        for k in range(taus.size):
            writer.writerow([
                str(k + 1), repr(float(taus[k])), repr(float(raw[k])),
                repr(float(clamped[k])),
                "" if not np.isfinite(rul[k]) else repr(float(rul[k])),
                "" if not np.isfinite(smoothed[k]) else repr(float(smoothed[k])),
            ])
    _log(f"{taus.size} predictions -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    tables = _read_tables(args.test)
    for name, table in tables.items():
        if table.feature_names != model.feature_set:
            raise ConfigError(
                f"{name}: feature set does not match the model's "
                f"{model.feature_set}")
        if table.rho is None:
            raise ConfigError(f"{name}: evaluation needs the rho column")
    cfg = _load_config(args.config)
    order, frame = _sg_settings(args, cfg)
    report = evaluate_model(model, tables, sg_order=order, sg_frame=frame)
    write_curves_csv(report, f"{args.out}_curves.csv")
    write_summary_csv([report], f"{args.out}_summary.csv")
    for bearing in report.bearings:
        print(f"{bearing.bearing_id} rrmse: {bearing.rrmse:.6f}")
    print(f"arrmse: {report.arrmse:.6f}")
    return 0


def cmd_benchmark(args) -> int:
    cfg = _load_config(args.config)
    train_tables = _read_tables(args.train)
    test_tables = _read_tables(args.test)
    pooled = concat_tables(train_tables.values())
    if pooled.rho is None:
        raise ConfigError("training files must carry the rho column")
    cluster_config = _effective_cluster_config(args, cfg)
    order, frame = _sg_settings(args, cfg)
    clusters = subtractive_cluster(pooled, cluster_config)
    reports = []
    for variant, identify in (("baseline", identify_baseline),
                              ("weighted", identify_weighted)):
        start = time.perf_counter()
        model = identify(pooled, clusters,
                         _provenance(args.train, cluster_config,
                                     {"variant": variant}))
        elapsed = time.perf_counter() - start
        report = evaluate_model(model, test_tables, method=variant,
                                sg_order=order, sg_frame=frame)
        reports.append(report)
        _log(f"{variant}: identified in {elapsed:.4f}s")
        print(f"{variant} arrmse: {report.arrmse:.6f}")
    write_summary_csv(reports, args.out)
    return 0


def cmd_synth(args) -> int:
    table = synth_bearing(args.seed, args.regimes, args.lifetime,
                          args.noise, args.n_obs, args.n_features,
                          args.start_frac)
    vectors = [
        FeatureVector(table.features[k], float(table.taus[k]), float(table.rho[k]))
        for k in range(table.n_rows)
    ]
    write_feature_csv(args.out, vectors, table.feature_names)
    _log(f"{table.n_rows} synthetic observations -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fisrul",
        description="Fuzzy-model identification for bearing RUL estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    features = sub.add_parser("features", help="extract features from a dataset")
    features.add_argument("--input", required=True,
                          help="dataset directory (or feature CSV with --format csv)")
    features.add_argument("--format", choices=["phm", "ims", "csv"], required=True)
    features.add_argument("--features", default="rms",
                          help="comma-separated feature names (rms,se,ae,lle,cd,diae)")
    features.add_argument("--channel", type=int, default=0,
                          help="IMS channel index")
    features.add_argument("--unlabeled", action="store_true",
                          help="omit the rho column (online prediction input)")
    features.add_argument("--jobs", type=int, default=1)
    features.add_argument("--config", default=None)
    features.add_argument("--out", required=True)
    features.set_defaults(func=cmd_features)

    train = sub.add_parser("train", help="identify a model from feature CSVs")
    train.add_argument("--train", nargs="+", required=True,
                       help="labeled feature CSVs (one per training bearing)")
    train.add_argument("--variant", choices=["baseline", "weighted"],
                       default="weighted")
    train.add_argument("--ra", type=float, default=None)
    train.add_argument("--rb", type=float, default=None)
    train.add_argument("--dump-clusters", default=None,
                       help="also write the cluster-center matrix to this CSV")
    train.add_argument("--config", default=None)
    train.add_argument("--out", required=True)
    train.set_defaults(func=cmd_train)

    predict = sub.add_parser("predict", help="estimate rho and RUL for a CSV")
    predict.add_argument("--model", required=True)
    predict.add_argument("--input", required=True)
    predict.add_argument("--sg-frame", type=int, default=None)
    predict.add_argument("--config", default=None)
    predict.add_argument("--out", required=True)
    predict.set_defaults(func=cmd_predict)

    evaluate = sub.add_parser("evaluate", help="score a model on labeled CSVs")
    evaluate.add_argument("--model", required=True)
    evaluate.add_argument("--test", nargs="+", required=True)
    evaluate.add_argument("--sg-frame", type=int, default=None)
    evaluate.add_argument("--config", default=None)
    evaluate.add_argument("--out", required=True,
                          help="report prefix (writes <out>_curves.csv and "
                               "<out>_summary.csv)")
    evaluate.set_defaults(func=cmd_evaluate)

    benchmark = sub.add_parser(
        "benchmark", help="train both variants and compare on the same folds")
    benchmark.add_argument("--train", nargs="+", required=True)
    benchmark.add_argument("--test", nargs="+", required=True)
    benchmark.add_argument("--ra", type=float, default=None)
    benchmark.add_argument("--rb", type=float, default=None)
    benchmark.add_argument("--sg-frame", type=int, default=None)
    benchmark.add_argument("--config", default=None)
    benchmark.add_argument("--out", required=True, help="summary CSV path")
    benchmark.set_defaults(func=cmd_benchmark)

    synth = sub.add_parser("synth", help="generate a synthetic feature CSV")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--regimes", type=int, default=3)
    synth.add_argument("--lifetime", type=float, default=1200.0)
    synth.add_argument("--noise", type=float, default=0.05)
    synth.add_argument("--n-obs", type=int, default=120)
    synth.add_argument("--n-features", type=int, default=2)
    synth.add_argument("--start-frac", type=float, default=0.1)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _log(f"error: {exc}")
        return 2
    except (LoadError, ValueError, OSError) as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
